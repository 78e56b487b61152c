#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library code it is checking.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "edgemig/network_state.hpp"
#include "edgemig/random.hpp"
#include "edgemig/topology.hpp"
#include "edgemig/workload.hpp"

namespace oracle {

using edgemig::Link;
using edgemig::Server;
using edgemig::Topology;

inline bool bfs_connected(const Topology& topo) {
  const int n = topo.server_count();
  if (n == 0) return true;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const Link& l : topo.links()) {
    adj[static_cast<std::size_t>(l.a)].push_back(l.b);
    adj[static_cast<std::size_t>(l.b)].push_back(l.a);
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      ++count;
      q.push(v);
    }
  }
  return count == n;
}

/// Every simple path from src to dst, as link-id sequences, over links whose
/// residual covers the demand.
inline std::vector<std::vector<int>> all_simple_paths(const Topology& topo, int src, int dst,
                                                      double demand,
                                                      const std::vector<double>& residual) {
  std::vector<std::vector<int>> out;
  std::vector<char> visited(static_cast<std::size_t>(topo.server_count()), 0);
  std::vector<int> path;
  std::function<void(int)> dfs = [&](int u) {
    if (u == dst) {
      out.push_back(path);
      return;
    }
    visited[static_cast<std::size_t>(u)] = 1;
    for (const Link& l : topo.links()) {
      if (l.a != u && l.b != u) continue;
      if (residual[static_cast<std::size_t>(l.id)] + 1e-9 < demand) continue;
      const int v = l.other(u);
      if (visited[static_cast<std::size_t>(v)]) continue;
      path.push_back(l.id);
      dfs(v);
      path.pop_back();
    }
    visited[static_cast<std::size_t>(u)] = 0;
  };
  dfs(src);
  return out;
}

inline std::optional<std::size_t> min_hops(const Topology& topo, int src, int dst, double demand,
                                           const std::vector<double>& residual) {
  if (src == dst) return 0;
  std::optional<std::size_t> best;
  for (const auto& p : all_simple_paths(topo, src, dst, demand, residual)) {
    if (!best || p.size() < *best) best = p.size();
  }
  return best;
}

/// Random connected graph: a random spanning tree plus extra links with
/// probability `extra_prob` per remaining pair.
inline Topology random_graph(int n, double extra_prob, edgemig::Rng& rng) {
  std::vector<Server> servers;
  for (int i = 0; i < n; ++i) {
    servers.push_back({i, i < n / 2 ? edgemig::Tier::Edge : edgemig::Tier::Core, 40.0, 16.0,
                       edgemig::uniform01(rng), edgemig::uniform01(rng)});
  }
  std::vector<std::vector<char>> has(static_cast<std::size_t>(n),
                                     std::vector<char>(static_cast<std::size_t>(n), 0));
  std::vector<Link> links;
  auto add = [&](int a, int b) {
    has[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
    has[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
    links.push_back({static_cast<int>(links.size()), a, b, 0.5 + 3.0 * edgemig::uniform01(rng),
                     0.1 + 0.9 * edgemig::uniform01(rng)});
  };
  for (int v = 1; v < n; ++v) {
    add(static_cast<int>(rng() % static_cast<std::uint64_t>(v)), v);
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!has[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] &&
          edgemig::uniform01(rng) < extra_prob) {
        add(a, b);
      }
    }
  }
  return Topology(n / 2, std::move(servers), std::move(links));
}

/// A placement instance described without the library: per-server capacities,
/// per-link bandwidth and a list of (fg, vnf, server, cpu, mem) placements and
/// (link, bw) route loads.
struct Instance {
  std::vector<double> cpu_cap, mem_cap, bw_cap;
  struct Item {
    int server;
    double cpu;
    double mem;
  };
  std::vector<Item> items;
  struct Load {
    int link;
    double bw;
  };
  std::vector<Load> loads;
};

struct Flagged {
  int kind;  // 0 cpu, 1 mem, 2 link
  int id;
  bool hard;
  bool operator==(const Flagged&) const = default;
  bool operator<(const Flagged& o) const {
    return std::tie(kind, id, hard) < std::tie(o.kind, o.id, o.hard);
  }
};

/// Server s violates when its summed demand exceeds thr * capacity; it is a
/// hard violation when the sum also exceeds the capacity. Links violate only on
/// exceeding bandwidth.
inline std::vector<Flagged> evaluate(const Instance& inst, double cpu_thr, double mem_thr) {
  std::vector<Flagged> out;
  for (std::size_t s = 0; s < inst.cpu_cap.size(); ++s) {
    double cpu = 0.0;
    double mem = 0.0;
    for (const auto& it : inst.items) {
      if (static_cast<std::size_t>(it.server) != s) continue;
      cpu += it.cpu;
      mem += it.mem;
    }
    if (cpu / inst.cpu_cap[s] > cpu_thr) {
      out.push_back({0, static_cast<int>(s), cpu > inst.cpu_cap[s] + 1e-9});
    }
    if (mem / inst.mem_cap[s] > mem_thr) {
      out.push_back({1, static_cast<int>(s), mem > inst.mem_cap[s] + 1e-9});
    }
  }
  for (std::size_t l = 0; l < inst.bw_cap.size(); ++l) {
    double bw = 0.0;
    for (const auto& ld : inst.loads) {
      if (static_cast<std::size_t>(ld.link) == l) bw += ld.bw;
    }
    if (bw > inst.bw_cap[l] + 1e-9) out.push_back({2, static_cast<int>(l), true});
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Central differences of a scalar function over every entry of `params`.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> numeric_gradient(Eigen::Matrix<T, Eigen::Dynamic, 1>& params,
                                                      const std::function<double()>& f,
                                                      double h = 1e-5) {
  Eigen::Matrix<T, Eigen::Dynamic, 1> g(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const T keep = params[i];
    params[i] = keep + static_cast<T>(h);
    const double up = f();
    params[i] = keep - static_cast<T>(h);
    const double down = f();
    params[i] = keep;
    g[i] = static_cast<T>((up - down) / (2.0 * h));
  }
  return g;
}

/// max_i |a_i - n_i| / max(|a_i| + |n_i|, floor).
template <typename A, typename B>
double max_relative_error(const A& analytic, const B& numeric, double floor = 1e-7) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = static_cast<double>(analytic[i]);
    const double n = static_cast<double>(numeric[i]);
    const double denom = std::max(std::abs(a) + std::abs(n), floor);
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

/// Pearson chi-square statistic for observed counts against a uniform
/// expectation.
inline double chi_square_uniform(const std::vector<int>& counts) {
  double total = 0.0;
  for (int c : counts) total += c;
  const double expect = total / static_cast<double>(counts.size());
  double chi = 0.0;
  for (int c : counts) chi += (c - expect) * (c - expect) / expect;
  return chi;
}

/// Upper 0.1% chi-square critical value via the Wilson-Hilferty approximation.
inline double chi_square_critical(int dof) {
  const double z = 3.090;
  const double k = dof;
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

}  // namespace oracle
