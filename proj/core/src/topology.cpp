#include "edgemig/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "edgemig/errors.hpp"
#include "edgemig/random.hpp"

namespace edgemig {

void CapacityConfig::validate() const {
  if (!(edge_cpu > 0 && edge_mem > 0 && core_cpu > 0 && core_mem > 0)) {
    throw ConfigError("server capacities must be positive");
  }
  if (!(link_bandwidth_gbps > 0)) throw ConfigError("link bandwidth must be positive");
  if (!(prop_delay_min_ms >= 0 && prop_delay_max_ms >= prop_delay_min_ms)) {
    throw ConfigError("propagation delay range must satisfy 0 <= min <= max");
  }
}

void WaxmanParams::validate() const {
  if (n_edge < 1 || n_core < 1) throw ConfigError("need at least one edge and one core server");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("waxman alpha must be in [0, 1]");
  if (!(beta > 0.0)) throw ConfigError("waxman beta must be positive");
}

Topology::Topology(int n_edge, std::vector<Server> servers, std::vector<Link> links)
    : n_edge_(n_edge), servers_(std::move(servers)), links_(std::move(links)) {
  const int n = server_count();
  if (n_edge_ < 0 || n_edge_ > n) throw ConfigError("edge count out of range");
  for (int i = 0; i < n; ++i) {
    const Server& s = servers_[static_cast<std::size_t>(i)];
    if (s.id != i) throw ConfigError("server ids must be dense and ordered");
    if (!(s.cpu_capacity > 0 && s.mem_capacity > 0)) {
      throw ConfigError("server " + std::to_string(i) + " has non-positive capacity");
    }
    if ((s.tier == Tier::Edge) != (i < n_edge_)) {
      throw ConfigError("server " + std::to_string(i) + " tier does not match its index");
    }
  }
  adjacency_.assign(static_cast<std::size_t>(n), {});
  for (int l = 0; l < link_count(); ++l) {
    const Link& link = links_[static_cast<std::size_t>(l)];
    if (link.id != l) throw ConfigError("link ids must be dense and ordered");
    if (link.a == link.b || link.a < 0 || link.b < 0 || link.a >= n || link.b >= n) {
      throw ConfigError("link " + std::to_string(l) + " has invalid endpoints");
    }
    if (!(link.bandwidth_gbps > 0) || !(link.prop_delay_ms >= 0)) {
      throw ConfigError("link " + std::to_string(l) + " has invalid attributes");
    }
    if (link_between(link.a, link.b)) {
      throw ConfigError("duplicate link between " + std::to_string(link.a) + " and " +
                        std::to_string(link.b));
    }
    adjacency_[static_cast<std::size_t>(link.a)].push_back({link.b, l});
    adjacency_[static_cast<std::size_t>(link.b)].push_back({link.a, l});
  }
  if (!is_connected()) throw ConfigError("topology is not connected");
}

std::optional<int> Topology::link_between(int a, int b) const {
  if (a < 0 || a >= static_cast<int>(adjacency_.size())) return std::nullopt;
  for (const Adjacent& adj : adjacency_[static_cast<std::size_t>(a)]) {
    if (adj.server == b) return adj.link;
  }
  return std::nullopt;
}

bool Topology::is_connected() const {
  const int n = server_count();
  if (n == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (const Adjacent& adj : adjacency_[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(adj.server)]) {
        seen[static_cast<std::size_t>(adj.server)] = 1;
        ++reached;
        frontier.push(adj.server);
      }
    }
  }
  return reached == n;
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] =
        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace

Topology generate_waxman(const WaxmanParams& params, const CapacityConfig& caps) {
  params.validate();
  caps.validate();

  const int n = params.n_edge + params.n_core;
  Rng rng(params.seed);

  std::vector<Server> servers;
  servers.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const bool edge = i < params.n_edge;
    Server s;
    s.id = i;
    s.tier = edge ? Tier::Edge : Tier::Core;
    s.cpu_capacity = edge ? caps.edge_cpu : caps.core_cpu;
    s.mem_capacity = edge ? caps.edge_mem : caps.core_mem;
    s.x = uniform01(rng);
    s.y = uniform01(rng);
    servers.push_back(s);
  }

  auto distance = [&](int u, int v) {
    const Server& a = servers[static_cast<std::size_t>(u)];
    const Server& b = servers[static_cast<std::size_t>(v)];
    return std::hypot(a.x - b.x, a.y - b.y);
  };

  double max_dist = 0.0;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) max_dist = std::max(max_dist, distance(u, v));
  }
  if (max_dist <= 0.0) max_dist = 1.0;

  std::vector<std::pair<int, int>> pairs;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double p = params.alpha * std::exp(-distance(u, v) / (params.beta * max_dist));
      if (uniform01(rng) < p) pairs.emplace_back(u, v);
    }
  }

  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  int components = n;
  for (auto [u, v] : pairs) {
    const int ru = find_root(parent, u);
    const int rv = find_root(parent, v);
    if (ru != rv) {
      parent[static_cast<std::size_t>(ru)] = rv;
      --components;
    }
  }
  while (components > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> best_pair{-1, -1};
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (find_root(parent, u) == find_root(parent, v)) continue;
        const double d = distance(u, v);
        if (d < best) {
          best = d;
          best_pair = {u, v};
        }
      }
    }
    pairs.push_back(best_pair);
    parent[static_cast<std::size_t>(find_root(parent, best_pair.first))] =
        find_root(parent, best_pair.second);
    --components;
  }

  std::uniform_real_distribution<double> prop(caps.prop_delay_min_ms, caps.prop_delay_max_ms);
  std::vector<Link> links;
  links.reserve(pairs.size());
  for (auto [u, v] : pairs) {
    Link link;
    link.id = static_cast<int>(links.size());
    link.a = u;
    link.b = v;
    link.bandwidth_gbps = caps.link_bandwidth_gbps;
    link.prop_delay_ms =
        caps.prop_delay_max_ms > caps.prop_delay_min_ms ? prop(rng) : caps.prop_delay_min_ms;
    links.push_back(link);
  }

  Topology topo(params.n_edge, std::move(servers), std::move(links));
  topo.waxman = params;
  topo.capacities = caps;
  return topo;
}

namespace {

struct PathLabel {
  int hops = 0;
  double delay = 0.0;
  std::vector<int> links;

  bool better_than(const PathLabel& other) const {
    if (hops != other.hops) return hops < other.hops;
    if (delay != other.delay) return delay < other.delay;
    return links < other.links;
  }
};

}  // namespace

std::optional<std::vector<int>> shortest_feasible_path(const Topology& topo, int src, int dst,
                                                       double bw_demand,
                                                       std::span<const double> residual_bw) {
  const int n = topo.server_count();
  if (src < 0 || src >= n || dst < 0 || dst >= n) {
    throw std::out_of_range("shortest_feasible_path: server id out of range");
  }
  if (residual_bw.size() != static_cast<std::size_t>(topo.link_count())) {
    throw std::invalid_argument("shortest_feasible_path: residual vector size mismatch");
  }
  if (src == dst) return std::vector<int>{};

  // Label-setting search on (hops, delay, link sequence); every extension
  // strictly increases hops, so a settled label is final. O(V^2) selection is
  // fine at the graph sizes simulated here.
  std::vector<std::optional<PathLabel>> best(static_cast<std::size_t>(n));
  std::vector<char> settled(static_cast<std::size_t>(n), 0);
  best[static_cast<std::size_t>(src)] = PathLabel{};

  while (true) {
    int u = -1;
    for (int v = 0; v < n; ++v) {
      const auto& label = best[static_cast<std::size_t>(v)];
      if (settled[static_cast<std::size_t>(v)] || !label) continue;
      if (u < 0 || label->better_than(*best[static_cast<std::size_t>(u)])) u = v;
    }
    if (u < 0) return std::nullopt;
    if (u == dst) return best[static_cast<std::size_t>(u)]->links;
    settled[static_cast<std::size_t>(u)] = 1;

    const PathLabel& base = *best[static_cast<std::size_t>(u)];
    for (const Adjacent& adj : topo.neighbors(u)) {
      if (settled[static_cast<std::size_t>(adj.server)]) continue;
      if (residual_bw[static_cast<std::size_t>(adj.link)] + kCapacityTolerance < bw_demand) {
        continue;
      }
      PathLabel cand;
      cand.hops = base.hops + 1;
      cand.delay = base.delay + topo.link(adj.link).prop_delay_ms;
      cand.links = base.links;
      cand.links.push_back(adj.link);
      auto& slot = best[static_cast<std::size_t>(adj.server)];
      if (!slot || cand.better_than(*slot)) slot = std::move(cand);
    }
  }
}

void to_json(nlohmann::json& j, const CapacityConfig& c) {
  j = nlohmann::json{{"edge_cpu", c.edge_cpu},
                     {"edge_mem", c.edge_mem},
                     {"core_cpu", c.core_cpu},
                     {"core_mem", c.core_mem},
                     {"link_bandwidth_gbps", c.link_bandwidth_gbps},
                     {"prop_delay_min_ms", c.prop_delay_min_ms},
                     {"prop_delay_max_ms", c.prop_delay_max_ms}};
}

void from_json(const nlohmann::json& j, CapacityConfig& c) {
  CapacityConfig d;
  c.edge_cpu = j.value("edge_cpu", d.edge_cpu);
  c.edge_mem = j.value("edge_mem", d.edge_mem);
  c.core_cpu = j.value("core_cpu", d.core_cpu);
  c.core_mem = j.value("core_mem", d.core_mem);
  c.link_bandwidth_gbps = j.value("link_bandwidth_gbps", d.link_bandwidth_gbps);
  c.prop_delay_min_ms = j.value("prop_delay_min_ms", d.prop_delay_min_ms);
  c.prop_delay_max_ms = j.value("prop_delay_max_ms", d.prop_delay_max_ms);
}

void to_json(nlohmann::json& j, const WaxmanParams& p) {
  j = nlohmann::json{{"n_edge", p.n_edge},
                     {"n_core", p.n_core},
                     {"alpha", p.alpha},
                     {"beta", p.beta},
                     {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, WaxmanParams& p) {
  WaxmanParams d;
  p.n_edge = j.value("n_edge", d.n_edge);
  p.n_core = j.value("n_core", d.n_core);
  p.alpha = j.value("alpha", d.alpha);
  p.beta = j.value("beta", d.beta);
  p.seed = j.value("seed", d.seed);
}

nlohmann::json topology_to_json(const Topology& topo) {
  nlohmann::json servers = nlohmann::json::array();
  for (const Server& s : topo.servers()) {
    servers.push_back({{"id", s.id},
                       {"tier", s.tier == Tier::Edge ? "edge" : "core"},
                       {"cpu_capacity", s.cpu_capacity},
                       {"mem_capacity", s.mem_capacity},
                       {"x", s.x},
                       {"y", s.y}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (const Link& l : topo.links()) {
    links.push_back({{"id", l.id},
                     {"a", l.a},
                     {"b", l.b},
                     {"bandwidth_gbps", l.bandwidth_gbps},
                     {"prop_delay_ms", l.prop_delay_ms}});
  }
  nlohmann::json j{{"n_edge", topo.edge_count()}, {"servers", servers}, {"links", links}};
  if (topo.waxman) j["waxman"] = *topo.waxman;
  if (topo.capacities) j["capacities"] = *topo.capacities;
  return j;
}

Topology topology_from_json(const nlohmann::json& j) {
  std::vector<Server> servers;
  for (const auto& js : j.at("servers")) {
    Server s;
    s.id = js.at("id").get<int>();
    const auto tier = js.at("tier").get<std::string>();
    if (tier != "edge" && tier != "core") throw ConfigError("unknown server tier '" + tier + "'");
    s.tier = tier == "edge" ? Tier::Edge : Tier::Core;
    s.cpu_capacity = js.at("cpu_capacity").get<double>();
    s.mem_capacity = js.at("mem_capacity").get<double>();
    s.x = js.value("x", 0.0);
    s.y = js.value("y", 0.0);
    servers.push_back(s);
  }
  std::vector<Link> links;
  for (const auto& jl : j.at("links")) {
    Link l;
    l.id = jl.at("id").get<int>();
    l.a = jl.at("a").get<int>();
    l.b = jl.at("b").get<int>();
    l.bandwidth_gbps = jl.at("bandwidth_gbps").get<double>();
    l.prop_delay_ms = jl.at("prop_delay_ms").get<double>();
    links.push_back(l);
  }
  Topology topo(j.at("n_edge").get<int>(), std::move(servers), std::move(links));
  if (j.contains("waxman")) topo.waxman = j.at("waxman").get<WaxmanParams>();
  if (j.contains("capacities")) topo.capacities = j.at("capacities").get<CapacityConfig>();
  return topo;
}

}  // namespace edgemig
