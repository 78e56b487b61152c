#pragma once

// Randomized check drivers shared by the unit suite (small counts) and the
// acceptance binary (full counts). Each returns the number of failures or the
// worst error observed.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "edgemig/actor_critic.hpp"
#include "edgemig/digital_twin.hpp"
#include "edgemig/network_state.hpp"
#include "edgemig/orchestrator.hpp"
#include "edgemig/topology.hpp"
#include "oracles.hpp"

namespace scenario {

using namespace edgemig;

inline VnfFg make_fg(int id, std::vector<std::pair<double, double>> demands,
                     std::vector<double> bws = {}) {
  VnfFg fg;
  fg.id = id;
  for (std::size_t v = 0; v < demands.size(); ++v) {
    fg.vnfs.push_back({id, static_cast<int>(v), demands[v].first, demands[v].second});
  }
  for (std::size_t l = 0; l + 1 < demands.size(); ++l) {
    fg.logical_links.push_back({static_cast<int>(l), static_cast<int>(l) + 1,
                                l < bws.size() ? bws[l] : 0.1});
  }
  fg.service_time = 1;
  return fg;
}

/// Random placements (capacity checks skipped, so overloads happen) compared
/// against the brute-force evaluator.
inline int constraint_mismatches(int instances, std::uint64_t seed) {
  Rng rng(seed);
  int bad = 0;
  for (int k = 0; k < instances; ++k) {
    const int n = 2 + static_cast<int>(rng() % 5);  // 2..6 servers
    const Topology topo = oracle::random_graph(n, 0.4, rng);
    NetworkState st(topo);
    oracle::Instance inst;
    for (const Server& s : topo.servers()) {
      inst.cpu_cap.push_back(s.cpu_capacity);
      inst.mem_cap.push_back(s.mem_capacity);
    }
    for (const Link& l : topo.links()) inst.bw_cap.push_back(l.bandwidth_gbps);

    const int fgs = 1 + static_cast<int>(rng() % 4);  // 1..4 graphs
    const Thresholds thr{0.5 + 0.45 * uniform01(rng), 0.5 + 0.45 * uniform01(rng)};
    for (int f = 0; f < fgs; ++f) {
      const int p = 1 + static_cast<int>(rng() % 4);
      std::vector<std::pair<double, double>> demands;
      std::vector<double> bws;
      for (int v = 0; v < p; ++v) {
        demands.emplace_back(1.0 + std::floor(25.0 * uniform01(rng)),
                             1.0 + std::floor(8.0 * uniform01(rng)));
      }
      for (int l = 0; l + 1 < p; ++l) bws.push_back(0.1 + 2.0 * uniform01(rng));
      const VnfFg fg = make_fg(f, demands, bws);
      st.register_fg(fg);
      std::vector<int> hosts;
      for (int v = 0; v < p; ++v) {
        const int s = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        hosts.push_back(s);
        st.apply_placement(f, v, s, CapacityCheck::Skip);
        inst.items.push_back({s, demands[static_cast<std::size_t>(v)].first,
                              demands[static_cast<std::size_t>(v)].second});
      }
      const std::vector<double> unlimited(static_cast<std::size_t>(topo.link_count()), 1e9);
      for (int l = 0; l + 1 < p; ++l) {
        const auto paths = oracle::all_simple_paths(topo, hosts[static_cast<std::size_t>(l)],
                                                    hosts[static_cast<std::size_t>(l + 1)], 0.0,
                                                    unlimited);
        const auto& path = paths[rng() % paths.size()];
        st.apply_route(f, l, path, CapacityCheck::Skip);
        for (int link : path) inst.loads.push_back({link, bws[static_cast<std::size_t>(l)]});
      }
    }

    std::vector<oracle::Flagged> got;
    for (const Violation& v : check_constraints(st, thr)) {
      got.push_back({static_cast<int>(v.kind), v.id, v.capacity_exceeded});
    }
    std::sort(got.begin(), got.end());
    if (got != oracle::evaluate(inst, thr.cpu, thr.mem)) ++bad;
  }
  return bad;
}

/// Hop counts of shortest_feasible_path against exhaustive enumeration.
inline int routing_mismatches(int graphs, std::uint64_t seed) {
  Rng rng(seed);
  int bad = 0;
  for (int k = 0; k < graphs; ++k) {
    const int n = 2 + static_cast<int>(rng() % 7);  // 2..8 nodes
    const Topology topo = oracle::random_graph(n, 0.35, rng);
    std::vector<double> res(static_cast<std::size_t>(topo.link_count()));
    for (double& r : res) r = 2.0 * uniform01(rng);
    for (int src = 0; src < n; ++src) {
      for (int dst = 0; dst < n; ++dst) {
        const double demand = uniform01(rng);
        const auto got = shortest_feasible_path(topo, src, dst, demand, res);
        const auto want = oracle::min_hops(topo, src, dst, demand, res);
        if (got.has_value() != want.has_value() || (got && got->size() != *want)) ++bad;
      }
    }
  }
  return bad;
}

/// Random deploy / migrate / expire operations; after each one the per-server
/// and per-link usage must equal a re-summation over the mappings, usage must
/// stay within capacity, and every reverted migration must leave the state
/// fingerprint unchanged.
struct ConservationResult {
  int operations = 0;
  int usage_errors = 0;
  int capacity_errors = 0;
  int revert_errors = 0;
  int reverts = 0;
  int released_errors = 0;
};

inline ConservationResult conservation_fuzz(int operations, std::uint64_t seed) {
  Rng rng(seed);
  auto topo = std::make_shared<const Topology>(generate_waxman({3, 4, 0.6, 0.3, seed}, {}));
  WorkloadConfig wl;
  wl.count = 400;
  wl.rate = 1.0;
  wl.mean_service_time = 30.0;
  std::vector<VnfFg> reqs = generate_requests(wl, seed + 1);
  World world(topo, reqs, {});
  const NetworkState& st = world.state();
  ConservationResult out;

  auto audit = [&] {
    std::vector<double> cpu(static_cast<std::size_t>(st.server_count()), 0.0);
    std::vector<double> mem(cpu.size(), 0.0);
    std::vector<double> bw(static_cast<std::size_t>(st.link_count()), 0.0);
    for (int id : st.fg_ids()) {
      const FgMapping& m = st.mapping(id);
      for (std::size_t v = 0; v < m.hosts.size(); ++v) {
        if (m.hosts[v] < 0) continue;
        cpu[static_cast<std::size_t>(m.hosts[v])] += m.cpu[v];
        mem[static_cast<std::size_t>(m.hosts[v])] += m.mem[v];
      }
      for (std::size_t l = 0; l < m.routes.size(); ++l) {
        if (!m.routed[l]) continue;
        for (int link : m.routes[l]) bw[static_cast<std::size_t>(link)] += m.bw[l];
      }
    }
    for (int s = 0; s < st.server_count(); ++s) {
      if (std::abs(cpu[static_cast<std::size_t>(s)] - st.used_cpu(s)) > 1e-9 ||
          std::abs(mem[static_cast<std::size_t>(s)] - st.used_mem(s)) > 1e-9) {
        ++out.usage_errors;
      }
      if (st.used_cpu(s) > st.cpu_capacity(s) + 1e-9 || st.used_mem(s) > st.mem_capacity(s) + 1e-9) {
        ++out.capacity_errors;
      }
    }
    for (int l = 0; l < st.link_count(); ++l) {
      if (std::abs(bw[static_cast<std::size_t>(l)] - st.used_bw(l)) > 1e-9) ++out.usage_errors;
      if (st.used_bw(l) > st.bw_capacity(l) + 1e-9) ++out.capacity_errors;
    }
  };

  TimeStep t = 0;
  std::size_t next = 0;
  for (int op = 0; op < operations; ++op) {
    const double u = uniform01(rng);
    const std::vector<int> active = world.active_fgs();
    if (u < 0.15 && next < reqs.size()) {
      const int id = reqs[next].id;
      t = std::max(t, reqs[next].arrival);
      ++next;
      world.deploy_fg(id);
    } else if (u < 0.2) {
      ++t;
      world.expire_timeouts(t);
    } else if (!active.empty()) {
      const int id = active[rng() % active.size()];
      const int v = static_cast<int>(rng() % static_cast<std::uint64_t>(world.fg(id).chain_length()));
      const int s = static_cast<int>(rng() % static_cast<std::uint64_t>(topo->server_count()));
      const std::uint64_t before = st.fingerprint();
      const MigrationOutcome o = world.execute_migration(MigrationCommand::move(id, v, s), t);
      if (!o.applied) {
        ++out.reverts;
        if (st.fingerprint() != before) ++out.revert_errors;
      }
    }
    ++out.operations;
    audit();
  }

  // Expire everything: usage must return to zero.
  world.expire_timeouts(std::numeric_limits<TimeStep>::max() / 2);
  for (int s = 0; s < st.server_count(); ++s) {
    if (st.used_cpu(s) != 0.0 || st.used_mem(s) != 0.0) ++out.released_errors;
  }
  for (int l = 0; l < st.link_count(); ++l) {
    if (st.used_bw(l) != 0.0) ++out.released_errors;
  }
  return out;
}

// Gradient checks in double precision on instances below 200 parameters.

inline Experience random_experience(int state_dim, int actions, Rng& rng) {
  Experience e;
  e.s = Eigen::VectorXf(state_dim);
  e.s_next = Eigen::VectorXf(state_dim);
  for (int i = 0; i < state_dim; ++i) {
    e.s[i] = static_cast<float>(uniform01(rng));
    e.s_next[i] = static_cast<float>(uniform01(rng));
  }
  e.a = static_cast<int>(rng() % static_cast<std::uint64_t>(actions));
  e.r = uniform01(rng) - 0.5;
  return e;
}

inline ActorCriticConfig tiny_ac_config() {
  ActorCriticConfig c;
  c.state_dim = 4;
  c.actions = 3;
  c.actor_hidden = {6, 5};
  c.actor_tanh = 4;
  c.critic_hidden = {6, 5};
  c.entropy_coef = 0.05;
  return c;
}

inline double actor_gradient_error(std::uint64_t seed, Eigen::Index* params = nullptr) {
  Rng rng(seed);
  ActorCritic<double> ac(tiny_ac_config(), rng);
  const int batch = 5;
  nn::Matrix<double> states(4, batch);
  std::vector<int> actions;
  std::vector<double> adv;
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < 4; ++i) states(i, b) = uniform01(rng);
    actions.push_back(static_cast<int>(rng() % 3));
    adv.push_back(2.0 * uniform01(rng) - 1.0);
  }
  nn::Vector<double> grad = nn::Vector<double>::Zero(ac.actor().param_count());
  ac.actor_loss(states, actions, adv, &grad);
  auto& p = ac.actor().params();
  const auto num =
      oracle::numeric_gradient<double>(p, [&] { return ac.actor_loss(states, actions, adv, nullptr); });
  if (params) *params = p.size();
  return oracle::max_relative_error(grad, num);
}

inline double critic_gradient_error(std::uint64_t seed, Eigen::Index* params = nullptr) {
  Rng rng(seed);
  ActorCritic<double> ac(tiny_ac_config(), rng);
  const int batch = 5;
  nn::Matrix<double> states(4, batch);
  std::vector<double> targets;
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < 4; ++i) states(i, b) = uniform01(rng);
    targets.push_back(uniform01(rng));
  }
  nn::Vector<double> grad = nn::Vector<double>::Zero(ac.critic().param_count());
  ac.critic_loss(states, targets, &grad);
  auto& p = ac.critic().params();
  const auto num =
      oracle::numeric_gradient<double>(p, [&] { return ac.critic_loss(states, targets, nullptr); });
  if (params) *params = p.size();
  return oracle::max_relative_error(grad, num);
}

inline double vae_gradient_error(std::uint64_t seed, Eigen::Index* params = nullptr) {
  Rng rng(seed);
  VaeConfig cfg;
  cfg.encoder_hidden = {4};
  cfg.decoder_hidden = 4;
  cfg.latent = 2;
  const int sd = 3;
  const int ad = 3;
  TwinVae<double> vae(sd, ad, cfg, rng);
  const int batch = 4;
  nn::Matrix<double> states(sd, batch);
  for (Eigen::Index i = 0; i < states.size(); ++i) states.data()[i] = uniform01(rng);
  std::vector<int> acts{0, 2, 1, 2};
  const nn::Matrix<double> onehot = one_hot<double>(acts, ad);
  nn::Matrix<double> noise(cfg.latent, batch);
  std::normal_distribution<double> nd;
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = nd(rng);

  std::vector<nn::Vector<double>> grads;
  vae.loss(states, onehot, noise, &grads);
  double worst = 0.0;
  Eigen::Index total = 0;
  auto blocks = vae.parameter_blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto num = oracle::numeric_gradient<double>(
        *blocks[b], [&] { return vae.loss(states, onehot, noise, nullptr).total; });
    worst = std::max(worst, oracle::max_relative_error(grads[b], num));
    total += blocks[b]->size();
  }
  if (params) *params = total;
  return worst;
}

inline double lstm_gradient_error(std::uint64_t seed, Eigen::Index* params = nullptr) {
  Rng rng(seed);
  const int sd = 2;
  const int ad = 2;
  TwinLstm<double> lstm(sd, ad, {4, 4}, rng);
  const int batch = 4;
  nn::Matrix<double> states(sd, batch);
  nn::Matrix<double> next(sd, batch);
  for (Eigen::Index i = 0; i < states.size(); ++i) {
    states.data()[i] = uniform01(rng);
    next.data()[i] = uniform01(rng);
  }
  std::vector<int> acts{0, 1, 1, 0};
  const nn::Matrix<double> onehot = one_hot<double>(acts, ad);
  const std::vector<double> rewards{0.5, -0.5, 0.53, 0.7};
  std::vector<nn::Vector<double>> grads;
  lstm.loss(states, onehot, next, rewards, 0.7, 1.3, &grads);
  double worst = 0.0;
  Eigen::Index total = 0;
  auto blocks = lstm.parameter_blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto num = oracle::numeric_gradient<double>(*blocks[b], [&] {
      return lstm.loss(states, onehot, next, rewards, 0.7, 1.3, nullptr);
    });
    worst = std::max(worst, oracle::max_relative_error(grads[b], num));
    total += blocks[b]->size();
  }
  if (params) *params = total;
  return worst;
}

}  // namespace scenario
