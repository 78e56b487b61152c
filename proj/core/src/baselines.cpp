#include "edgemig/baselines.hpp"

#include "edgemig/errors.hpp"

namespace edgemig {

MigrationCommand threshold_policy(const NetworkState& state, const Topology& topo,
                                  const VnfFg& fg, const Thresholds& thresholds) {
  const FgMapping& m = state.mapping(fg.id);
  int chosen = -1;
  for (int v = 0; v < static_cast<int>(m.hosts.size()); ++v) {
    const int s = m.hosts[static_cast<std::size_t>(v)];
    if (s < 0) continue;
    const bool over =
        state.cpu_utilization(s) > thresholds.cpu || state.mem_utilization(s) > thresholds.mem;
    if (!over) continue;
    if (chosen < 0 || m.cpu[static_cast<std::size_t>(v)] > m.cpu[static_cast<std::size_t>(chosen)]) {
      chosen = v;
    }
  }
  if (chosen < 0) return MigrationCommand::noop();

  const int src = m.hosts[static_cast<std::size_t>(chosen)];
  const double cpu = m.cpu[static_cast<std::size_t>(chosen)];
  const double mem = m.mem[static_cast<std::size_t>(chosen)];
  int best = -1;
  for (int s = 0; s < topo.server_count(); ++s) {
    if (s == src || !placement_fits(state, s, cpu, mem, thresholds)) continue;
    if (best < 0 || state.cpu_utilization(s) < state.cpu_utilization(best)) best = s;
  }
  if (best < 0) return MigrationCommand::noop();
  return MigrationCommand::move(fg.id, chosen, best);
}

MigrationCommand random_policy(const NetworkState& /*state*/, const Topology& topo,
                               const VnfFg& fg, double p_mig, Rng& rng) {
  if (!(p_mig >= 0 && p_mig <= 1)) throw ConfigError("migration probability must be in [0, 1]");
  if (!std::bernoulli_distribution(p_mig)(rng)) return MigrationCommand::noop();
  const int v = std::uniform_int_distribution<int>(0, fg.chain_length() - 1)(rng);
  const int s = std::uniform_int_distribution<int>(0, topo.server_count() - 1)(rng);
  return MigrationCommand::move(fg.id, v, s);
}

MigrationCommand ThresholdPolicy::decide(const World& world, int fg_id, TimeStep /*t*/) {
  return threshold_policy(world.state(), world.topology(), world.fg(fg_id),
                          world.config().thresholds);
}

MigrationCommand RandomPolicy::decide(const World& world, int fg_id, TimeStep /*t*/) {
  return random_policy(world.state(), world.topology(), world.fg(fg_id), p_mig_, rng_);
}

}  // namespace edgemig
