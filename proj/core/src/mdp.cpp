#include "edgemig/mdp.hpp"

#include <algorithm>
#include <string>

#include "edgemig/errors.hpp"

namespace edgemig {

int state_dimension(int servers, int chain_length) { return 6 * servers + 3 * chain_length; }

int action_count(int servers, int chain_length) { return servers * chain_length + 1; }

StateVector encode_state(const NetworkState& state, const Topology& topo, const VnfFg& fg,
                         const PerfConfig& perf, const EncodingConfig& enc) {
  const int n = topo.server_count();
  const int p = fg.chain_length();
  StateVector out = StateVector::Zero(state_dimension(n, p));
  auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const double dmax = fg.deadline_ms;

  for (int s = 0; s < n; ++s) {
    const double active = state.server_active(s) ? 1.0 : 0.0;
    out[s] = active;
    out[n + s] = state.hosted(s).empty() ? 0.0 : 1.0;
    out[2 * n + s] = clamp01(state.cpu_utilization(s));
    out[3 * n + s] = clamp01(state.mem_utilization(s));
    out[4 * n + s] = clamp01(server_energy(state, s, perf) / perf.energy_max);
    const double util = state.cpu_utilization(s);
    const double proc = util >= 1.0 ? dmax : std::min(proc_delay_ms(util, perf.tau_ms), dmax);
    out[5 * n + s] = clamp01(proc / dmax);
  }

  const FgMapping* m = state.has_fg(fg.id) ? &state.mapping(fg.id) : nullptr;
  for (int v = 0; v < p; ++v) {
    const int host = m ? m->hosts[static_cast<std::size_t>(v)] : -1;
    out[6 * n + v] = host >= 0 ? static_cast<double>(host) / n : 0.0;
    const Vnf& vnf = fg.vnfs[static_cast<std::size_t>(v)];
    out[6 * n + p + 2 * v] = clamp01(vnf.cpu_demand / enc.cpu_demand_scale);
    out[6 * n + p + 2 * v + 1] = clamp01(vnf.mem_demand / enc.mem_demand_scale);
  }
  return out;
}

MigrationCommand decode_action(int action, const VnfFg& fg, int servers) {
  const int p = fg.chain_length();
  if (action < 0 || action > p * servers) {
    throw CommandError("action index " + std::to_string(action) + " out of range");
  }
  if (action == p * servers) return MigrationCommand::noop();
  return MigrationCommand::move(fg.id, action / servers, action % servers);
}

int encode_action(const MigrationCommand& cmd, int chain_length, int servers) {
  if (cmd.is_noop()) return chain_length * servers;
  if (cmd.vnf < 0 || cmd.vnf >= chain_length || cmd.server < 0 || cmd.server >= servers) {
    throw CommandError("command does not fit the action space");
  }
  return cmd.vnf * servers + cmd.server;
}

double reward(bool applied, double lambda) { return applied ? sigmoid(lambda) : kRevertedReward; }

double reward(const MigrationOutcome& outcome) { return reward(outcome.applied, outcome.lambda); }

}  // namespace edgemig
