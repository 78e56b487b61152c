#include "edgemig/perf.hpp"

#include <algorithm>
#include <string>

#include "edgemig/errors.hpp"

namespace edgemig {

namespace {
constexpr double kScaleFloor = 1e-9;
}

void PerfConfig::validate() const {
  if (!(packet_size_bytes > 0)) throw ConfigError("packet size must be positive");
  if (!(tau_ms >= 0)) throw ConfigError("tau must be non-negative");
  if (!(tau1 >= 0 && tau1 <= 1 && tau2 >= 0 && tau2 <= 1)) {
    throw ConfigError("lambda weights must lie in [0, 1]");
  }
  if (!(energy_base >= 0 && energy_max >= energy_base && energy_trans >= 0)) {
    throw ConfigError("energy constants must satisfy 0 <= base <= max, trans >= 0");
  }
}

double transmission_delay_ms(const Link& link, const PerfConfig& cfg) {
  return cfg.packet_size_bytes * 8.0 / (link.bandwidth_gbps * 1e9) * 1000.0;
}

double link_delay_ms(const Link& link, const PerfConfig& cfg) {
  return transmission_delay_ms(link, cfg) + link.prop_delay_ms;
}

double proc_delay_ms(double cpu_utilization, double tau_ms) {
  if (cpu_utilization >= 1.0) {
    throw SaturationError("server saturated: utilization " + std::to_string(cpu_utilization));
  }
  return cpu_utilization * tau_ms / (1.0 - cpu_utilization);
}

double proc_delay_ms(const NetworkState& state, int server, const PerfConfig& cfg) {
  return proc_delay_ms(state.cpu_utilization(server), cfg.tau_ms);
}

DelayBreakdown e2e_delay(const NetworkState& state, const Topology& topo, int fg_id,
                         const PerfConfig& cfg) {
  const FgMapping& m = state.mapping(fg_id);
  DelayBreakdown out;
  for (std::size_t l = 0; l < m.routes.size(); ++l) {
    if (!m.routed[l]) {
      throw IncompleteMapping("logical link " + std::to_string(l) + " of fg " +
                              std::to_string(fg_id) + " is not routed");
    }
    for (int link : m.routes[l]) {
      const Link& phys = topo.link(link);
      LinkDelayTerm term{static_cast<int>(l), link, transmission_delay_ms(phys, cfg),
                         phys.prop_delay_ms};
      out.total_ms += term.trans_ms + term.prop_ms;
      out.links.push_back(term);
    }
  }
  for (std::size_t v = 0; v < m.hosts.size(); ++v) {
    if (m.hosts[v] < 0) {
      throw IncompleteMapping("vnf " + std::to_string(v) + " of fg " + std::to_string(fg_id) +
                              " is not placed");
    }
    ServerDelayTerm term{static_cast<int>(v), m.hosts[v], proc_delay_ms(state, m.hosts[v], cfg)};
    out.total_ms += term.proc_ms;
    out.servers.push_back(term);
  }
  return out;
}

double e2e_delay_ms(const NetworkState& state, const Topology& topo, int fg_id,
                    const PerfConfig& cfg) {
  return e2e_delay(state, topo, fg_id, cfg).total_ms;
}

double server_energy(const NetworkState& state, int server, const PerfConfig& cfg) {
  double e = 0.0;
  const bool active = state.server_active(server);
  if (active) e += cfg.energy_base + cfg.energy_cons() * state.cpu_utilization(server);
  if (active != state.previously_active(server)) e += cfg.energy_trans;
  return e;
}

EnergyReport network_energy(const NetworkState& state, const PerfConfig& cfg) {
  EnergyReport r;
  r.per_server.reserve(static_cast<std::size_t>(state.server_count()));
  for (int s = 0; s < state.server_count(); ++s) {
    const double e = server_energy(state, s, cfg);
    r.per_server.push_back(e);
    r.total += e;
  }
  return r;
}

MigrationDeltas migration_deltas(const SnapshotMetrics& before, const SnapshotMetrics& after) {
  return {before.delay_ms - after.delay_ms, before.energy - after.energy};
}

double lambda_composite(double delay_reduction, double energy_reduction, double tau1,
                        double tau2, bool normalize, double delay_scale, double energy_scale) {
  if (!normalize) return tau1 * delay_reduction + tau2 * energy_reduction;
  return tau1 * (delay_reduction / std::max(delay_scale, kScaleFloor)) +
         tau2 * (energy_reduction / std::max(energy_scale, kScaleFloor));
}

double lambda_composite(const MigrationDeltas& deltas, const SnapshotMetrics& before,
                        const PerfConfig& cfg) {
  return lambda_composite(deltas.delay_reduction_ms, deltas.energy_reduction, cfg.tau1, cfg.tau2,
                          cfg.normalize_lambda, before.delay_ms, before.energy);
}

double objective_value(std::span<const double> lambdas, std::int64_t horizon) {
  if (horizon <= 0) return 0.0;
  double sum = 0.0;
  for (double l : lambdas) sum += l;
  return sum / static_cast<double>(horizon);
}

void to_json(nlohmann::json& j, const PerfConfig& c) {
  j = nlohmann::json{{"packet_size_bytes", c.packet_size_bytes},
                     {"tau_ms", c.tau_ms},
                     {"tau1", c.tau1},
                     {"tau2", c.tau2},
                     {"energy_base", c.energy_base},
                     {"energy_max", c.energy_max},
                     {"energy_trans", c.energy_trans},
                     {"normalize_lambda", c.normalize_lambda}};
}

void from_json(const nlohmann::json& j, PerfConfig& c) {
  PerfConfig d;
  c.packet_size_bytes = j.value("packet_size_bytes", d.packet_size_bytes);
  c.tau_ms = j.value("tau_ms", d.tau_ms);
  c.tau1 = j.value("tau1", d.tau1);
  c.tau2 = j.value("tau2", d.tau2);
  c.energy_base = j.value("energy_base", d.energy_base);
  c.energy_max = j.value("energy_max", d.energy_max);
  c.energy_trans = j.value("energy_trans", d.energy_trans);
  c.normalize_lambda = j.value("normalize_lambda", d.normalize_lambda);
}

}  // namespace edgemig
