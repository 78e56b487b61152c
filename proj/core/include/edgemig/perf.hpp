#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "edgemig/network_state.hpp"
#include "edgemig/topology.hpp"

namespace edgemig {

struct PerfConfig {
  double packet_size_bytes = 1500.0;
  double tau_ms = 1.0;  // baseline per-packet processing delay
  double tau1 = 0.5;    // delay weight in lambda
  double tau2 = 0.5;    // energy weight in lambda
  double energy_base = 10.0;
  double energy_max = 110.0;
  double energy_trans = 2.0;
  bool normalize_lambda = true;

  double energy_cons() const { return energy_max - energy_base; }
  void validate() const;
};

struct LinkDelayTerm {
  int logical_link;
  int link;
  double trans_ms;
  double prop_ms;
};

struct ServerDelayTerm {
  int vnf;
  int server;
  double proc_ms;
};

/// Per-term decomposition of one forwarding graph's end-to-end delay.
struct DelayBreakdown {
  std::vector<LinkDelayTerm> links;
  std::vector<ServerDelayTerm> servers;
  double total_ms = 0.0;
};

struct EnergyReport {
  std::vector<double> per_server;
  double total = 0.0;
};

/// Figures a migration is judged by: summed E2E delay of the affected
/// forwarding graphs and the energy drawn by the servers it touches.
struct SnapshotMetrics {
  double delay_ms = 0.0;
  double energy = 0.0;
};

/// Reductions achieved by a migration; positive means improvement.
struct MigrationDeltas {
  double delay_reduction_ms = 0.0;
  double energy_reduction = 0.0;
};

double transmission_delay_ms(const Link& link, const PerfConfig& cfg);
double link_delay_ms(const Link& link, const PerfConfig& cfg);

/// Gamma * tau / (1 - Gamma). Throws SaturationError for Gamma >= 1.
double proc_delay_ms(double cpu_utilization, double tau_ms);
double proc_delay_ms(const NetworkState& state, int server, const PerfConfig& cfg);

/// Throws IncompleteMapping if the graph is not fully placed and routed.
DelayBreakdown e2e_delay(const NetworkState& state, const Topology& topo, int fg_id,
                         const PerfConfig& cfg);
double e2e_delay_ms(const NetworkState& state, const Topology& topo, int fg_id,
                    const PerfConfig& cfg);

/// Hosting servers draw base + cons * Gamma; any server whose activation flag
/// differs from the previous step adds the transition energy.
double server_energy(const NetworkState& state, int server, const PerfConfig& cfg);
EnergyReport network_energy(const NetworkState& state, const PerfConfig& cfg);

MigrationDeltas migration_deltas(const SnapshotMetrics& before, const SnapshotMetrics& after);

/// tau1 * delta + tau2 * eta, each optionally divided by its pre-migration
/// magnitude so that the two terms are unitless fractions.
double lambda_composite(const MigrationDeltas& deltas, const SnapshotMetrics& before,
                        const PerfConfig& cfg);
double lambda_composite(double delay_reduction, double energy_reduction, double tau1,
                        double tau2, bool normalize, double delay_scale, double energy_scale);

/// (1/T) * sum of lambda over migration events.
double objective_value(std::span<const double> lambdas, std::int64_t horizon);

void to_json(nlohmann::json& j, const PerfConfig& c);
void from_json(const nlohmann::json& j, PerfConfig& c);

}  // namespace edgemig
