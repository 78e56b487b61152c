#pragma once

#include <cmath>

#include <Eigen/Core>

#include "edgemig/network_state.hpp"
#include "edgemig/orchestrator.hpp"
#include "edgemig/perf.hpp"
#include "edgemig/topology.hpp"
#include "edgemig/workload.hpp"

namespace edgemig {

using StateVector = Eigen::VectorXd;

/// Normalizers for the demand block of the state vector.
struct EncodingConfig {
  double cpu_demand_scale = 20.0;
  double mem_demand_scale = 4.0;
};

/// 6 per-server blocks (active, hosting, cpu util, mem util, energy, proc
/// delay) followed by the focal graph's host indices and interleaved demands.
int state_dimension(int servers, int chain_length);
int action_count(int servers, int chain_length);

/// Layout, each entry in [0, 1]:
///   [0, n)      active flag          [n, 2n)   hosting flag
///   [2n, 3n)    CPU utilization      [3n, 4n)  MEM utilization
///   [4n, 5n)    energy / e_max       [5n, 6n)  min(D_proc, D_max) / D_max
///   [6n, 6n+p)  host index / n       then (cpu/scale, mem/scale) per VNF
StateVector encode_state(const NetworkState& state, const Topology& topo, const VnfFg& fg,
                         const PerfConfig& perf, const EncodingConfig& enc = {});

/// Index p*n is the no-op; otherwise vnf = a / n, server = a % n.
MigrationCommand decode_action(int action, const VnfFg& fg, int servers);
int encode_action(const MigrationCommand& cmd, int chain_length, int servers);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Penalty applied to reverted migrations: sigm(0) - 1.
inline constexpr double kRevertedReward = -0.5;

/// sigm(lambda) for applied outcomes, kRevertedReward otherwise.
double reward(const MigrationOutcome& outcome);
double reward(bool applied, double lambda);

}  // namespace edgemig
