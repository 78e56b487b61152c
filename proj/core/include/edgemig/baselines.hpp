#pragma once

#include "edgemig/network_state.hpp"
#include "edgemig/orchestrator.hpp"
#include "edgemig/random.hpp"
#include "edgemig/topology.hpp"
#include "edgemig/workload.hpp"

namespace edgemig {

/// If one of the graph's VNFs sits on a server above the CPU or MEM threshold,
/// move the largest-CPU such VNF to the feasible server with the lowest CPU
/// utilization (ties: lowest id). Otherwise, or with no feasible server, no-op.
MigrationCommand threshold_policy(const NetworkState& state, const Topology& topo,
                                  const VnfFg& fg, const Thresholds& thresholds);

/// With probability p_mig, a uniformly random (VNF, server) pair; else no-op.
MigrationCommand random_policy(const NetworkState& state, const Topology& topo, const VnfFg& fg,
                               double p_mig, Rng& rng);

class ThresholdPolicy final : public MigrationPolicy {
 public:
  MigrationCommand decide(const World& world, int fg_id, TimeStep t) override;
};

class RandomPolicy final : public MigrationPolicy {
 public:
  RandomPolicy(double p_mig, std::uint64_t seed) : p_mig_(p_mig), rng_(seed) {}
  MigrationCommand decide(const World& world, int fg_id, TimeStep t) override;
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

 private:
  double p_mig_;
  Rng rng_;
};

}  // namespace edgemig
