#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "edgemig/event_log.hpp"
#include "edgemig/network_state.hpp"
#include "edgemig/perf.hpp"
#include "edgemig/topology.hpp"
#include "edgemig/workload.hpp"

namespace edgemig {

/// Move VNF `vnf` of forwarding graph `fg_id` to `server`, or do nothing.
struct MigrationCommand {
  int fg_id = -1;
  int vnf = -1;
  int server = -1;

  static MigrationCommand noop() { return {}; }
  static MigrationCommand move(int fg_id, int vnf, int server) { return {fg_id, vnf, server}; }
  bool is_noop() const { return fg_id < 0; }
  bool operator==(const MigrationCommand&) const = default;
};

enum class RevertReason : std::uint8_t {
  None,
  Capacity,   // C1: server capacity
  Threshold,  // C1: utilization threshold
  Bandwidth,  // C1: no route with enough residual bandwidth
  Deadline,   // C2: some affected graph exceeds its maximum E2E delay
  Invalid,    // malformed command
};

const char* to_string(RevertReason reason);

struct MigrationOutcome {
  bool applied = true;
  bool moved = false;  // a VNF changed servers
  RevertReason reason = RevertReason::None;
  MigrationDeltas deltas;
  double lambda = 0.0;
  SnapshotMetrics before;
  SnapshotMetrics after;
};

struct OrchestratorConfig {
  PerfConfig perf;
  Thresholds thresholds;

  void validate() const {
    perf.validate();
    thresholds.validate();
  }
};

struct StepReport {
  TimeStep t = 0;
  int arrivals = 0;
  int accepted = 0;
  int rejected = 0;
  int expired = 0;
  int migrations = 0;  // applied commands that moved a VNF
  int reverts = 0;
  int noops = 0;
  double energy = 0.0;
  std::vector<double> server_energy;
  std::vector<std::pair<int, double>> fg_delays;
  double delay_sum = 0.0;
  std::vector<MigrationOutcome> outcomes;  // one per decision, in fg order
};

class World;

/// Consulted once per active forwarding graph per step.
class MigrationPolicy {
 public:
  virtual ~MigrationPolicy() = default;
  virtual MigrationCommand decide(const World& world, int fg_id, TimeStep t) = 0;
  virtual void observe(const World& /*world*/, int /*fg_id*/, const MigrationCommand& /*cmd*/,
                       const MigrationOutcome& /*outcome*/, TimeStep /*t*/) {}
  virtual void end_step(const World& /*world*/, TimeStep /*t*/) {}
};

class NoopPolicy final : public MigrationPolicy {
 public:
  MigrationCommand decide(const World&, int, TimeStep) override { return MigrationCommand::noop(); }
};

/// One simulated network plus its request stream. Single-threaded; separate
/// worlds share nothing mutable.
class World {
 public:
  World(std::shared_ptr<const Topology> topo, std::vector<VnfFg> requests, OrchestratorConfig cfg,
        EventLog* log = nullptr);

  const Topology& topology() const { return *topo_; }
  const NetworkState& state() const { return state_; }
  const OrchestratorConfig& config() const { return cfg_; }
  const VnfFg& fg(int id) const { return fgs_.at(static_cast<std::size_t>(id)); }
  std::span<const VnfFg> requests() const { return fgs_; }

  /// Deployed, unexpired graphs in ascending id order.
  std::vector<int> active_fgs() const { return state_.fg_ids(); }
  TimeStep last_arrival() const;
  /// True once every request has arrived and nothing remains active.
  bool finished(TimeStep t) const;

  /// Removes graphs whose service status is 0 at t; returns how many.
  int expire_timeouts(TimeStep t);

  /// First-fit deployment: chain order, least-loaded feasible edge server
  /// first, then core. All-or-nothing; a rejection zeroes the service time.
  bool deploy_fg(int fg_id);

  /// Tentative move with full revert on any C1/C2 violation.
  MigrationOutcome execute_migration(const MigrationCommand& cmd, TimeStep t);

  /// expire -> deploy arrivals -> one policy decision per active graph ->
  /// metrics; then latches activation flags for the next step.
  StepReport step(TimeStep t, MigrationPolicy& policy);

  bool meets_deadline(int fg_id) const;

 private:
  std::vector<int> graphs_on(std::initializer_list<int> servers, int include_fg) const;
  bool all_meet_deadline(std::span<const int> fg_ids) const;
  double delay_sum(std::span<const int> fg_ids) const;
  /// Energy of the migration's source and destination, the only servers whose
  /// draw a move can change.
  double local_energy(int src, int dst) const;

  std::shared_ptr<const Topology> topo_;
  std::vector<VnfFg> fgs_;
  OrchestratorConfig cfg_;
  EventLog* log_;
  NetworkState state_;
  std::size_t next_arrival_ = 0;
};

}  // namespace edgemig
