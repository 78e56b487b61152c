#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgemig/topology.hpp"
#include "edgemig/workload.hpp"

namespace edgemig {

enum class ResourceKind : std::uint8_t { ServerCpu, ServerMem, LinkBw };

const char* to_string(ResourceKind kind);

struct Violation {
  ResourceKind kind;
  int id;
  double utilization;
  bool capacity_exceeded;  // hard bound broken, not just the threshold

  bool operator==(const Violation&) const = default;
};

/// CPU/MEM utilization levels above which a placement counts as violating.
struct Thresholds {
  double cpu = 0.8;
  double mem = 0.8;

  void validate() const;
};

/// Placement and routing of one forwarding graph. hosts[v] < 0 means VNF v is
/// unplaced; routes[l] is meaningful only when routed[l] is set.
struct FgMapping {
  std::vector<int> hosts;
  std::vector<std::vector<int>> routes;
  std::vector<char> routed;
  std::vector<double> cpu;
  std::vector<double> mem;
  std::vector<double> bw;
};

enum class CapacityCheck : std::uint8_t { Enforce, Skip };

/// Mutable placement (y), routing (z) and activation (x) state of the network.
///
/// Per-server and per-link usage is recomputed from the set of hosted items in
/// a fixed order after every mutation, so undoing a change restores the usage
/// figures bit-for-bit.
class NetworkState {
 public:
  explicit NetworkState(const Topology& topo);

  int server_count() const { return static_cast<int>(cpu_cap_.size()); }
  int link_count() const { return static_cast<int>(bw_cap_.size()); }

  void register_fg(const VnfFg& fg);
  void remove_fg(int fg_id);
  bool has_fg(int fg_id) const { return fgs_.contains(fg_id); }
  std::vector<int> fg_ids() const;
  const FgMapping& mapping(int fg_id) const;
  bool fully_mapped(int fg_id) const;

  /// Throws InfeasiblePlacement (state unchanged) if a capacity would be exceeded.
  void apply_placement(int fg_id, int vnf, int server,
                       CapacityCheck check = CapacityCheck::Enforce);
  void remove_placement(int fg_id, int vnf);
  void apply_route(int fg_id, int logical_link, std::vector<int> path,
                   CapacityCheck check = CapacityCheck::Enforce);
  void remove_route(int fg_id, int logical_link);

  std::optional<int> host(int fg_id, int vnf) const;

  double cpu_capacity(int s) const { return cpu_cap_[idx(s)]; }
  double mem_capacity(int s) const { return mem_cap_[idx(s)]; }
  double bw_capacity(int l) const { return bw_cap_[idx(l)]; }
  double used_cpu(int s) const { return used_cpu_[idx(s)]; }
  double used_mem(int s) const { return used_mem_[idx(s)]; }
  double used_bw(int l) const { return used_bw_[idx(l)]; }
  double residual_cpu(int s) const { return cpu_cap_[idx(s)] - used_cpu_[idx(s)]; }
  double residual_mem(int s) const { return mem_cap_[idx(s)] - used_mem_[idx(s)]; }
  double residual_bw(int l) const { return bw_cap_[idx(l)] - used_bw_[idx(l)]; }
  std::vector<double> residual_bw() const;

  double cpu_utilization(int s) const { return used_cpu_[idx(s)] / cpu_cap_[idx(s)]; }
  double mem_utilization(int s) const { return used_mem_[idx(s)] / mem_cap_[idx(s)]; }

  /// (fg, vnf) pairs hosted by server s, ascending.
  const std::set<std::pair<int, int>>& hosted(int s) const { return hosted_[idx(s)]; }
  /// (fg, logical link) pairs routed over link l, ascending.
  const std::set<std::pair<int, int>>& carried(int l) const { return carried_[idx(l)]; }

  bool server_active(int s) const { return !hosted_[idx(s)].empty(); }
  bool link_active(int l) const { return !carried_[idx(l)].empty(); }
  bool previously_active(int s) const { return prev_active_[idx(s)] != 0; }
  /// Latches the current server activation flags as the t-1 reference.
  void roll_activation();

  /// FNV-1a digest over placements, routes, usage and activation history.
  std::uint64_t fingerprint() const;
  nlohmann::json snapshot() const;

 private:
  static std::size_t idx(int i) { return static_cast<std::size_t>(i); }
  FgMapping& mapping_mut(int fg_id);
  void recompute_server(int s);
  void recompute_link(int l);

  std::vector<double> cpu_cap_, mem_cap_, bw_cap_;
  std::vector<double> used_cpu_, used_mem_, used_bw_;
  std::vector<std::set<std::pair<int, int>>> hosted_;
  std::vector<std::set<std::pair<int, int>>> carried_;
  std::vector<char> prev_active_;
  std::map<int, FgMapping> fgs_;
};

/// Capacity and utilization-threshold violations of the current
/// state. A server is listed when its utilization exceeds the threshold; a link
/// when its load exceeds its bandwidth.
std::vector<Violation> check_constraints(const NetworkState& state, const Thresholds& thresholds);

/// Whether placing a (cpu, mem) demand on s keeps it within capacity and below
/// the thresholds.
bool placement_fits(const NetworkState& state, int s, double cpu, double mem,
                    const Thresholds& thresholds);

}  // namespace edgemig
