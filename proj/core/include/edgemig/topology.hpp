#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace edgemig {

enum class Tier : std::uint8_t { Edge, Core };

struct Server {
  int id = 0;
  Tier tier = Tier::Edge;
  double cpu_capacity = 0.0;
  double mem_capacity = 0.0;
  double x = 0.0;  // position in the unit square
  double y = 0.0;
};

struct Link {
  int id = 0;
  int a = 0;
  int b = 0;
  double bandwidth_gbps = 0.0;
  double prop_delay_ms = 0.0;

  int other(int s) const { return s == a ? b : a; }
};

struct Adjacent {
  int server;
  int link;
};

/// Per-tier server capacities and link attribute ranges.
struct CapacityConfig {
  double edge_cpu = 40.0;
  double edge_mem = 16.0;
  double core_cpu = 200.0;
  double core_mem = 64.0;
  double link_bandwidth_gbps = 3.5;
  double prop_delay_min_ms = 0.1;
  double prop_delay_max_ms = 1.0;

  void validate() const;
};

struct WaxmanParams {
  int n_edge = 20;
  int n_core = 40;
  double alpha = 0.5;
  double beta = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Weighted undirected edge-core graph. Servers [0, n_edge) are edge tier,
/// the rest core tier. Immutable after construction; always connected.
class Topology {
 public:
  Topology(int n_edge, std::vector<Server> servers, std::vector<Link> links);

  int server_count() const { return static_cast<int>(servers_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }
  int edge_count() const { return n_edge_; }

  const Server& server(int id) const { return servers_.at(static_cast<std::size_t>(id)); }
  const Link& link(int id) const { return links_.at(static_cast<std::size_t>(id)); }
  std::span<const Server> servers() const { return servers_; }
  std::span<const Link> links() const { return links_; }
  std::span<const Adjacent> neighbors(int s) const {
    return adjacency_.at(static_cast<std::size_t>(s));
  }

  std::optional<int> link_between(int a, int b) const;
  bool is_connected() const;

  // Generation provenance, carried through serialization.
  std::optional<WaxmanParams> waxman;
  std::optional<CapacityConfig> capacities;

 private:
  int n_edge_;
  std::vector<Server> servers_;
  std::vector<Link> links_;
  std::vector<std::vector<Adjacent>> adjacency_;
};

/// Waxman random graph over uniformly placed servers; components are joined
/// afterwards by repeatedly adding the globally shortest inter-component pair.
Topology generate_waxman(const WaxmanParams& params, const CapacityConfig& caps);

/// Tolerance used for every capacity comparison on real-valued demands.
inline constexpr double kCapacityTolerance = 1e-9;

/// Minimum-hop path from src to dst using only links whose residual bandwidth
/// covers the demand. Ties: smaller cumulative propagation delay, then the
/// lexicographically smaller link-id sequence. src == dst yields an empty path.
std::optional<std::vector<int>> shortest_feasible_path(const Topology& topo, int src, int dst,
                                                       double bw_demand,
                                                       std::span<const double> residual_bw);

void to_json(nlohmann::json& j, const CapacityConfig& c);
void from_json(const nlohmann::json& j, CapacityConfig& c);
void to_json(nlohmann::json& j, const WaxmanParams& p);
void from_json(const nlohmann::json& j, WaxmanParams& p);

nlohmann::json topology_to_json(const Topology& topo);
Topology topology_from_json(const nlohmann::json& j);

}  // namespace edgemig
