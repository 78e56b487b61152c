#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

namespace edgemig {

using TimeStep = std::int64_t;

struct Vnf {
  int fg_id = 0;
  int position = 0;
  double cpu_demand = 0.0;
  double mem_demand = 0.0;
};

/// Directed chain edge between VNF `from` and VNF `from + 1`.
struct LogicalLink {
  int from = 0;
  int to = 1;
  double bw_demand_gbps = 0.0;
};

/// One service request: an ordered VNF chain. service_time == 0 marks a
/// request rejected at deployment.
struct VnfFg {
  int id = 0;
  std::vector<Vnf> vnfs;
  std::vector<LogicalLink> logical_links;
  TimeStep arrival = 0;
  TimeStep service_time = 0;
  double packet_rate = 100.0;
  double deadline_ms = 20.0;

  int chain_length() const { return static_cast<int>(vnfs.size()); }
  TimeStep departure() const { return arrival + service_time; }
};

struct WorkloadConfig {
  int count = 300;
  double rate = 0.2;  // arrivals per step
  int chain_length = 4;
  int cpu_min = 1;
  int cpu_max = 20;
  int mem_min = 1;
  int mem_max = 4;
  double bw_min_gbps = 0.1;
  double bw_max_gbps = 0.5;
  double mean_service_time = 100.0;
  double packet_rate = 100.0;
  double deadline_ms = 20.0;

  void validate() const;
};

/// Poisson arrivals: exponential gaps accumulated in continuous time, each
/// arrival floored to its step. Demands are drawn once and held for life.
std::vector<VnfFg> generate_requests(const WorkloadConfig& cfg, std::uint64_t seed);

/// 1 iff arrival <= t < arrival + service_time.
inline bool service_status(const VnfFg& fg, TimeStep t) {
  return fg.service_time > 0 && fg.arrival <= t && t < fg.arrival + fg.service_time;
}

void to_json(nlohmann::json& j, const WorkloadConfig& c);
void from_json(const nlohmann::json& j, WorkloadConfig& c);
void to_json(nlohmann::json& j, const VnfFg& fg);
void from_json(const nlohmann::json& j, VnfFg& fg);

}  // namespace edgemig
