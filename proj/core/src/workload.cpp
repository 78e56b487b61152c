#include "edgemig/workload.hpp"

#include <cmath>
#include <random>

#include "edgemig/errors.hpp"
#include "edgemig/random.hpp"

namespace edgemig {

void WorkloadConfig::validate() const {
  if (count < 1) throw ConfigError("workload count must be >= 1");
  if (!(rate > 0)) throw ConfigError("arrival rate must be positive");
  if (chain_length < 1) throw ConfigError("chain length must be >= 1");
  if (cpu_min < 0 || cpu_max < cpu_min) throw ConfigError("invalid cpu demand range");
  if (mem_min < 0 || mem_max < mem_min) throw ConfigError("invalid mem demand range");
  if (!(bw_min_gbps >= 0 && bw_max_gbps >= bw_min_gbps)) {
    throw ConfigError("invalid bandwidth demand range");
  }
  if (!(mean_service_time >= 1.0)) throw ConfigError("mean service time must be >= 1 step");
  if (!(packet_rate > 0)) throw ConfigError("packet rate must be positive");
  if (!(deadline_ms > 0)) throw ConfigError("deadline must be positive");
}

std::vector<VnfFg> generate_requests(const WorkloadConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  std::exponential_distribution<double> gap(cfg.rate);
  std::uniform_int_distribution<int> cpu(cfg.cpu_min, cfg.cpu_max);
  std::uniform_int_distribution<int> mem(cfg.mem_min, cfg.mem_max);
  std::uniform_real_distribution<double> bw(cfg.bw_min_gbps, cfg.bw_max_gbps);
  // Support {1, 2, ...} with the configured mean.
  std::geometric_distribution<TimeStep> service(1.0 / cfg.mean_service_time);

  std::vector<VnfFg> out;
  out.reserve(static_cast<std::size_t>(cfg.count));
  double clock = 0.0;
  for (int r = 0; r < cfg.count; ++r) {
    if (r > 0) clock += gap(rng);
    VnfFg fg;
    fg.id = r;
    fg.arrival = static_cast<TimeStep>(std::floor(clock));
    fg.service_time = 1 + service(rng);
    fg.packet_rate = cfg.packet_rate;
    fg.deadline_ms = cfg.deadline_ms;
    for (int v = 0; v < cfg.chain_length; ++v) {
      Vnf vnf;
      vnf.fg_id = r;
      vnf.position = v;
      vnf.cpu_demand = cpu(rng);
      vnf.mem_demand = mem(rng);
      fg.vnfs.push_back(vnf);
    }
    for (int v = 0; v + 1 < cfg.chain_length; ++v) {
      fg.logical_links.push_back({v, v + 1, bw(rng)});
    }
    out.push_back(std::move(fg));
  }
  return out;
}

void to_json(nlohmann::json& j, const WorkloadConfig& c) {
  j = nlohmann::json{{"count", c.count},
                     {"rate", c.rate},
                     {"chain_length", c.chain_length},
                     {"cpu_min", c.cpu_min},
                     {"cpu_max", c.cpu_max},
                     {"mem_min", c.mem_min},
                     {"mem_max", c.mem_max},
                     {"bw_min_gbps", c.bw_min_gbps},
                     {"bw_max_gbps", c.bw_max_gbps},
                     {"mean_service_time", c.mean_service_time},
                     {"packet_rate", c.packet_rate},
                     {"deadline_ms", c.deadline_ms}};
}

void from_json(const nlohmann::json& j, WorkloadConfig& c) {
  WorkloadConfig d;
  c.count = j.value("count", d.count);
  c.rate = j.value("rate", d.rate);
  c.chain_length = j.value("chain_length", d.chain_length);
  c.cpu_min = j.value("cpu_min", d.cpu_min);
  c.cpu_max = j.value("cpu_max", d.cpu_max);
  c.mem_min = j.value("mem_min", d.mem_min);
  c.mem_max = j.value("mem_max", d.mem_max);
  c.bw_min_gbps = j.value("bw_min_gbps", d.bw_min_gbps);
  c.bw_max_gbps = j.value("bw_max_gbps", d.bw_max_gbps);
  c.mean_service_time = j.value("mean_service_time", d.mean_service_time);
  c.packet_rate = j.value("packet_rate", d.packet_rate);
  c.deadline_ms = j.value("deadline_ms", d.deadline_ms);
}

void to_json(nlohmann::json& j, const VnfFg& fg) {
  nlohmann::json vnfs = nlohmann::json::array();
  for (const Vnf& v : fg.vnfs) vnfs.push_back({{"cpu", v.cpu_demand}, {"mem", v.mem_demand}});
  nlohmann::json links = nlohmann::json::array();
  for (const LogicalLink& l : fg.logical_links) {
    links.push_back({{"from", l.from}, {"to", l.to}, {"bw_gbps", l.bw_demand_gbps}});
  }
  j = nlohmann::json{{"id", fg.id},
                     {"arrival", fg.arrival},
                     {"service_time", fg.service_time},
                     {"packet_rate", fg.packet_rate},
                     {"deadline_ms", fg.deadline_ms},
                     {"vnfs", vnfs},
                     {"logical_links", links}};
}

void from_json(const nlohmann::json& j, VnfFg& fg) {
  fg = VnfFg{};
  fg.id = j.at("id").get<int>();
  fg.arrival = j.at("arrival").get<TimeStep>();
  fg.service_time = j.at("service_time").get<TimeStep>();
  fg.packet_rate = j.value("packet_rate", 100.0);
  fg.deadline_ms = j.value("deadline_ms", 20.0);
  int pos = 0;
  for (const auto& jv : j.at("vnfs")) {
    fg.vnfs.push_back({fg.id, pos++, jv.at("cpu").get<double>(), jv.at("mem").get<double>()});
  }
  for (const auto& jl : j.at("logical_links")) {
    LogicalLink l{jl.at("from").get<int>(), jl.at("to").get<int>(), jl.at("bw_gbps").get<double>()};
    if (l.to != l.from + 1 || l.from < 0 || l.to >= fg.chain_length()) {
      throw ConfigError("logical links must join consecutive VNFs");
    }
    fg.logical_links.push_back(l);
  }
  if (static_cast<int>(fg.logical_links.size()) != std::max(0, fg.chain_length() - 1)) {
    throw ConfigError("forwarding graph needs chain_length - 1 logical links");
  }
}

}  // namespace edgemig
