#include "edgemig/network_state.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "edgemig/errors.hpp"

namespace edgemig {

const char* to_string(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::ServerCpu:
      return "server-cpu";
    case ResourceKind::ServerMem:
      return "server-mem";
    case ResourceKind::LinkBw:
      return "link-bw";
  }
  return "?";
}

void Thresholds::validate() const {
  if (!(cpu > 0 && cpu <= 1 && mem > 0 && mem <= 1)) {
    throw ConfigError("utilization thresholds must lie in (0, 1]");
  }
}

NetworkState::NetworkState(const Topology& topo) {
  for (const Server& s : topo.servers()) {
    cpu_cap_.push_back(s.cpu_capacity);
    mem_cap_.push_back(s.mem_capacity);
  }
  for (const Link& l : topo.links()) bw_cap_.push_back(l.bandwidth_gbps);
  used_cpu_.assign(cpu_cap_.size(), 0.0);
  used_mem_.assign(cpu_cap_.size(), 0.0);
  used_bw_.assign(bw_cap_.size(), 0.0);
  hosted_.resize(cpu_cap_.size());
  carried_.resize(bw_cap_.size());
  prev_active_.assign(cpu_cap_.size(), 0);
}

void NetworkState::register_fg(const VnfFg& fg) {
  if (fgs_.contains(fg.id)) {
    throw std::logic_error("forwarding graph " + std::to_string(fg.id) + " already registered");
  }
  FgMapping m;
  const auto p = static_cast<std::size_t>(fg.chain_length());
  m.hosts.assign(p, -1);
  for (const Vnf& v : fg.vnfs) {
    m.cpu.push_back(v.cpu_demand);
    m.mem.push_back(v.mem_demand);
  }
  for (const LogicalLink& l : fg.logical_links) m.bw.push_back(l.bw_demand_gbps);
  m.routes.assign(m.bw.size(), {});
  m.routed.assign(m.bw.size(), 0);
  fgs_.emplace(fg.id, std::move(m));
}

void NetworkState::remove_fg(int fg_id) {
  const FgMapping& m = mapping(fg_id);
  for (std::size_t l = 0; l < m.routed.size(); ++l) {
    if (m.routed[l]) remove_route(fg_id, static_cast<int>(l));
  }
  for (std::size_t v = 0; v < m.hosts.size(); ++v) {
    if (m.hosts[v] >= 0) remove_placement(fg_id, static_cast<int>(v));
  }
  fgs_.erase(fg_id);
}

std::vector<int> NetworkState::fg_ids() const {
  std::vector<int> ids;
  ids.reserve(fgs_.size());
  for (const auto& [id, m] : fgs_) ids.push_back(id);
  return ids;
}

const FgMapping& NetworkState::mapping(int fg_id) const {
  auto it = fgs_.find(fg_id);
  if (it == fgs_.end()) {
    throw std::out_of_range("forwarding graph " + std::to_string(fg_id) + " not registered");
  }
  return it->second;
}

FgMapping& NetworkState::mapping_mut(int fg_id) {
  return const_cast<FgMapping&>(mapping(fg_id));
}

bool NetworkState::fully_mapped(int fg_id) const {
  const FgMapping& m = mapping(fg_id);
  for (int h : m.hosts) {
    if (h < 0) return false;
  }
  for (char r : m.routed) {
    if (!r) return false;
  }
  return true;
}

void NetworkState::apply_placement(int fg_id, int vnf, int server, CapacityCheck check) {
  FgMapping& m = mapping_mut(fg_id);
  if (vnf < 0 || vnf >= static_cast<int>(m.hosts.size())) {
    throw std::out_of_range("vnf index out of range");
  }
  if (server < 0 || server >= server_count()) throw std::out_of_range("server id out of range");
  if (m.hosts[idx(vnf)] >= 0) throw std::logic_error("vnf already placed");
  const double cpu = m.cpu[idx(vnf)];
  const double mem = m.mem[idx(vnf)];
  if (check == CapacityCheck::Enforce) {
    if (used_cpu_[idx(server)] + cpu > cpu_cap_[idx(server)] + kCapacityTolerance) {
      throw InfeasiblePlacement("cpu capacity of server " + std::to_string(server) + " exceeded");
    }
    if (used_mem_[idx(server)] + mem > mem_cap_[idx(server)] + kCapacityTolerance) {
      throw InfeasiblePlacement("mem capacity of server " + std::to_string(server) + " exceeded");
    }
  }
  m.hosts[idx(vnf)] = server;
  hosted_[idx(server)].emplace(fg_id, vnf);
  recompute_server(server);
}

void NetworkState::remove_placement(int fg_id, int vnf) {
  FgMapping& m = mapping_mut(fg_id);
  const int server = m.hosts.at(idx(vnf));
  if (server < 0) throw std::logic_error("vnf is not placed");
  m.hosts[idx(vnf)] = -1;
  hosted_[idx(server)].erase({fg_id, vnf});
  recompute_server(server);
}

void NetworkState::apply_route(int fg_id, int logical_link, std::vector<int> path,
                               CapacityCheck check) {
  FgMapping& m = mapping_mut(fg_id);
  if (logical_link < 0 || logical_link >= static_cast<int>(m.bw.size())) {
    throw std::out_of_range("logical link index out of range");
  }
  if (m.routed[idx(logical_link)]) throw std::logic_error("logical link already routed");
  const double bw = m.bw[idx(logical_link)];
  for (int l : path) {
    if (l < 0 || l >= link_count()) throw std::out_of_range("link id out of range");
    if (check == CapacityCheck::Enforce &&
        used_bw_[idx(l)] + bw > bw_cap_[idx(l)] + kCapacityTolerance) {
      throw InfeasiblePlacement("bandwidth of link " + std::to_string(l) + " exceeded");
    }
  }
  for (int l : path) {
    carried_[idx(l)].emplace(fg_id, logical_link);
    recompute_link(l);
  }
  m.routes[idx(logical_link)] = std::move(path);
  m.routed[idx(logical_link)] = 1;
}

void NetworkState::remove_route(int fg_id, int logical_link) {
  FgMapping& m = mapping_mut(fg_id);
  if (!m.routed.at(idx(logical_link))) throw std::logic_error("logical link is not routed");
  for (int l : m.routes[idx(logical_link)]) {
    carried_[idx(l)].erase({fg_id, logical_link});
    recompute_link(l);
  }
  m.routes[idx(logical_link)].clear();
  m.routed[idx(logical_link)] = 0;
}

std::optional<int> NetworkState::host(int fg_id, int vnf) const {
  const int h = mapping(fg_id).hosts.at(idx(vnf));
  if (h < 0) return std::nullopt;
  return h;
}

std::vector<double> NetworkState::residual_bw() const {
  std::vector<double> out(bw_cap_.size());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = bw_cap_[l] - used_bw_[l];
  return out;
}

void NetworkState::roll_activation() {
  for (std::size_t s = 0; s < hosted_.size(); ++s) prev_active_[s] = hosted_[s].empty() ? 0 : 1;
}

void NetworkState::recompute_server(int s) {
  double cpu = 0.0;
  double mem = 0.0;
  for (const auto& [fg, v] : hosted_[idx(s)]) {
    const FgMapping& m = fgs_.at(fg);
    cpu += m.cpu[idx(v)];
    mem += m.mem[idx(v)];
  }
  used_cpu_[idx(s)] = cpu;
  used_mem_[idx(s)] = mem;
}

void NetworkState::recompute_link(int l) {
  double bw = 0.0;
  for (const auto& [fg, ll] : carried_[idx(l)]) bw += fgs_.at(fg).bw[idx(ll)];
  used_bw_[idx(l)] = bw;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ULL;
    }
  }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { i64(std::bit_cast<std::int64_t>(v)); }
};

}  // namespace

std::uint64_t NetworkState::fingerprint() const {
  Fnv1a f;
  for (const auto& [id, m] : fgs_) {
    f.i64(id);
    for (int h : m.hosts) f.i64(h);
    for (std::size_t l = 0; l < m.routes.size(); ++l) {
      f.i64(m.routed[l]);
      f.i64(static_cast<std::int64_t>(m.routes[l].size()));
      for (int link : m.routes[l]) f.i64(link);
    }
  }
  for (double v : used_cpu_) f.f64(v);
  for (double v : used_mem_) f.f64(v);
  for (double v : used_bw_) f.f64(v);
  for (char a : prev_active_) f.i64(a);
  return f.h;
}

nlohmann::json NetworkState::snapshot() const {
  nlohmann::json fgs = nlohmann::json::array();
  for (const auto& [id, m] : fgs_) {
    nlohmann::json routes = nlohmann::json::array();
    for (std::size_t l = 0; l < m.routes.size(); ++l) {
      routes.push_back(m.routed[l] ? nlohmann::json(m.routes[l]) : nlohmann::json());
    }
    fgs.push_back({{"id", id}, {"hosts", m.hosts}, {"routes", routes}});
  }
  nlohmann::json servers = nlohmann::json::array();
  for (int s = 0; s < server_count(); ++s) {
    servers.push_back({{"id", s},
                       {"used_cpu", used_cpu(s)},
                       {"used_mem", used_mem(s)},
                       {"active", server_active(s)},
                       {"prev_active", previously_active(s)}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (int l = 0; l < link_count(); ++l) {
    links.push_back({{"id", l}, {"used_bw", used_bw(l)}, {"active", link_active(l)}});
  }
  return {{"fgs", fgs}, {"servers", servers}, {"links", links}};
}

std::vector<Violation> check_constraints(const NetworkState& state, const Thresholds& thresholds) {
  std::vector<Violation> out;
  for (int s = 0; s < state.server_count(); ++s) {
    const double cpu_util = state.cpu_utilization(s);
    if (cpu_util > thresholds.cpu) {
      const bool hard = state.used_cpu(s) > state.cpu_capacity(s) + kCapacityTolerance;
      out.push_back({ResourceKind::ServerCpu, s, cpu_util, hard});
    }
    const double mem_util = state.mem_utilization(s);
    if (mem_util > thresholds.mem) {
      const bool hard = state.used_mem(s) > state.mem_capacity(s) + kCapacityTolerance;
      out.push_back({ResourceKind::ServerMem, s, mem_util, hard});
    }
  }
  for (int l = 0; l < state.link_count(); ++l) {
    if (state.used_bw(l) > state.bw_capacity(l) + kCapacityTolerance) {
      out.push_back({ResourceKind::LinkBw, l, state.used_bw(l) / state.bw_capacity(l), true});
    }
  }
  return out;
}

bool placement_fits(const NetworkState& state, int s, double cpu, double mem,
                    const Thresholds& thresholds) {
  const double new_cpu = state.used_cpu(s) + cpu;
  const double new_mem = state.used_mem(s) + mem;
  if (new_cpu > state.cpu_capacity(s) + kCapacityTolerance) return false;
  if (new_mem > state.mem_capacity(s) + kCapacityTolerance) return false;
  return new_cpu / state.cpu_capacity(s) <= thresholds.cpu &&
         new_mem / state.mem_capacity(s) <= thresholds.mem;
}

}  // namespace edgemig
