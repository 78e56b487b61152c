#include "edgemig/orchestrator.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "edgemig/errors.hpp"

namespace edgemig {

const char* to_string(RevertReason reason) {
  switch (reason) {
    case RevertReason::None:
      return "";
    case RevertReason::Capacity:
      return "capacity";
    case RevertReason::Threshold:
      return "threshold";
    case RevertReason::Bandwidth:
      return "bandwidth";
    case RevertReason::Deadline:
      return "deadline";
    case RevertReason::Invalid:
      return "invalid";
  }
  return "?";
}

World::World(std::shared_ptr<const Topology> topo, std::vector<VnfFg> requests,
             OrchestratorConfig cfg, EventLog* log)
    : topo_(std::move(topo)),
      fgs_(std::move(requests)),
      cfg_(cfg),
      log_(log),
      state_(*topo_) {
  cfg_.validate();
  for (std::size_t i = 0; i < fgs_.size(); ++i) {
    if (fgs_[i].id != static_cast<int>(i)) throw ConfigError("request ids must equal their index");
    if (i > 0 && fgs_[i].arrival < fgs_[i - 1].arrival) {
      throw ConfigError("requests must be sorted by arrival");
    }
  }
}

TimeStep World::last_arrival() const { return fgs_.empty() ? 0 : fgs_.back().arrival; }

bool World::finished(TimeStep t) const {
  return next_arrival_ >= fgs_.size() && t >= last_arrival() && state_.fg_ids().empty();
}

int World::expire_timeouts(TimeStep t) {
  int expired = 0;
  for (int id : state_.fg_ids()) {
    if (service_status(fg(id), t)) continue;
    state_.remove_fg(id);
    ++expired;
    if (log_ && log_->enabled()) log_->write({{"type", "expire"}, {"t", t}, {"fg", id}});
  }
  return expired;
}

std::vector<int> World::graphs_on(std::initializer_list<int> servers, int include_fg) const {
  std::set<int> ids;
  if (include_fg >= 0) ids.insert(include_fg);
  for (int s : servers) {
    for (const auto& [fg_id, vnf] : state_.hosted(s)) ids.insert(fg_id);
  }
  return {ids.begin(), ids.end()};
}

bool World::meets_deadline(int fg_id) const {
  try {
    return e2e_delay_ms(state_, *topo_, fg_id, cfg_.perf) <= fg(fg_id).deadline_ms;
  } catch (const SaturationError&) {
    return false;
  }
}

bool World::all_meet_deadline(std::span<const int> fg_ids) const {
  return std::all_of(fg_ids.begin(), fg_ids.end(), [&](int id) { return meets_deadline(id); });
}

double World::delay_sum(std::span<const int> fg_ids) const {
  double sum = 0.0;
  for (int id : fg_ids) sum += e2e_delay_ms(state_, *topo_, id, cfg_.perf);
  return sum;
}

double World::local_energy(int src, int dst) const {
  double e = server_energy(state_, src, cfg_.perf);
  if (dst != src) e += server_energy(state_, dst, cfg_.perf);
  return e;
}

bool World::deploy_fg(int fg_id) {
  VnfFg& request = fgs_.at(static_cast<std::size_t>(fg_id));
  if (state_.has_fg(fg_id)) throw std::logic_error("forwarding graph already deployed");
  state_.register_fg(request);
  const FgMapping& m = state_.mapping(fg_id);

  const int n = topo_->server_count();
  const int n_edge = topo_->edge_count();
  std::vector<int> order(static_cast<std::size_t>(n));

  bool ok = true;
  for (int v = 0; v < request.chain_length() && ok; ++v) {
    for (int s = 0; s < n; ++s) order[static_cast<std::size_t>(s)] = s;
    // Edge tier first, then core; least CPU-utilized first within a tier.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const bool ea = a < n_edge;
      const bool eb = b < n_edge;
      if (ea != eb) return ea;
      return state_.cpu_utilization(a) < state_.cpu_utilization(b);
    });
    bool placed = false;
    for (int s : order) {
      if (!placement_fits(state_, s, m.cpu[static_cast<std::size_t>(v)],
                          m.mem[static_cast<std::size_t>(v)], cfg_.thresholds)) {
        continue;
      }
      std::optional<std::vector<int>> path;
      if (v > 0) {
        const int prev = m.hosts[static_cast<std::size_t>(v - 1)];
        path = shortest_feasible_path(*topo_, prev, s, m.bw[static_cast<std::size_t>(v - 1)],
                                      state_.residual_bw());
        if (!path) continue;
      }
      state_.apply_placement(fg_id, v, s);
      if (path) state_.apply_route(fg_id, v - 1, std::move(*path));
      placed = true;
      break;
    }
    ok = placed;
  }

  if (ok) {
    std::set<int> servers(m.hosts.begin(), m.hosts.end());
    std::set<int> affected{fg_id};
    for (int s : servers) {
      for (const auto& [other, vnf] : state_.hosted(s)) affected.insert(other);
    }
    std::vector<int> ids(affected.begin(), affected.end());
    ok = all_meet_deadline(ids);
  }

  if (!ok) {
    state_.remove_fg(fg_id);
    request.service_time = 0;
  }
  if (log_ && log_->enabled()) {
    nlohmann::json rec{{"type", "deploy"},
                       {"t", request.arrival},
                       {"fg", fg_id},
                       {"accepted", ok},
                       {"deadline_ms", request.deadline_ms}};
    if (ok) rec["hosts"] = state_.mapping(fg_id).hosts;
    log_->write(std::move(rec));
  }
  return ok;
}

MigrationOutcome World::execute_migration(const MigrationCommand& cmd, TimeStep t) {
  MigrationOutcome out;
  if (cmd.is_noop()) return out;
  if (!state_.has_fg(cmd.fg_id)) {
    throw CommandError("migration targets inactive forwarding graph " + std::to_string(cmd.fg_id));
  }
  const FgMapping& m = state_.mapping(cmd.fg_id);
  const int p = static_cast<int>(m.hosts.size());
  if (cmd.vnf < 0 || cmd.vnf >= p) throw CommandError("vnf index out of range");
  if (cmd.server < 0 || cmd.server >= topo_->server_count()) {
    throw CommandError("destination server out of range");
  }
  const int src = m.hosts[static_cast<std::size_t>(cmd.vnf)];
  const int dst = cmd.server;
  if (src < 0) throw CommandError("vnf is not placed");

  const std::vector<int> affected = graphs_on({src, dst}, cmd.fg_id);
  out.before = {delay_sum(affected), local_energy(src, dst)};

  if (src != dst) {
    // Logical links touching the VNF: (v-1 -> v) and (v -> v+1).
    std::vector<int> touched;
    if (cmd.vnf > 0) touched.push_back(cmd.vnf - 1);
    if (cmd.vnf + 1 < p) touched.push_back(cmd.vnf);
    std::vector<std::vector<int>> old_routes;
    for (int l : touched) old_routes.push_back(m.routes[static_cast<std::size_t>(l)]);

    for (int l : touched) state_.remove_route(cmd.fg_id, l);
    state_.remove_placement(cmd.fg_id, cmd.vnf);

    std::vector<int> new_routes;
    bool placed = false;
    auto revert = [&](RevertReason reason) {
      for (int l : new_routes) state_.remove_route(cmd.fg_id, l);
      if (placed) state_.remove_placement(cmd.fg_id, cmd.vnf);
      state_.apply_placement(cmd.fg_id, cmd.vnf, src, CapacityCheck::Skip);
      for (std::size_t i = 0; i < touched.size(); ++i) {
        state_.apply_route(cmd.fg_id, touched[i], old_routes[i], CapacityCheck::Skip);
      }
      out.applied = false;
      out.reason = reason;
      out.after = out.before;
    };

    const double cpu = m.cpu[static_cast<std::size_t>(cmd.vnf)];
    const double mem = m.mem[static_cast<std::size_t>(cmd.vnf)];
    if (state_.used_cpu(dst) + cpu > state_.cpu_capacity(dst) + kCapacityTolerance ||
        state_.used_mem(dst) + mem > state_.mem_capacity(dst) + kCapacityTolerance) {
      revert(RevertReason::Capacity);
    } else if (!placement_fits(state_, dst, cpu, mem, cfg_.thresholds)) {
      revert(RevertReason::Threshold);
    } else {
      state_.apply_placement(cmd.fg_id, cmd.vnf, dst);
      placed = true;
      bool routed = true;
      for (int l : touched) {
        const int a = m.hosts[static_cast<std::size_t>(l)];
        const int b = m.hosts[static_cast<std::size_t>(l + 1)];
        auto path = shortest_feasible_path(*topo_, a, b, m.bw[static_cast<std::size_t>(l)],
                                           state_.residual_bw());
        if (!path) {
          routed = false;
          break;
        }
        state_.apply_route(cmd.fg_id, l, std::move(*path));
        new_routes.push_back(l);
      }
      if (!routed) {
        revert(RevertReason::Bandwidth);
      } else if (!all_meet_deadline(affected)) {
        revert(RevertReason::Deadline);
      } else {
        out.moved = true;
        out.after = {delay_sum(affected), local_energy(src, dst)};
      }
    }
  } else {
    out.after = out.before;
  }

  if (out.applied) {
    out.deltas = migration_deltas(out.before, out.after);
    out.lambda = lambda_composite(out.deltas, out.before, cfg_.perf);
  }

  if (log_ && log_->enabled()) {
    log_->write({{"type", "migrate"},
                 {"t", t},
                 {"fg", cmd.fg_id},
                 {"vnf", cmd.vnf},
                 {"from", src},
                 {"to", dst},
                 {"applied", out.applied},
                 {"moved", out.moved},
                 {"reason", to_string(out.reason)},
                 {"delay_before", out.before.delay_ms},
                 {"delay_after", out.after.delay_ms},
                 {"energy_before", out.before.energy},
                 {"energy_after", out.after.energy},
                 {"lambda", out.lambda}});
  }
  return out;
}

StepReport World::step(TimeStep t, MigrationPolicy& policy) {
  StepReport report;
  report.t = t;
  report.expired = expire_timeouts(t);

  while (next_arrival_ < fgs_.size() && fgs_[next_arrival_].arrival <= t) {
    const int id = fgs_[next_arrival_].id;
    ++next_arrival_;
    ++report.arrivals;
    if (deploy_fg(id)) {
      ++report.accepted;
    } else {
      ++report.rejected;
    }
  }

  for (int id : state_.fg_ids()) {
    const MigrationCommand cmd = policy.decide(*this, id, t);
    MigrationOutcome outcome;
    try {
      outcome = execute_migration(cmd, t);
    } catch (const CommandError&) {
      outcome.applied = false;
      outcome.reason = RevertReason::Invalid;
      if (log_ && log_->enabled()) {
        log_->write({{"type", "migrate"},
                     {"t", t},
                     {"fg", id},
                     {"vnf", cmd.vnf},
                     {"to", cmd.server},
                     {"applied", false},
                     {"moved", false},
                     {"reason", to_string(outcome.reason)},
                     {"lambda", 0.0}});
      }
    }
    if (cmd.is_noop()) {
      ++report.noops;
    } else if (!outcome.applied) {
      ++report.reverts;
    } else if (outcome.moved) {
      ++report.migrations;
    }
    policy.observe(*this, id, cmd, outcome, t);
    report.outcomes.push_back(outcome);
  }

  EnergyReport energy = network_energy(state_, cfg_.perf);
  report.energy = energy.total;
  report.server_energy = std::move(energy.per_server);
  for (int id : state_.fg_ids()) {
    const double d = e2e_delay_ms(state_, *topo_, id, cfg_.perf);
    report.fg_delays.emplace_back(id, d);
    report.delay_sum += d;
  }

  if (log_ && log_->enabled()) {
    nlohmann::json delays = nlohmann::json::array();
    for (const auto& [id, d] : report.fg_delays) delays.push_back({id, d});
    log_->write({{"type", "step"},
                 {"t", t},
                 {"energy", report.energy},
                 {"server_energy", report.server_energy},
                 {"delay_sum", report.delay_sum},
                 {"active_fgs", report.fg_delays.size()},
                 {"fg_delays", delays},
                 {"noops", report.noops}});
  }

  state_.roll_activation();
  policy.end_step(*this, t);
  return report;
}

}  // namespace edgemig
