#include <doctest.h>

#include <map>
#include <memory>
#include <sstream>

#include "edgemig/baselines.hpp"
#include "edgemig/errors.hpp"
#include "edgemig/event_log.hpp"
#include "edgemig/orchestrator.hpp"
#include "scenarios.hpp"

using namespace edgemig;

namespace {

std::shared_ptr<const Topology> toy3() {
  // edge 0 - core 1 - core 2
  return std::make_shared<const Topology>(Topology(
      1, {{0, Tier::Edge, 40, 16}, {1, Tier::Core, 200, 64}, {2, Tier::Core, 200, 64}},
      {{0, 0, 1, 3.5, 0.5}, {1, 1, 2, 3.5, 0.5}}));
}

VnfFg timed(VnfFg fg, TimeStep arrival, TimeStep service) {
  fg.arrival = arrival;
  fg.service_time = service;
  return fg;
}

class Scripted final : public MigrationPolicy {
 public:
  explicit Scripted(std::map<std::pair<TimeStep, int>, MigrationCommand> plan)
      : plan_(std::move(plan)) {}
  MigrationCommand decide(const World&, int fg_id, TimeStep t) override {
    auto it = plan_.find({t, fg_id});
    return it == plan_.end() ? MigrationCommand::noop() : it->second;
  }

 private:
  std::map<std::pair<TimeStep, int>, MigrationCommand> plan_;
};

}  // namespace

TEST_SUITE("orchestrator") {
  TEST_CASE("first fit prefers the edge tier") {
    World w(toy3(), {timed(scenario::make_fg(0, {{2, 1}, {2, 1}, {2, 1}, {2, 1}}), 0, 5)}, {});
    CHECK(w.deploy_fg(0));
    for (int h : w.state().mapping(0).hosts) CHECK(w.topology().server(h).tier == Tier::Edge);
    CHECK(w.state().fully_mapped(0));
  }

  TEST_CASE("oversized request is rejected and leaves no trace") {
    World w(toy3(), {timed(scenario::make_fg(0, {{500, 1}}), 0, 5)}, {});
    const auto fp = w.state().fingerprint();
    CHECK_FALSE(w.deploy_fg(0));
    CHECK(w.state().fingerprint() == fp);
    CHECK(w.fg(0).service_time == 0);
    CHECK_FALSE(w.state().has_fg(0));
  }

  TEST_CASE("accepted deployments are feasible") {
    // One-way soundness against an independent check of every accepted graph.
    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<VnfFg> reqs;
      for (int f = 0; f < 4; ++f) {
        std::vector<std::pair<double, double>> d;
        for (int v = 0; v < 3; ++v) {
          d.emplace_back(1.0 + static_cast<double>(rng() % 40), 1.0 + static_cast<double>(rng() % 10));
        }
        reqs.push_back(timed(scenario::make_fg(f, d, {0.5, 0.5}), 0, 5));
      }
      World w(toy3(), reqs, {});
      for (int f = 0; f < 4; ++f) {
        if (!w.deploy_fg(f)) continue;
        const FgMapping& m = w.state().mapping(f);
        for (int h : m.hosts) {
          CHECK(w.state().cpu_utilization(h) <= 0.8 + 1e-12);
          CHECK(w.state().mem_utilization(h) <= 0.8 + 1e-12);
        }
        for (std::size_t l = 0; l < m.routes.size(); ++l) {
          REQUIRE(m.routed[l]);
          int at = m.hosts[l];
          for (int link : m.routes[l]) at = w.topology().link(link).other(at);
          CHECK(at == m.hosts[l + 1]);
        }
        CHECK(w.meets_deadline(f));
      }
      CHECK(check_constraints(w.state(), {}).empty());
    }
  }

  TEST_CASE("no-op is applied with zero deltas") {
    World w(toy3(), {timed(scenario::make_fg(0, {{2, 1}}), 0, 5)}, {});
    w.deploy_fg(0);
    const auto fp = w.state().fingerprint();
    const MigrationOutcome o = w.execute_migration(MigrationCommand::noop(), 0);
    CHECK(o.applied);
    CHECK_FALSE(o.moved);
    CHECK(o.lambda == 0.0);
    CHECK(o.deltas.delay_reduction_ms == 0.0);
    CHECK(w.state().fingerprint() == fp);
  }

  TEST_CASE("move to the current host changes nothing") {
    World w(toy3(), {timed(scenario::make_fg(0, {{2, 1}}), 0, 5)}, {});
    w.deploy_fg(0);
    const int host = w.state().mapping(0).hosts[0];
    const MigrationOutcome o = w.execute_migration(MigrationCommand::move(0, 0, host), 0);
    CHECK(o.applied);
    CHECK_FALSE(o.moved);
    CHECK(o.deltas.delay_reduction_ms == 0.0);
    CHECK(o.deltas.energy_reduction == 0.0);
    CHECK(o.lambda == 0.0);
  }

  TEST_CASE("overloading the destination reverts") {
    // Destination edge server at 79% CPU, then a 20-unit VNF.
    World w(toy3(),
            {timed(scenario::make_fg(0, {{31.6, 1}}), 0, 5),
             timed(scenario::make_fg(1, {{20, 1}}), 0, 5)},
            {});
    REQUIRE(w.deploy_fg(0));
    REQUIRE(w.state().mapping(0).hosts[0] == 0);
    REQUIRE(w.deploy_fg(1));
    REQUIRE(w.state().mapping(1).hosts[0] != 0);
    CHECK(w.state().cpu_utilization(0) == doctest::Approx(0.79));
    const bool exceeds = (31.6 + 20.0) / 40.0 > 1.0;
    REQUIRE(exceeds);
    const auto fp = w.state().fingerprint();
    const MigrationOutcome o = w.execute_migration(MigrationCommand::move(1, 0, 0), 0);
    CHECK_FALSE(o.applied);
    CHECK(o.reason == RevertReason::Capacity);
    CHECK(w.state().fingerprint() == fp);
  }

  TEST_CASE("crossing the threshold but not capacity reverts") {
    World w(toy3(),
            {timed(scenario::make_fg(0, {{28, 1}}), 0, 5),
             timed(scenario::make_fg(1, {{8, 1}}), 0, 5)},
            {});
    REQUIRE(w.deploy_fg(0));
    REQUIRE(w.deploy_fg(1));
    REQUIRE(w.state().mapping(1).hosts[0] != 0);
    const MigrationOutcome o = w.execute_migration(MigrationCommand::move(1, 0, 0), 0);
    CHECK_FALSE(o.applied);
    CHECK(o.reason == RevertReason::Threshold);
  }

  TEST_CASE("offloading a busy edge server cuts delay") {
    // Loaded edge server, idle core neighbour: the processing gain outweighs
    // the extra link.
    World w(toy3(),
            {timed(scenario::make_fg(0, {{30, 1}, {1, 1}}, {0.1}), 0, 5)}, {});
    REQUIRE(w.deploy_fg(0));
    REQUIRE(w.state().mapping(0).hosts == std::vector<int>{0, 0});
    const double before = e2e_delay_ms(w.state(), w.topology(), 0, w.config().perf);
    const MigrationOutcome o = w.execute_migration(MigrationCommand::move(0, 0, 1), 0);
    REQUIRE(o.applied);
    CHECK(o.moved);
    const double after = e2e_delay_ms(w.state(), w.topology(), 0, w.config().perf);
    CHECK(after < before);
    CHECK(o.deltas.delay_reduction_ms == doctest::Approx(before - after));
    CHECK(o.lambda > 0.0);
  }

  TEST_CASE("malformed commands throw") {
    World w(toy3(), {timed(scenario::make_fg(0, {{2, 1}}), 0, 5)}, {});
    w.deploy_fg(0);
    CHECK_THROWS_AS(w.execute_migration(MigrationCommand::move(0, 3, 1), 0), CommandError);
    CHECK_THROWS_AS(w.execute_migration(MigrationCommand::move(0, 0, 9), 0), CommandError);
    CHECK_THROWS_AS(w.execute_migration(MigrationCommand::move(7, 0, 1), 0), CommandError);
  }

  TEST_CASE("step with nothing active") {
    World w(toy3(), {}, {});
    NoopPolicy noop;
    const auto fp = w.state().fingerprint();
    const StepReport r = w.step(0, noop);
    CHECK(r.migrations == 0);
    CHECK(r.energy == 0.0);
    CHECK(r.fg_delays.empty());
    CHECK(w.state().fingerprint() == fp);
    CHECK(w.finished(0));
  }

  TEST_CASE("graph leaves exactly at its departure step") {
    World w(toy3(), {timed(scenario::make_fg(0, {{2, 1}}), 2, 3)}, {});
    NoopPolicy noop;
    for (TimeStep t = 0; t < 5; ++t) {
      w.step(t, noop);
      CHECK(w.state().has_fg(0) == (t >= 2 && t < 5));
    }
    w.step(5, noop);
    CHECK_FALSE(w.state().has_fg(0));
  }

  TEST_CASE("replaying a no-op scenario twice gives identical reports") {
    auto run = [] {
      World w(toy3(), {timed(scenario::make_fg(0, {{12, 2}, {3, 1}}, {0.3}), 0, 4)}, {});
      NoopPolicy noop;
      std::vector<double> out;
      for (TimeStep t = 0; t < 6; ++t) {
        const StepReport r = w.step(t, noop);
        out.push_back(r.energy);
        out.push_back(r.delay_sum);
      }
      return out;
    };
    CHECK(run() == run());
  }

  TEST_CASE("mini-episode metrics match the event log") {
    auto topo = std::make_shared<const Topology>(generate_waxman({2, 3, 0.6, 0.3, 4}, {}));
    WorkloadConfig wl;
    wl.count = 12;
    wl.rate = 1.5;
    wl.mean_service_time = 4;
    std::ostringstream sink;
    EventLog log(&sink);
    World w(topo, generate_requests(wl, 8), {}, &log);
    RandomPolicy policy(0.7, 3);
    std::vector<StepReport> reports;
    for (TimeStep t = 0; t < 10; ++t) reports.push_back(w.step(t, policy));

    std::istringstream in(sink.str());
    std::string line;
    int migrations = 0;
    int reverts = 0;
    std::vector<double> energy;
    std::vector<double> delays;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      const std::string type = j.at("type");
      if (type == "migrate") {
        if (j.at("moved").get<bool>()) ++migrations;
        if (!j.at("applied").get<bool>()) ++reverts;
      } else if (type == "step") {
        double e = 0.0;
        for (double x : j.at("server_energy")) e += x;
        energy.push_back(e);
        double d = 0.0;
        for (const auto& pair : j.at("fg_delays")) d += pair.at(1).get<double>();
        delays.push_back(d);
      }
    }
    int want_m = 0;
    int want_r = 0;
    REQUIRE(energy.size() == reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
      want_m += reports[i].migrations;
      want_r += reports[i].reverts;
      CHECK(std::abs(energy[i] - reports[i].energy) < 1e-9);
      CHECK(std::abs(delays[i] - reports[i].delay_sum) < 1e-9);
    }
    CHECK(migrations == want_m);
    CHECK(reverts == want_r);
  }

  TEST_CASE("scripted migration is logged and applied") {
    auto topo = toy3();
    Scripted plan({{std::pair<TimeStep, int>{1, 0}, MigrationCommand::move(0, 0, 2)}});
    World w(topo, {timed(scenario::make_fg(0, {{2, 1}}), 0, 5)}, {});
    w.step(0, plan);
    CHECK(w.state().mapping(0).hosts[0] == 0);
    const StepReport r = w.step(1, plan);
    CHECK(r.migrations == 1);
    CHECK(w.state().mapping(0).hosts[0] == 2);
  }

  TEST_CASE("lifecycle fuzz conserves capacity") {
    const auto r = scenario::conservation_fuzz(1500, 3);
    CHECK(r.usage_errors == 0);
    CHECK(r.capacity_errors == 0);
    CHECK(r.revert_errors == 0);
    CHECK(r.released_errors == 0);
    CHECK(r.reverts > 0);
  }
}

TEST_SUITE("baselines") {
  TEST_CASE("threshold policy idles below threshold") {
    World w(toy3(), {timed(scenario::make_fg(0, {{2, 1}}), 0, 5)}, {});
    w.deploy_fg(0);
    CHECK(threshold_policy(w.state(), w.topology(), w.fg(0), {}).is_noop());
  }

  TEST_CASE("threshold policy picks the least loaded feasible server") {
    const Topology topo(2,
                        {{0, Tier::Edge, 40, 16}, {1, Tier::Edge, 40, 16}, {2, Tier::Core, 200, 64},
                         {3, Tier::Core, 200, 64}},
                        {{0, 0, 1, 3.5, 0.1}, {1, 1, 2, 3.5, 0.1}, {2, 2, 3, 3.5, 0.1}});
    NetworkState st(topo);
    const VnfFg fg = scenario::make_fg(0, {{30, 1}, {4, 1}});
    st.register_fg(fg);
    st.apply_placement(0, 0, 0);
    st.apply_placement(0, 1, 0);  // 34 / 40 = 85%
    st.register_fg(scenario::make_fg(1, {{20, 1}}));
    st.apply_placement(1, 0, 2);
    st.register_fg(scenario::make_fg(2, {{10, 1}}));
    st.apply_placement(2, 0, 3);
    st.register_fg(scenario::make_fg(3, {{20, 1}}));
    st.apply_placement(3, 0, 1);
    const MigrationCommand cmd = threshold_policy(st, topo, fg, {});
    REQUIRE_FALSE(cmd.is_noop());
    CHECK(cmd.vnf == 0);  // largest CPU demand on the hot server
    int best = -1;
    for (int s = 0; s < 4; ++s) {
      if (s == 0 || !placement_fits(st, s, 30, 1, {})) continue;
      if (best < 0 || st.cpu_utilization(s) < st.cpu_utilization(best)) best = s;
    }
    CHECK(cmd.server == best);
    CHECK(cmd.server == 3);
  }

  TEST_CASE("threshold policy without a feasible target") {
    const Topology topo(2, {{0, Tier::Edge, 40, 16}, {1, Tier::Edge, 40, 16}},
                        {{0, 0, 1, 3.5, 0.1}});
    NetworkState st(topo);
    const VnfFg fg = scenario::make_fg(0, {{34, 1}});
    st.register_fg(fg);
    st.apply_placement(0, 0, 0);
    st.register_fg(scenario::make_fg(1, {{20, 1}}));
    st.apply_placement(1, 0, 1);
    CHECK(threshold_policy(st, topo, fg, {}).is_noop());
  }

  TEST_CASE("random policy extremes") {
    World w(toy3(), {timed(scenario::make_fg(0, {{2, 1}}), 0, 5)}, {});
    w.deploy_fg(0);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      CHECK(random_policy(w.state(), w.topology(), w.fg(0), 0.0, rng).is_noop());
    }
    const Topology single(1, {{0, Tier::Edge, 40, 16}}, {});
    NetworkState st(single);
    const VnfFg fg = scenario::make_fg(0, {{1, 1}});
    for (int i = 0; i < 100; ++i) CHECK(random_policy(st, single, fg, 1.0, rng).server == 0);
    CHECK_THROWS_AS(random_policy(st, single, fg, 1.5, rng), ConfigError);
  }

  TEST_CASE("random destinations are uniform") {
    World w(toy3(), {timed(scenario::make_fg(0, {{2, 1}}), 0, 5)}, {});
    w.deploy_fg(0);
    Rng rng(77);
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 10000; ++i) {
      ++counts[static_cast<std::size_t>(random_policy(w.state(), w.topology(), w.fg(0), 1.0, rng).server)];
    }
    CHECK(oracle::chi_square_uniform(counts) < oracle::chi_square_critical(2));
  }
}
