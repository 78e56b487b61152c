#include <doctest.h>

#include <cmath>
#include <limits>

#include "edgemig/errors.hpp"
#include "edgemig/perf.hpp"
#include "scenarios.hpp"

using namespace edgemig;

TEST_SUITE("perf") {
  TEST_CASE("link delay arithmetic") {
    const PerfConfig cfg;
    const Link l{0, 0, 1, 3.5, 0.5};
    const double trans = 12000.0 / 3.5e9 * 1000.0;
    CHECK(transmission_delay_ms(l, cfg) == doctest::Approx(trans).epsilon(1e-12));
    CHECK(link_delay_ms(l, cfg) == doctest::Approx(0.5 + trans).epsilon(1e-12));
    CHECK(link_delay_ms(l, cfg) == doctest::Approx(0.503428).epsilon(1e-5));
    const Link zero{0, 0, 1, 3.5, 0.0};
    CHECK(link_delay_ms(zero, cfg) == transmission_delay_ms(zero, cfg));
    const Link fast{0, 0, 1, 7.0, 0.5};
    CHECK(transmission_delay_ms(fast, cfg) ==
          doctest::Approx(transmission_delay_ms(l, cfg) / 2).epsilon(1e-12));
  }

  TEST_CASE("processing delay") {
    CHECK(proc_delay_ms(0.5, 1.0) == 1.0);
    CHECK(proc_delay_ms(0.5, 2.5) == 2.5);
    CHECK(proc_delay_ms(0.0, 1.0) == 0.0);
    CHECK(std::abs(proc_delay_ms(0.8, 1.0) - 4.0) < 1e-12);
    CHECK_THROWS_AS(proc_delay_ms(1.0, 1.0), SaturationError);
  }

  TEST_CASE("co-located chain has no link terms") {
    const Topology topo(1, {{0, Tier::Edge, 40, 16}, {1, Tier::Core, 200, 64}},
                        {{0, 0, 1, 3.5, 0.5}});
    NetworkState st(topo);
    st.register_fg(scenario::make_fg(0, {{2, 1}, {2, 1}, {2, 1}, {2, 1}}));
    for (int v = 0; v < 4; ++v) st.apply_placement(0, v, 1);
    for (int l = 0; l < 3; ++l) st.apply_route(0, l, {});
    const PerfConfig cfg;
    const DelayBreakdown d = e2e_delay(st, topo, 0, cfg);
    CHECK(d.links.empty());
    CHECK(d.servers.size() == 4);
    CHECK(d.total_ms == doctest::Approx(4 * proc_delay_ms(8.0 / 200.0, cfg.tau_ms)));
  }

  TEST_CASE("unplaced graph has no delay") {
    const Topology topo(1, {{0, Tier::Edge, 40, 16}, {1, Tier::Core, 200, 64}},
                        {{0, 0, 1, 3.5, 0.5}});
    NetworkState st(topo);
    st.register_fg(scenario::make_fg(0, {{2, 1}, {2, 1}}));
    st.apply_placement(0, 0, 0);
    CHECK_THROWS_AS(e2e_delay(st, topo, 0, {}), IncompleteMapping);
  }

  TEST_CASE("delay equals exhaustive re-evaluation over placements") {
    // Three servers in a line, a two-VNF chain, every placement pair.
    const Topology topo(1,
                        {{0, Tier::Edge, 40, 16}, {1, Tier::Core, 200, 64},
                         {2, Tier::Core, 200, 64}},
                        {{0, 0, 1, 3.5, 0.3}, {1, 1, 2, 1.0, 0.7}});
    const PerfConfig cfg;
    const std::vector<std::vector<int>> path_between[3] = {
        {{}, {0}, {0, 1}}, {{0}, {}, {1}}, {{0, 1}, {1}, {}}};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        NetworkState st(topo);
        st.register_fg(scenario::make_fg(0, {{10, 1}, {6, 1}}, {0.2}));
        st.apply_placement(0, 0, a);
        st.apply_placement(0, 1, b);
        const auto& path = path_between[a][b];
        st.apply_route(0, 0, path);
        double want = 0.0;
        for (int l : path) {
          const Link& link = topo.link(l);
          want += 1500.0 * 8.0 / (link.bandwidth_gbps * 1e9) * 1000.0 + link.prop_delay_ms;
        }
        const double caps[3] = {40, 200, 200};
        double load[3] = {0, 0, 0};
        load[a] += 10;
        load[b] += 6;
        for (int s : {a, b}) {
          const double g = load[s] / caps[s];
          want += g * cfg.tau_ms / (1 - g);
        }
        CHECK(e2e_delay_ms(st, topo, 0, cfg) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("server energy") {
    const Topology topo(1, {{0, Tier::Edge, 40, 16}, {1, Tier::Core, 200, 64}},
                        {{0, 0, 1, 3.5, 0.5}});
    const PerfConfig cfg;
    NetworkState st(topo);
    CHECK(server_energy(st, 0, cfg) == 0.0);
    st.register_fg(scenario::make_fg(0, {{0.0, 1.0}}));
    st.apply_placement(0, 0, 0);
    st.roll_activation();
    CHECK(std::abs(server_energy(st, 0, cfg) - 10.0) < 1e-12);

    NetworkState full(topo);
    full.register_fg(scenario::make_fg(0, {{40, 1}}));
    full.apply_placement(0, 0, 0);
    full.roll_activation();
    CHECK(std::abs(server_energy(full, 0, cfg) - 110.0) < 1e-12);

    NetworkState wake(topo);
    wake.register_fg(scenario::make_fg(0, {{20, 1}}));
    wake.apply_placement(0, 0, 0);
    CHECK(std::abs(server_energy(wake, 0, cfg) - 62.0) < 1e-12);
    // Powering down also costs the transition energy.
    wake.roll_activation();
    wake.remove_fg(0);
    CHECK(server_energy(wake, 0, cfg) == 2.0);

    const EnergyReport r = network_energy(full, cfg);
    CHECK(r.per_server.size() == 2);
    CHECK(r.total == doctest::Approx(110.0));
  }

  TEST_CASE("migration deltas") {
    const MigrationDeltas none = migration_deltas({5, 20}, {5, 20});
    CHECK(none.delay_reduction_ms == 0.0);
    CHECK(none.energy_reduction == 0.0);
    const MigrationDeltas fig = migration_deltas({14, 120}, {12, 108});
    CHECK(fig.delay_reduction_ms == 2.0);
    CHECK(fig.energy_reduction == 12.0);
  }

  TEST_CASE("lambda composite") {
    CHECK(lambda_composite(0, 0, 0.5, 0.5, true, 14, 100) == 0.0);
    CHECK(lambda_composite(2, 10, 1.0, 0.0, true, 14, 100) == 2.0 / 14.0);
    CHECK(lambda_composite(2, 10, 0.0, 1.0, true, 14, 100) == 0.1);
    CHECK(std::abs(lambda_composite(0.143, 0.1, 0.5, 0.5, false, 1, 1) - 0.1215) < 1e-12);
    CHECK(lambda_composite(2, 10, 0.5, 0.5, true, 14, 100) ==
          doctest::Approx(0.5 * 2.0 / 14.0 + 0.05).epsilon(1e-12));
    CHECK(lambda_composite(2, 10, 0.5, 0.5, false, 14, 100) == 6.0);
    // Zero scales fall back to a floor instead of dividing by zero.
    CHECK(std::isfinite(lambda_composite(1, 1, 0.5, 0.5, true, 0, 0)));
  }

  TEST_CASE("objective value") {
    CHECK(objective_value({}, 10) == 0.0);
    const std::vector<double> one{0.12};
    CHECK(std::abs(objective_value(one, 10) - 0.012) < 1e-15);
    CHECK(objective_value(one, 0) == 0.0);
  }

  TEST_CASE("config validation") {
    PerfConfig c;
    c.tau1 = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.energy_max = 5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}
