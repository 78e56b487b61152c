#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgemig/errors.hpp"
#include "edgemig/harness.hpp"

using namespace edgemig;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(PolicyKind policy) {
  ExperimentConfig cfg;
  cfg.topology.n_edge = 2;
  cfg.topology.n_core = 4;
  cfg.workload.count = 20;
  cfg.policy = policy;
  cfg.episodes = 2;
  cfg.eval_window = 2;
  cfg.seed = 7;
  cfg.learning.warmup = 10;
  cfg.learning.twin_steps = 5;
  cfg.learning.batch_physical = 8;
  cfg.learning.batch_dt = 8;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("edgemig_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("baseline run writes its artifacts") {
    const fs::path dir = scratch("random");
    RunOptions ro;
    ro.out_dir = dir;
    const RunResult r = run_experiment(tiny_config(PolicyKind::Random), ro);
    CHECK(r.episodes.size() == 2);
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "events.jsonl"));
    CHECK_FALSE(fs::exists(dir / "checkpoints"));

    std::ifstream csv(dir / "metrics.csv");
    std::string header;
    std::getline(csv, header);
    csv.seekg(0);
    CHECK(header ==
          "episode,policy,seed,avg_delay_ms,avg_energy,cum_reward,norm_reward,accept_rate,"
          "migrations,reverts");
    const auto rows = read_metrics_csv(csv);
    CHECK(rows.size() == 2);

    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    for (const char* key : {"policy", "seed", "config", "episodes", "final_window"}) {
      CHECK(summary.contains(key));
    }
    CHECK(summary["policy"] == "random");
    CHECK(summary["final_window"]["episodes"] == 2);
  }

  TEST_CASE("identical seeds give identical files") {
    for (PolicyKind kind : {PolicyKind::Random, PolicyKind::A2cDt}) {
      const fs::path a = scratch("det_a");
      const fs::path b = scratch("det_b");
      run_experiment(tiny_config(kind), {a, 0});
      run_experiment(tiny_config(kind), {b, 0});
      CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
      CHECK(slurp(a / "events.jsonl") == slurp(b / "events.jsonl"));
    }
  }

  TEST_CASE("event log replays to the same metrics") {
    for (PolicyKind kind : {PolicyKind::Threshold, PolicyKind::A2cPlain}) {
      const fs::path dir = scratch("replay");
      const RunResult r = run_experiment(tiny_config(kind), {dir, 0});
      std::ifstream events(dir / "events.jsonl");
      const auto rows = replay(events);
      REQUIRE(rows.size() == r.episodes.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& x = rows[i];
        const auto& y = r.episodes[i];
        CHECK(x.episode == y.episode);
        CHECK(std::abs(x.avg_delay_ms - y.avg_delay_ms) <= 1e-9);
        CHECK(std::abs(x.avg_energy - y.avg_energy) <= 1e-9);
        CHECK(std::abs(x.cum_reward - y.cum_reward) <= 1e-9);
        CHECK(std::abs(x.norm_reward - y.norm_reward) <= 1e-9);
        CHECK(std::abs(x.accept_rate - y.accept_rate) <= 1e-9);
        CHECK(x.migrations == y.migrations);
        CHECK(x.reverts == y.reverts);
      }
    }
  }

  TEST_CASE("learner runs leave checkpoints and the synthetic buffer") {
    const fs::path dir = scratch("a2c");
    const RunResult r = run_experiment(tiny_config(PolicyKind::A2cDt), {dir, 0});
    CHECK(r.learning.size() == 2);
    CHECK(fs::exists(dir / "checkpoints"));
    CHECK(fs::exists(dir / "dt_buffer.jsonl"));
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary["learning"].size() == 2);
  }

  TEST_CASE("resuming skips earlier episodes") {
    ExperimentConfig cfg = tiny_config(PolicyKind::Random);
    cfg.episodes = 3;
    const RunResult full = run_experiment(cfg);
    const RunResult tail = run_experiment(cfg, {{}, 2});
    REQUIRE(tail.episodes.size() == 1);
    CHECK(tail.episodes[0].episode == 2);
    CHECK(tail.episodes[0].avg_energy == full.episodes[2].avg_energy);
  }

  TEST_CASE("a policy compared with itself shows no reduction") {
    ExperimentConfig cfg = tiny_config(PolicyKind::Random);
    const std::vector<PolicyKind> kinds{PolicyKind::Threshold, PolicyKind::Random};
    const std::vector<std::uint64_t> seeds{1, 2};
    const CompareResult res = compare_policies(cfg, kinds, seeds);
    CHECK(res.energy_reduction.at("random").at("random") == 0.0);
    CHECK(res.delay_reduction.at("threshold").at("threshold") == 0.0);
    CHECK(res.runs.at("random").size() == 2);
    const auto j = res.to_json();
    CHECK(j.contains("policies"));
  }

  TEST_CASE("compare writes one csv row per policy, seed and episode") {
    const fs::path dir = scratch("compare");
    ExperimentConfig cfg = tiny_config(PolicyKind::Random);
    const std::vector<PolicyKind> kinds{PolicyKind::Threshold, PolicyKind::Random};
    const std::vector<std::uint64_t> seeds{1, 2};
    CompareOptions co;
    co.out_dir = dir;
    co.baselines_window_only = false;
    compare_policies(cfg, kinds, seeds, co);
    std::ifstream csv(dir / "metrics.csv");
    CHECK(read_metrics_csv(csv).size() == 8);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    for (const char* key : {"config", "seeds", "eval_window", "policies"}) CHECK(summary.contains(key));
  }
}

TEST_SUITE("harness_helpers") {
  TEST_CASE("reward normalization") {
    const std::vector<double> r{1, 2, 3};
    const auto n = normalize_rewards(r);
    CHECK(n == std::vector<double>{0.0, 0.5, 1.0});
    const std::vector<double> flat{4, 4, 4};
    CHECK(normalize_rewards(flat) == std::vector<double>{1, 1, 1});
    CHECK(normalize_rewards(std::vector<double>{}).empty());

    const std::vector<double> raw{-3.0, 0.25, 7.5, 2.0, 2.0};
    std::vector<double> moved;
    for (double x : raw) moved.push_back(4.0 * x - 11.0);
    const auto a = normalize_rewards(raw);
    const auto b = normalize_rewards(moved);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }

  TEST_CASE("percent reduction") {
    CHECK(percent_reduction(90, 100) == doctest::Approx(10.0));
    CHECK(percent_reduction(110, 100) == doctest::Approx(-10.0));
    CHECK(percent_reduction(5, 5) == 0.0);
  }

  TEST_CASE("policy names") {
    for (PolicyKind k : {PolicyKind::A2cDt, PolicyKind::A2cPlain, PolicyKind::Threshold,
                         PolicyKind::Random}) {
      CHECK(parse_policy(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_policy("greedy"), ConfigError);
  }

  TEST_CASE("config json round trip") {
    ExperimentConfig cfg = ExperimentConfig::paper_defaults();
    cfg.seed = 99;
    cfg.policy = PolicyKind::Threshold;
    cfg.learning.entropy_coef = 0.2;
    const nlohmann::json j = cfg;
    const ExperimentConfig back = j.get<ExperimentConfig>();
    CHECK(nlohmann::json(back) == j);

    const ExperimentConfig partial = nlohmann::json{{"episodes", 12}}.get<ExperimentConfig>();
    CHECK(partial.episodes == 12);
    CHECK(partial.learning.warmup == ExperimentConfig{}.learning.warmup);
  }

  TEST_CASE("config validation") {
    ExperimentConfig cfg;
    cfg.episodes = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.learning.kappa_balance = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.random_migration_prob = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(ExperimentConfig{}.validate());
  }

  TEST_CASE("metrics csv round trip") {
    std::vector<EpisodeMetrics> rows(3);
    for (int i = 0; i < 3; ++i) {
      auto& m = rows[static_cast<std::size_t>(i)];
      m.episode = i;
      m.policy = "a2c-dt";
      m.seed = 42;
      m.avg_delay_ms = 1.0 / 3.0 + i;
      m.avg_energy = 1234.5678901234567 * (i + 1);
      m.cum_reward = -0.1 * i;
      m.norm_reward = 0.5;
      m.accept_rate = 0.95;
      m.migrations = 10 * i;
      m.reverts = i;
    }
    std::stringstream ss;
    write_metrics_csv(ss, rows);
    const auto back = read_metrics_csv(ss);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back[i].episode == rows[i].episode);
      CHECK(back[i].policy == rows[i].policy);
      CHECK(back[i].seed == rows[i].seed);
      CHECK(back[i].avg_delay_ms == rows[i].avg_delay_ms);
      CHECK(back[i].avg_energy == rows[i].avg_energy);
      CHECK(back[i].cum_reward == rows[i].cum_reward);
      CHECK(back[i].migrations == rows[i].migrations);
      CHECK(back[i].reverts == rows[i].reverts);
    }
  }

  TEST_CASE("episodes share requests across policies") {
    ExperimentConfig a = tiny_config(PolicyKind::Random);
    ExperimentConfig b = tiny_config(PolicyKind::A2cDt);
    const auto ra = episode_requests(a, 1);
    const auto rb = episode_requests(b, 1);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].arrival == rb[i].arrival);
    const auto other = episode_requests(a, 0);
    bool differs = false;
    for (std::size_t i = 0; i < other.size() && i < ra.size(); ++i) {
      differs = differs || other[i].arrival != ra[i].arrival;
    }
    CHECK(differs);
    CHECK(build_topology(a).server_count() == 6);
  }
}

TEST_SUITE("agent") {
  TEST_CASE("checkpoint round trip") {
    ExperimentConfig cfg = tiny_config(PolicyKind::A2cDt);
    const AgentConfig ac = cfg.agent_config(true);
    A2cAgent a(ac, 6, 4, 1);
    A2cAgent b(ac, 6, 4, 2);
    const fs::path dir = scratch("agent");
    a.save_checkpoint(dir / "ck");
    b.load_checkpoint(dir / "ck");
    CHECK(a.actor_critic().actor().params() == b.actor_critic().actor().params());
    CHECK(a.actor_critic().critic().params() == b.actor_critic().critic().params());

    A2cAgent plain(cfg.agent_config(false), 6, 4, 3);
    CHECK(plain.twin() == nullptr);
    CHECK(a.twin() != nullptr);
  }
}
