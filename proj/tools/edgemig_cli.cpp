// edgemig: run, compare and replay migration experiments.
//
//   edgemig run --policy a2c-dt --episodes 60 --out-dir out/
//   edgemig compare --policies a2c-dt,random,threshold --seeds 1,2,3 --out-dir cmp/
//   edgemig replay out/events.jsonl

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgemig/errors.hpp"
#include "edgemig/harness.hpp"

using namespace edgemig;

namespace {

// Flags are applied on top of --config / --paper-defaults, so only the ones the
// user actually passed are kept in optionals.
struct Overrides {
  std::optional<int> n_edge, n_core;
  std::optional<double> alpha, beta;
  std::optional<double> edge_cpu, edge_mem, core_cpu, core_mem, link_bw, prop_min, prop_max;
  std::optional<int> fg_count, chain_length, cpu_min, cpu_max, mem_min, mem_max;
  std::optional<double> rate, bw_min, bw_max, mean_service, packet_rate, deadline;
  std::optional<double> packet_size, tau, tau1, tau2, e_base, e_max, e_trans;
  std::optional<bool> normalize_lambda;
  std::optional<double> th_cpu, th_mem;
  std::optional<std::size_t> suc_cap, fail_cap, dt_cap, batch_p, batch_dt, warmup;
  std::optional<double> kappa_balance, lr, gamma, entropy, clip, twin_lr, kappa1, kappa2;
  std::optional<int> twin_steps, latent;
  std::optional<int> episodes, eval_window;
  std::optional<double> p_mig;

  void add_to(CLI::App& app) {
    auto* g = app.add_option_group("config", "ExperimentConfig fields");
    g->add_option("--n-edge", n_edge);
    g->add_option("--n-core", n_core);
    g->add_option("--waxman-alpha", alpha);
    g->add_option("--waxman-beta", beta);
    g->add_option("--edge-cpu", edge_cpu);
    g->add_option("--edge-mem", edge_mem);
    g->add_option("--core-cpu", core_cpu);
    g->add_option("--core-mem", core_mem);
    g->add_option("--link-bandwidth", link_bw, "Gbps");
    g->add_option("--prop-delay-min", prop_min, "ms");
    g->add_option("--prop-delay-max", prop_max, "ms");
    g->add_option("--fgs", fg_count, "requests per episode");
    g->add_option("--arrival-rate", rate, "arrivals per step");
    g->add_option("--chain-length", chain_length);
    g->add_option("--cpu-min", cpu_min);
    g->add_option("--cpu-max", cpu_max);
    g->add_option("--mem-min", mem_min);
    g->add_option("--mem-max", mem_max);
    g->add_option("--bw-min", bw_min, "Gbps");
    g->add_option("--bw-max", bw_max, "Gbps");
    g->add_option("--mean-service", mean_service, "steps");
    g->add_option("--packet-rate", packet_rate);
    g->add_option("--deadline", deadline, "ms");
    g->add_option("--packet-size", packet_size, "bytes");
    g->add_option("--tau", tau, "ms");
    g->add_option("--tau1", tau1);
    g->add_option("--tau2", tau2);
    g->add_option("--energy-base", e_base);
    g->add_option("--energy-max", e_max);
    g->add_option("--energy-trans", e_trans);
    g->add_option("--normalize-lambda", normalize_lambda);
    g->add_option("--threshold-cpu", th_cpu);
    g->add_option("--threshold-mem", th_mem);
    g->add_option("--success-capacity", suc_cap);
    g->add_option("--fail-capacity", fail_cap);
    g->add_option("--dt-capacity", dt_cap);
    g->add_option("--kappa-balance", kappa_balance);
    g->add_option("--lr", lr);
    g->add_option("--gamma", gamma);
    g->add_option("--batch-physical", batch_p);
    g->add_option("--batch-dt", batch_dt);
    g->add_option("--warmup", warmup);
    g->add_option("--entropy", entropy);
    g->add_option("--clip-norm", clip);
    g->add_option("--twin-steps", twin_steps);
    g->add_option("--twin-lr", twin_lr);
    g->add_option("--kappa1", kappa1);
    g->add_option("--kappa2", kappa2);
    g->add_option("--latent", latent);
    g->add_option("--episodes", episodes);
    g->add_option("--eval-window", eval_window);
    g->add_option("--random-migration-prob", p_mig);
  }

  void apply(ExperimentConfig& c) const {
    auto set = [](auto& dst, const auto& src) {
      if (src) dst = *src;
    };
    set(c.topology.n_edge, n_edge);
    set(c.topology.n_core, n_core);
    set(c.topology.alpha, alpha);
    set(c.topology.beta, beta);
    set(c.capacities.edge_cpu, edge_cpu);
    set(c.capacities.edge_mem, edge_mem);
    set(c.capacities.core_cpu, core_cpu);
    set(c.capacities.core_mem, core_mem);
    set(c.capacities.link_bandwidth_gbps, link_bw);
    set(c.capacities.prop_delay_min_ms, prop_min);
    set(c.capacities.prop_delay_max_ms, prop_max);
    set(c.workload.count, fg_count);
    set(c.workload.rate, rate);
    set(c.workload.chain_length, chain_length);
    set(c.workload.cpu_min, cpu_min);
    set(c.workload.cpu_max, cpu_max);
    set(c.workload.mem_min, mem_min);
    set(c.workload.mem_max, mem_max);
    set(c.workload.bw_min_gbps, bw_min);
    set(c.workload.bw_max_gbps, bw_max);
    set(c.workload.mean_service_time, mean_service);
    set(c.workload.packet_rate, packet_rate);
    set(c.workload.deadline_ms, deadline);
    set(c.perf.packet_size_bytes, packet_size);
    set(c.perf.tau_ms, tau);
    set(c.perf.tau1, tau1);
    set(c.perf.tau2, tau2);
    set(c.perf.energy_base, e_base);
    set(c.perf.energy_max, e_max);
    set(c.perf.energy_trans, e_trans);
    set(c.perf.normalize_lambda, normalize_lambda);
    set(c.thresholds.cpu, th_cpu);
    set(c.thresholds.mem, th_mem);
    set(c.learning.success_capacity, suc_cap);
    set(c.learning.fail_capacity, fail_cap);
    set(c.learning.dt_capacity, dt_cap);
    set(c.learning.kappa_balance, kappa_balance);
    set(c.learning.lr, lr);
    set(c.learning.gamma, gamma);
    set(c.learning.batch_physical, batch_p);
    set(c.learning.batch_dt, batch_dt);
    set(c.learning.warmup, warmup);
    set(c.learning.entropy_coef, entropy);
    set(c.learning.clip_norm, clip);
    set(c.learning.twin_steps, twin_steps);
    set(c.learning.twin_lr, twin_lr);
    set(c.learning.kappa1, kappa1);
    set(c.learning.kappa2, kappa2);
    set(c.learning.latent, latent);
    set(c.episodes, episodes);
    set(c.eval_window, eval_window);
    set(c.random_migration_prob, p_mig);
  }
};

struct Common {
  std::string config_path;
  bool paper_defaults = false;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  Overrides overrides;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_flag("--paper-defaults", paper_defaults,
                 "start from the tabulated learning values (lr 0.1)");
    app.add_option("--seed", seed);
    app.add_option("--out-dir", out_dir);
    overrides.add_to(app);
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg = paper_defaults ? ExperimentConfig::paper_defaults() : ExperimentConfig{};
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      const auto j = nlohmann::json::parse(in);
      from_json(j, cfg);
      if (paper_defaults && !(j.contains("learning") && j["learning"].contains("lr"))) {
        cfg.learning.lr = ExperimentConfig::paper_defaults().learning.lr;
      }
    }
    overrides.apply(cfg);
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void print_episode(const EpisodeMetrics& m) {
  std::cout << m.policy << " seed " << m.seed << " ep " << m.episode << ": delay "
            << m.avg_delay_ms << " ms, energy " << m.avg_energy << ", reward " << m.cum_reward
            << ", accept " << m.accept_rate << ", mig " << m.migrations << ", rev " << m.reverts
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VNF migration simulator for edge-core networks"};
  app.require_subcommand(1);

  Common run_opts;
  std::string run_policy;
  auto* run = app.add_subcommand("run", "train or evaluate one policy");
  run_opts.add_to(*run);
  run->add_option("--policy", run_policy, "a2c-dt | a2c-plain | threshold | random");

  Common cmp_opts;
  std::vector<std::string> cmp_policies{"a2c-dt", "a2c-plain", "threshold", "random"};
  std::vector<std::uint64_t> cmp_seeds;
  bool full_baselines = false;
  auto* cmp = app.add_subcommand("compare", "run several policies over several seeds");
  cmp_opts.add_to(*cmp);
  cmp->add_option("--policies", cmp_policies)->delimiter(',');
  cmp->add_option("--seeds", cmp_seeds)->delimiter(',');
  cmp->add_flag("--full-baselines", full_baselines,
                "simulate every episode for non-learning policies too");

  std::string events_path;
  std::string check_csv;
  auto* rep = app.add_subcommand("replay", "recompute metrics from an event log");
  rep->add_option("events", events_path)->required()->check(CLI::ExistingFile);
  rep->add_option("--check", check_csv, "compare against this metrics.csv")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig cfg = run_opts.build();
      if (!run_policy.empty()) cfg.policy = parse_policy(run_policy);
      RunOptions ro;
      ro.out_dir = run_opts.out_dir;
      const RunResult r = run_experiment(cfg, ro);
      for (const auto& m : r.episodes) print_episode(m);
      if (ro.out_dir.empty()) write_metrics_csv(std::cout, r.episodes);
    } else if (*cmp) {
      ExperimentConfig cfg = cmp_opts.build();
      std::vector<PolicyKind> kinds;
      for (const auto& p : cmp_policies) kinds.push_back(parse_policy(p));
      if (cmp_seeds.empty()) cmp_seeds = cfg.seeds;
      CompareOptions co;
      co.out_dir = cmp_opts.out_dir;
      co.baselines_window_only = !full_baselines;
      const CompareResult res = compare_policies(cfg, kinds, cmp_seeds, co);
      std::cout << res.to_json().dump(2) << '\n';
    } else if (*rep) {
      std::ifstream in(events_path);
      const auto rows = replay(in);
      if (check_csv.empty()) {
        write_metrics_csv(std::cout, rows);
        return 0;
      }
      std::ifstream csv(check_csv);
      const auto ref = read_metrics_csv(csv);
      if (ref.size() != rows.size()) {
        std::cerr << "episode count differs: log " << rows.size() << ", csv " << ref.size() << '\n';
        return 1;
      }
      double worst = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (auto [a, b] : {std::pair{rows[i].avg_delay_ms, ref[i].avg_delay_ms},
                            std::pair{rows[i].avg_energy, ref[i].avg_energy},
                            std::pair{rows[i].cum_reward, ref[i].cum_reward},
                            std::pair{rows[i].norm_reward, ref[i].norm_reward},
                            std::pair{rows[i].accept_rate, ref[i].accept_rate}}) {
          worst = std::max(worst, std::abs(a - b));
        }
        if (rows[i].migrations != ref[i].migrations || rows[i].reverts != ref[i].reverts) {
          worst = std::max(worst, 1.0);
        }
      }
      std::cout << "max abs difference " << worst << '\n';
      return worst <= 1e-9 ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
