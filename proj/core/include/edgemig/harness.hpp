#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgemig/agent.hpp"
#include "edgemig/network_state.hpp"
#include "edgemig/perf.hpp"
#include "edgemig/topology.hpp"
#include "edgemig/workload.hpp"

namespace edgemig {

enum class PolicyKind : std::uint8_t { A2cDt, A2cPlain, Threshold, Random };

const char* to_string(PolicyKind kind);
/// Accepts "a2c-dt", "a2c-plain", "threshold", "random"; throws ConfigError.
PolicyKind parse_policy(const std::string& name);
inline bool is_learner(PolicyKind k) { return k == PolicyKind::A2cDt || k == PolicyKind::A2cPlain; }

struct LearningConfig {
  std::size_t success_capacity = 4000;
  std::size_t fail_capacity = 2000;
  std::size_t dt_capacity = 6000;
  double kappa_balance = 0.35;
  double lr = 1e-3;
  double gamma = 0.95;
  std::size_t batch_physical = 32;
  std::size_t batch_dt = 32;
  std::size_t warmup = 500;
  double entropy_coef = 0.01;
  double clip_norm = 5.0;
  int twin_steps = 200;
  double twin_lr = 1e-3;
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  int latent = 16;

  void validate() const;
};

struct ExperimentConfig {
  WaxmanParams topology;  // its seed is replaced by one derived from `seed`
  CapacityConfig capacities;
  WorkloadConfig workload;
  PerfConfig perf;
  Thresholds thresholds;
  LearningConfig learning;
  PolicyKind policy = PolicyKind::A2cDt;
  int episodes = 100;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double random_migration_prob = 0.5;
  int eval_window = 10;

  void validate() const;
  AgentConfig agent_config(bool use_twin) const;

  /// Defaults with every learning value set as tabulated in the source
  /// experiments, including the 0.1 learning rate.
  static ExperimentConfig paper_defaults();
};

void to_json(nlohmann::json& j, const Thresholds& t);
void from_json(const nlohmann::json& j, Thresholds& t);
void to_json(nlohmann::json& j, const LearningConfig& c);
void from_json(const nlohmann::json& j, LearningConfig& c);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct EpisodeMetrics {
  int episode = 0;
  std::string policy;
  std::uint64_t seed = 0;
  double avg_delay_ms = 0.0;  // over active graphs and steps
  double avg_energy = 0.0;    // per step
  double cum_reward = 0.0;
  double norm_reward = 0.0;
  double accept_rate = 0.0;
  int migrations = 0;
  int reverts = 0;
  std::int64_t steps = 0;
  std::int64_t decisions = 0;
};

/// Per-step figures kept for load-bucketed comparisons.
struct StepSample {
  int episode = 0;
  int active = 0;
  double energy = 0.0;
  double avg_delay_ms = 0.0;  // 0 when nothing is active
};

struct RunResult {
  std::vector<EpisodeMetrics> episodes;
  std::vector<StepSample> steps;  // evaluation-window episodes only
  std::vector<EpisodeLearning> learning;
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: write nothing
  int first_episode = 0;          // earlier episodes are skipped entirely
};

/// Min-max normalization; a constant series maps to all ones.
std::vector<double> normalize_rewards(std::span<const double> rewards);

/// Simulates episodes [first_episode, episodes) of cfg.policy under cfg.seed.
/// The topology is fixed for the run; episode e's workload is seeded from
/// (seed, e), so every policy faces the same requests. With an output
/// directory, writes metrics.csv, events.jsonl, summary.json and, for learners,
/// checkpoints. Throws TrainingError naming the episode on divergence.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

Topology build_topology(const ExperimentConfig& cfg);
std::vector<VnfFg> episode_requests(const ExperimentConfig& cfg, int episode);

void write_metrics_csv(std::ostream& out, std::span<const EpisodeMetrics> rows);
std::vector<EpisodeMetrics> read_metrics_csv(std::istream& in);

struct PolicySummary {
  std::string policy;
  double median_energy = 0.0;  // median over seeds of the evaluation-window mean
  double median_delay_ms = 0.0;
  double median_cum_reward = 0.0;
  std::vector<double> bucket_energy;  // per load decile, median over steps
  std::vector<double> bucket_delay_ms;
};

struct CompareResult {
  std::vector<PolicySummary> policies;
  std::vector<double> bucket_edges;  // upper active-graph count of each decile
  /// reductions[a][b]: percentage by which a's median lies below b's.
  std::map<std::string, std::map<std::string, double>> energy_reduction;
  std::map<std::string, std::map<std::string, double>> delay_reduction;
  std::map<std::string, std::vector<RunResult>> runs;  // per policy, per seed
  nlohmann::json to_json() const;
};

struct CompareOptions {
  std::filesystem::path out_dir;
  /// Non-learning policies only need the evaluation window simulated.
  bool baselines_window_only = true;
};

CompareResult compare_policies(const ExperimentConfig& cfg, std::span<const PolicyKind> policies,
                               std::span<const std::uint64_t> seeds,
                               const CompareOptions& opts = {});

/// (a - b) / b in percent, negated so that a below b is a positive reduction.
double percent_reduction(double a, double b);

/// Rebuilds per-episode metrics from an events.jsonl stream.
std::vector<EpisodeMetrics> replay(std::istream& events);

}  // namespace edgemig
