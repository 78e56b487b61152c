#include "edgemig/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "edgemig/baselines.hpp"
#include "edgemig/errors.hpp"
#include "edgemig/event_log.hpp"
#include "edgemig/mdp.hpp"
#include "edgemig/orchestrator.hpp"

namespace edgemig {

namespace {

constexpr std::uint64_t kTopologyStream = 0x7090;
constexpr std::uint64_t kWorkloadStream = 0x1000;
constexpr std::uint64_t kPolicyStream = 0xA2C0;

constexpr const char* kCsvHeader =
    "episode,policy,seed,avg_delay_ms,avg_energy,cum_reward,norm_reward,accept_rate,migrations,"
    "reverts";

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

nlohmann::json nan_to_null(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json());
  return out;
}

}  // namespace

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::A2cDt:
      return "a2c-dt";
    case PolicyKind::A2cPlain:
      return "a2c-plain";
    case PolicyKind::Threshold:
      return "threshold";
    case PolicyKind::Random:
      return "random";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& name) {
  for (PolicyKind k : {PolicyKind::A2cDt, PolicyKind::A2cPlain, PolicyKind::Threshold,
                       PolicyKind::Random}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown policy '" + name + "'");
}

// ------------------------------------------------------------------ config

void LearningConfig::validate() const {
  if (success_capacity == 0 || fail_capacity == 0 || dt_capacity == 0) {
    throw ConfigError("buffer capacities must be positive");
  }
  if (!(kappa_balance >= 0.0 && kappa_balance <= 1.0)) {
    throw ConfigError("kappa_balance must lie in [0, 1]");
  }
  if (!(lr > 0.0) || !(twin_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (batch_physical == 0) throw ConfigError("batch_physical must be positive");
  if (entropy_coef < 0.0) throw ConfigError("entropy_coef must be non-negative");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (twin_steps < 0) throw ConfigError("twin_steps must be non-negative");
  if (!(kappa1 >= 0.0 && kappa1 <= 1.0 && kappa2 >= 0.0 && kappa2 <= 1.0)) {
    throw ConfigError("kappa1 and kappa2 must lie in [0, 1]");
  }
  if (latent < 1) throw ConfigError("latent must be positive");
}

void ExperimentConfig::validate() const {
  topology.validate();
  capacities.validate();
  workload.validate();
  perf.validate();
  thresholds.validate();
  learning.validate();
  if (episodes < 1) throw ConfigError("episodes must be at least 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (!(random_migration_prob >= 0.0 && random_migration_prob <= 1.0)) {
    throw ConfigError("random_migration_prob must lie in [0, 1]");
  }
  if (eval_window < 1) throw ConfigError("eval_window must be at least 1");
}

AgentConfig ExperimentConfig::agent_config(bool use_twin) const {
  const LearningConfig& l = learning;
  AgentConfig a;
  a.ac.gamma = l.gamma;
  a.ac.actor_lr = l.lr;
  a.ac.critic_lr = l.lr;
  a.ac.entropy_coef = l.entropy_coef;
  a.ac.clip_norm = l.clip_norm;
  a.twin.lr = l.twin_lr;
  a.twin.kappa1 = l.kappa1;
  a.twin.kappa2 = l.kappa2;
  a.twin.vae.latent = l.latent;
  a.twin.batch = static_cast<int>(l.batch_dt);
  a.twin.clip_norm = l.clip_norm;
  a.buffers = {l.success_capacity, l.fail_capacity, l.dt_capacity};
  a.use_twin = use_twin;
  a.kappa_balance = l.kappa_balance;
  a.batch_physical = l.batch_physical;
  a.batch_dt = l.batch_dt;
  a.warmup = l.warmup;
  a.twin_steps = l.twin_steps;
  return a;
}

ExperimentConfig ExperimentConfig::paper_defaults() {
  ExperimentConfig c;
  c.learning.lr = 0.1;
  return c;
}

void to_json(nlohmann::json& j, const Thresholds& t) { j = {{"cpu", t.cpu}, {"mem", t.mem}}; }

void from_json(const nlohmann::json& j, Thresholds& t) {
  Thresholds d;
  t.cpu = j.value("cpu", d.cpu);
  t.mem = j.value("mem", d.mem);
}

void to_json(nlohmann::json& j, const LearningConfig& c) {
  j = {{"success_capacity", c.success_capacity},
       {"fail_capacity", c.fail_capacity},
       {"dt_capacity", c.dt_capacity},
       {"kappa_balance", c.kappa_balance},
       {"lr", c.lr},
       {"gamma", c.gamma},
       {"batch_physical", c.batch_physical},
       {"batch_dt", c.batch_dt},
       {"warmup", c.warmup},
       {"entropy_coef", c.entropy_coef},
       {"clip_norm", c.clip_norm},
       {"twin_steps", c.twin_steps},
       {"twin_lr", c.twin_lr},
       {"kappa1", c.kappa1},
       {"kappa2", c.kappa2},
       {"latent", c.latent}};
}

void from_json(const nlohmann::json& j, LearningConfig& c) {
  LearningConfig d;
  c.success_capacity = j.value("success_capacity", d.success_capacity);
  c.fail_capacity = j.value("fail_capacity", d.fail_capacity);
  c.dt_capacity = j.value("dt_capacity", d.dt_capacity);
  c.kappa_balance = j.value("kappa_balance", d.kappa_balance);
  c.lr = j.value("lr", d.lr);
  c.gamma = j.value("gamma", d.gamma);
  c.batch_physical = j.value("batch_physical", d.batch_physical);
  c.batch_dt = j.value("batch_dt", d.batch_dt);
  c.warmup = j.value("warmup", d.warmup);
  c.entropy_coef = j.value("entropy_coef", d.entropy_coef);
  c.clip_norm = j.value("clip_norm", d.clip_norm);
  c.twin_steps = j.value("twin_steps", d.twin_steps);
  c.twin_lr = j.value("twin_lr", d.twin_lr);
  c.kappa1 = j.value("kappa1", d.kappa1);
  c.kappa2 = j.value("kappa2", d.kappa2);
  c.latent = j.value("latent", d.latent);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"topology", c.topology},
       {"capacities", c.capacities},
       {"workload", c.workload},
       {"perf", c.perf},
       {"thresholds", c.thresholds},
       {"learning", c.learning},
       {"policy", to_string(c.policy)},
       {"episodes", c.episodes},
       {"seed", c.seed},
       {"seeds", c.seeds},
       {"random_migration_prob", c.random_migration_prob},
       {"eval_window", c.eval_window}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  ExperimentConfig d;
  c = d;
  if (j.contains("topology")) c.topology = j.at("topology").get<WaxmanParams>();
  if (j.contains("capacities")) c.capacities = j.at("capacities").get<CapacityConfig>();
  if (j.contains("workload")) c.workload = j.at("workload").get<WorkloadConfig>();
  if (j.contains("perf")) c.perf = j.at("perf").get<PerfConfig>();
  if (j.contains("thresholds")) c.thresholds = j.at("thresholds").get<Thresholds>();
  if (j.contains("learning")) c.learning = j.at("learning").get<LearningConfig>();
  if (j.contains("policy")) c.policy = parse_policy(j.at("policy").get<std::string>());
  c.episodes = j.value("episodes", d.episodes);
  c.seed = j.value("seed", d.seed);
  c.seeds = j.value("seeds", d.seeds);
  c.random_migration_prob = j.value("random_migration_prob", d.random_migration_prob);
  c.eval_window = j.value("eval_window", d.eval_window);
}

// ------------------------------------------------------------------- runs

std::vector<double> normalize_rewards(std::span<const double> rewards) {
  std::vector<double> out(rewards.size(), 1.0);
  if (rewards.empty()) return out;
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - *lo) / range;
  return out;
}

Topology build_topology(const ExperimentConfig& cfg) {
  WaxmanParams p = cfg.topology;
  p.seed = derive_seed(cfg.seed, kTopologyStream);
  return generate_waxman(p, cfg.capacities);
}

std::vector<VnfFg> episode_requests(const ExperimentConfig& cfg, int episode) {
  return generate_requests(cfg.workload,
                           derive_seed(cfg.seed, kWorkloadStream + static_cast<std::uint64_t>(episode)));
}

namespace {

struct EpisodeAccumulator {
  double delay_sum = 0.0;
  std::int64_t active = 0;
  double energy = 0.0;
  std::int64_t steps = 0;
  double reward = 0.0;
  std::int64_t decisions = 0;
  int arrivals = 0;
  int accepted = 0;
  int migrations = 0;
  int reverts = 0;

  EpisodeMetrics finish(int episode, const std::string& policy, std::uint64_t seed) const {
    EpisodeMetrics m;
    m.episode = episode;
    m.policy = policy;
    m.seed = seed;
    m.avg_delay_ms = active > 0 ? delay_sum / static_cast<double>(active) : 0.0;
    m.avg_energy = steps > 0 ? energy / static_cast<double>(steps) : 0.0;
    m.cum_reward = reward;
    m.accept_rate = arrivals > 0 ? static_cast<double>(accepted) / arrivals : 0.0;
    m.migrations = migrations;
    m.reverts = reverts;
    m.steps = steps;
    m.decisions = decisions;
    return m;
  }
};

nlohmann::json metrics_json(const EpisodeMetrics& m) {
  return {{"episode", m.episode},         {"policy", m.policy},
          {"seed", m.seed},               {"avg_delay_ms", m.avg_delay_ms},
          {"avg_energy", m.avg_energy},   {"cum_reward", m.cum_reward},
          {"norm_reward", m.norm_reward}, {"accept_rate", m.accept_rate},
          {"migrations", m.migrations},   {"reverts", m.reverts},
          {"steps", m.steps},             {"decisions", m.decisions}};
}

nlohmann::json learning_json(const EpisodeLearning& l) {
  return {{"updates", l.updates},
          {"actor_loss", l.actor_loss},
          {"critic_loss", l.critic_loss},
          {"generated", l.generated},
          {"twin_vae_loss", l.twin_vae_loss},
          {"twin_lstm_loss", l.twin_lstm_loss}};
}

void apply_normalization(std::vector<EpisodeMetrics>& rows) {
  std::vector<double> raw;
  for (const auto& r : rows) raw.push_back(r.cum_reward);
  const auto norm = normalize_rewards(raw);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].norm_reward = norm[i];
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (opts.first_episode < 0 || opts.first_episode >= cfg.episodes) {
    throw ConfigError("first_episode must lie in [0, episodes)");
  }
  const auto topo = std::make_shared<const Topology>(build_topology(cfg));
  const std::string policy_name = to_string(cfg.policy);
  const std::uint64_t policy_seed = derive_seed(cfg.seed, kPolicyStream);

  std::unique_ptr<MigrationPolicy> policy;
  A2cAgent* agent = nullptr;
  RandomPolicy* random = nullptr;
  switch (cfg.policy) {
    case PolicyKind::A2cDt:
    case PolicyKind::A2cPlain: {
      auto a = std::make_unique<A2cAgent>(cfg.agent_config(cfg.policy == PolicyKind::A2cDt),
                                          topo->server_count(), cfg.workload.chain_length,
                                          policy_seed);
      agent = a.get();
      policy = std::move(a);
      break;
    }
    case PolicyKind::Threshold:
      policy = std::make_unique<ThresholdPolicy>();
      break;
    case PolicyKind::Random: {
      auto r = std::make_unique<RandomPolicy>(cfg.random_migration_prob, policy_seed);
      random = r.get();
      policy = std::move(r);
      break;
    }
  }

  std::ofstream events;
  EventLog log;
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    events.open(opts.out_dir / "events.jsonl");
    if (!events) throw std::runtime_error("cannot write " + (opts.out_dir / "events.jsonl").string());
    log = EventLog(&events);
    log.set_episode(opts.first_episode);
    log.write({{"type", "run"}, {"policy", policy_name}, {"seed", cfg.seed}, {"config", cfg}});
  }

  const OrchestratorConfig orch{cfg.perf, cfg.thresholds};
  const int window_start = std::max(opts.first_episode, cfg.episodes - cfg.eval_window);
  RunResult result;
  for (int e = opts.first_episode; e < cfg.episodes; ++e) {
    log.set_episode(e);
    World world(topo, episode_requests(cfg, e), orch, &log);
    if (agent) agent->begin_episode();
    // Per-episode stream, so a resumed run matches the uninterrupted one.
    if (random) random->reseed(derive_seed(policy_seed, static_cast<std::uint64_t>(e)));
    EpisodeAccumulator acc;
    try {
      for (TimeStep t = 0;; ++t) {
        const StepReport rep = world.step(t, *policy);
        acc.delay_sum += rep.delay_sum;
        acc.active += static_cast<std::int64_t>(rep.fg_delays.size());
        acc.energy += rep.energy;
        ++acc.steps;
        for (const MigrationOutcome& o : rep.outcomes) acc.reward += reward(o);
        acc.decisions += static_cast<std::int64_t>(rep.outcomes.size());
        acc.arrivals += rep.arrivals;
        acc.accepted += rep.accepted;
        acc.migrations += rep.migrations;
        acc.reverts += rep.reverts;
        if (e >= window_start) {
          const int active = static_cast<int>(rep.fg_delays.size());
          result.steps.push_back(
              {e, active, rep.energy, active > 0 ? rep.delay_sum / active : 0.0});
        }
        if (world.finished(t)) break;
      }
      EpisodeLearning learning;
      if (agent) learning = agent->end_episode();
      result.learning.push_back(learning);
      if (log.enabled()) {
        nlohmann::json rec{{"type", "episode"}, {"steps", acc.steps}};
        if (agent) rec["learning"] = learning_json(learning);
        log.write(std::move(rec));
      }
    } catch (const TrainingError& err) {
      throw TrainingError("episode " + std::to_string(e) + ": " + err.what());
    }
    result.episodes.push_back(acc.finish(e, policy_name, cfg.seed));
  }
  apply_normalization(result.episodes);

  if (!opts.out_dir.empty()) {
    std::ofstream csv(opts.out_dir / "metrics.csv");
    write_metrics_csv(csv, result.episodes);

    nlohmann::json summary{{"policy", policy_name}, {"seed", cfg.seed}, {"config", cfg}};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& m : result.episodes) rows.push_back(metrics_json(m));
    summary["episodes"] = rows;
    double delay = 0.0, energy = 0.0, rew = 0.0;
    int n = 0;
    for (const auto& m : result.episodes) {
      if (m.episode < window_start) continue;
      delay += m.avg_delay_ms;
      energy += m.avg_energy;
      rew += m.cum_reward;
      ++n;
    }
    summary["final_window"] = {{"episodes", n},
                               {"avg_delay_ms", delay / n},
                               {"avg_energy", energy / n},
                               {"cum_reward", rew / n}};
    if (agent) {
      nlohmann::json learning = nlohmann::json::array();
      for (const auto& l : result.learning) learning.push_back(learning_json(l));
      summary["learning"] = learning;
      std::filesystem::create_directories(opts.out_dir / "checkpoints");
      agent->save_checkpoint(opts.out_dir / "checkpoints" / "final");
      if (cfg.policy == PolicyKind::A2cDt) {
        std::ofstream dt(opts.out_dir / "dt_buffer.jsonl");
        export_jsonl(agent->buffers().synthetic, dt);
      }
    }
    std::ofstream(opts.out_dir / "summary.json") << summary.dump(2) << '\n';
  }
  return result;
}

// --------------------------------------------------------------------- CSV

void write_metrics_csv(std::ostream& out, std::span<const EpisodeMetrics> rows) {
  out << kCsvHeader << '\n';
  for (const auto& m : rows) {
    out << m.episode << ',' << m.policy << ',' << m.seed << ',' << fmt(m.avg_delay_ms) << ','
        << fmt(m.avg_energy) << ',' << fmt(m.cum_reward) << ',' << fmt(m.norm_reward) << ','
        << fmt(m.accept_rate) << ',' << m.migrations << ',' << m.reverts << '\n';
  }
}

std::vector<EpisodeMetrics> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("metrics.csv header mismatch");
  }
  std::vector<EpisodeMetrics> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw std::runtime_error("metrics.csv row has " + std::to_string(f.size()) + " fields");
    EpisodeMetrics m;
    m.episode = std::stoi(f[0]);
    m.policy = f[1];
    m.seed = std::stoull(f[2]);
    m.avg_delay_ms = std::stod(f[3]);
    m.avg_energy = std::stod(f[4]);
    m.cum_reward = std::stod(f[5]);
    m.norm_reward = std::stod(f[6]);
    m.accept_rate = std::stod(f[7]);
    m.migrations = std::stoi(f[8]);
    m.reverts = std::stoi(f[9]);
    rows.push_back(std::move(m));
  }
  return rows;
}

// ----------------------------------------------------------------- compare

double percent_reduction(double a, double b) {
  if (b == 0.0) return a == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return (b - a) / b * 100.0;
}

nlohmann::json CompareResult::to_json() const {
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : policies) {
    ps.push_back({{"policy", p.policy},
                  {"median_energy", p.median_energy},
                  {"median_delay_ms", p.median_delay_ms},
                  {"median_cum_reward", p.median_cum_reward},
                  {"bucket_energy", nan_to_null(p.bucket_energy)},
                  {"bucket_delay_ms", nan_to_null(p.bucket_delay_ms)}});
  }
  return {{"policies", ps},
          {"bucket_edges", bucket_edges},
          {"energy_reduction_pct", energy_reduction},
          {"delay_reduction_pct", delay_reduction}};
}

CompareResult compare_policies(const ExperimentConfig& cfg, std::span<const PolicyKind> policies,
                               std::span<const std::uint64_t> seeds, const CompareOptions& opts) {
  if (seeds.empty()) throw ConfigError("compare needs at least one seed");
  if (policies.empty()) throw ConfigError("compare needs at least one policy");
  cfg.validate();
  CompareResult out;
  const int window_start = std::max(0, cfg.episodes - cfg.eval_window);

  std::vector<EpisodeMetrics> all_rows;
  std::vector<std::string> names;
  for (PolicyKind kind : policies) {
    const std::string name = to_string(kind);
    if (out.runs.contains(name)) continue;  // listed twice: same runs
    names.push_back(name);
    for (std::uint64_t seed : seeds) {
      ExperimentConfig run_cfg = cfg;
      run_cfg.policy = kind;
      run_cfg.seed = seed;
      RunOptions ro;
      if (!is_learner(kind) && opts.baselines_window_only) ro.first_episode = window_start;
      out.runs[name].push_back(run_experiment(run_cfg, ro));
      const auto& eps = out.runs[name].back().episodes;
      all_rows.insert(all_rows.end(), eps.begin(), eps.end());
    }
  }

  // Load deciles over the pooled evaluation-window steps of every run.
  std::vector<int> pooled;
  for (const auto& [name, runs] : out.runs) {
    for (const auto& r : runs) {
      for (const auto& s : r.steps) pooled.push_back(s.active);
    }
  }
  std::sort(pooled.begin(), pooled.end());
  if (!pooled.empty()) {
    for (int q = 1; q <= 10; ++q) {
      const auto rank = static_cast<std::size_t>(std::ceil(q / 10.0 * static_cast<double>(pooled.size())));
      out.bucket_edges.push_back(pooled[std::max<std::size_t>(rank, 1) - 1]);
    }
  }
  auto bucket_of = [&](int active) {
    const auto it = std::lower_bound(out.bucket_edges.begin(), out.bucket_edges.end(),
                                     static_cast<double>(active));
    return static_cast<std::size_t>(it - out.bucket_edges.begin());
  };

  for (const std::string& name : names) {
    PolicySummary ps;
    ps.policy = name;
    std::vector<double> energy, delay, reward;
    std::vector<std::vector<double>> be(out.bucket_edges.size()), bd(out.bucket_edges.size());
    for (const RunResult& r : out.runs[name]) {
      double e = 0.0, d = 0.0, w = 0.0;
      int n = 0;
      for (const auto& m : r.episodes) {
        if (m.episode < window_start) continue;
        e += m.avg_energy;
        d += m.avg_delay_ms;
        w += m.cum_reward;
        ++n;
      }
      energy.push_back(e / n);
      delay.push_back(d / n);
      reward.push_back(w / n);
      for (const auto& s : r.steps) {
        const std::size_t b = bucket_of(s.active);
        if (b >= be.size()) continue;
        be[b].push_back(s.energy);
        if (s.active > 0) bd[b].push_back(s.avg_delay_ms);
      }
    }
    ps.median_energy = median(energy);
    ps.median_delay_ms = median(delay);
    ps.median_cum_reward = median(reward);
    for (std::size_t b = 0; b < be.size(); ++b) {
      ps.bucket_energy.push_back(median(be[b]));
      ps.bucket_delay_ms.push_back(median(bd[b]));
    }
    out.policies.push_back(std::move(ps));
  }
  for (const auto& a : out.policies) {
    for (const auto& b : out.policies) {
      out.energy_reduction[a.policy][b.policy] = percent_reduction(a.median_energy, b.median_energy);
      out.delay_reduction[a.policy][b.policy] =
          percent_reduction(a.median_delay_ms, b.median_delay_ms);
    }
  }

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream csv(opts.out_dir / "metrics.csv");
    write_metrics_csv(csv, all_rows);
    nlohmann::json summary = out.to_json();
    summary["config"] = cfg;
    summary["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
    summary["eval_window"] = {window_start, cfg.episodes};
    std::ofstream(opts.out_dir / "summary.json") << summary.dump(2) << '\n';
  }
  return out;
}

// ------------------------------------------------------------------ replay

std::vector<EpisodeMetrics> replay(std::istream& events) {
  std::string policy;
  std::uint64_t seed = 0;
  std::map<int, EpisodeAccumulator> acc;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(events, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
      throw std::runtime_error("events line " + std::to_string(lineno) + ": " + err.what());
    }
    const std::string type = rec.at("type").get<std::string>();
    if (type == "run") {
      policy = rec.at("policy").get<std::string>();
      seed = rec.at("seed").get<std::uint64_t>();
      continue;
    }
    EpisodeAccumulator& a = acc[rec.at("episode").get<int>()];
    if (type == "deploy") {
      ++a.arrivals;
      if (rec.at("accepted").get<bool>()) ++a.accepted;
    } else if (type == "migrate") {
      const bool applied = rec.at("applied").get<bool>();
      a.reward += reward(applied, rec.at("lambda").get<double>());
      ++a.decisions;
      if (!applied) {
        ++a.reverts;
      } else if (rec.at("moved").get<bool>()) {
        ++a.migrations;
      }
    } else if (type == "step") {
      const int noops = rec.at("noops").get<int>();
      a.reward += noops * reward(true, 0.0);
      a.decisions += noops;
      a.delay_sum += rec.at("delay_sum").get<double>();
      a.active += rec.at("active_fgs").get<std::int64_t>();
      a.energy += rec.at("energy").get<double>();
      ++a.steps;
    }
  }
  std::vector<EpisodeMetrics> rows;
  for (const auto& [e, a] : acc) rows.push_back(a.finish(e, policy, seed));
  apply_normalization(rows);
  return rows;
}

}  // namespace edgemig
