#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "edgemig/actor_critic.hpp"
#include "edgemig/digital_twin.hpp"
#include "edgemig/experience.hpp"
#include "edgemig/mdp.hpp"
#include "edgemig/orchestrator.hpp"

namespace edgemig {

struct AgentConfig {
  ActorCriticConfig ac;  // state_dim and actions are filled in by the agent
  DigitalTwinConfig twin;
  BufferCapacities buffers;
  EncodingConfig encoding;
  bool use_twin = true;
  double kappa_balance = 0.35;
  std::size_t batch_physical = 32;
  std::size_t batch_dt = 32;
  std::size_t warmup = 500;
  int twin_steps = 200;

  void validate() const;
};

struct EpisodeLearning {
  int updates = 0;
  double actor_loss = 0.0;   // mean over the episode's updates
  double critic_loss = 0.0;
  std::size_t generated = 0;
  double twin_vae_loss = 0.0;  // last training step
  double twin_lstm_loss = 0.0;
};

/// Actor-critic migration policy. Every decision becomes one physical
/// experience; once `warmup` of them exist, each step ends with one update on
/// a physical mini-batch plus, with the twin enabled, a synthetic one. At the
/// end of each episode the twin is retrained and refills the synthetic buffer.
class A2cAgent final : public MigrationPolicy {
 public:
  A2cAgent(const AgentConfig& cfg, int servers, int chain_length, std::uint64_t seed);

  MigrationCommand decide(const World& world, int fg_id, TimeStep t) override;
  void observe(const World& world, int fg_id, const MigrationCommand& cmd,
               const MigrationOutcome& outcome, TimeStep t) override;
  void end_step(const World& world, TimeStep t) override;

  void begin_episode();
  EpisodeLearning end_episode();

  /// Greedy action selection and no learning when false.
  void set_training(bool training) { training_ = training; }

  const AgentConfig& config() const { return cfg_; }
  const ExperienceBuffers& buffers() const { return buffers_; }
  ActorCritic<float>& actor_critic() { return ac_; }
  const DigitalTwin* twin() const { return twin_ ? &*twin_ : nullptr; }

  void save_checkpoint(const std::filesystem::path& stem) const;
  void load_checkpoint(const std::filesystem::path& stem);

 private:
  AgentConfig cfg_;
  int servers_;
  int chain_length_;
  ActorCritic<float> ac_;
  std::optional<DigitalTwin> twin_;
  ExperienceBuffers buffers_;
  Rng act_rng_;
  Rng sample_rng_;
  Rng twin_rng_;
  bool training_ = true;

  struct Pending {
    int fg_id = -1;
    Eigen::VectorXf s;
    int a = 0;
  };
  Pending pending_;
  std::size_t episode_transitions_ = 0;
  EpisodeLearning episode_;
};

}  // namespace edgemig
