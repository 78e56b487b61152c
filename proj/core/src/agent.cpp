#include "edgemig/agent.hpp"

#include <string>

#include "edgemig/errors.hpp"

namespace edgemig {

void AgentConfig::validate() const {
  twin.validate();
  if (!(kappa_balance >= 0.0 && kappa_balance <= 1.0)) {
    throw ConfigError("balance parameter must lie in [0, 1]");
  }
  if (batch_physical == 0) throw ConfigError("physical batch size must be positive");
  if (twin_steps < 0) throw ConfigError("twin training steps must be non-negative");
}

namespace {

ActorCriticConfig sized(ActorCriticConfig ac, int servers, int chain_length) {
  ac.state_dim = state_dimension(servers, chain_length);
  ac.actions = action_count(servers, chain_length);
  return ac;
}

Rng seeded(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

}  // namespace

A2cAgent::A2cAgent(const AgentConfig& cfg, int servers, int chain_length, std::uint64_t seed)
    : cfg_(cfg),
      servers_(servers),
      chain_length_(chain_length),
      ac_([&] {
        Rng init = seeded(seed, 0);
        return ActorCritic<float>(sized(cfg.ac, servers, chain_length), init);
      }()),
      buffers_(cfg.buffers),
      act_rng_(seeded(seed, 1)),
      sample_rng_(seeded(seed, 2)),
      twin_rng_(seeded(seed, 3)) {
  cfg_.validate();
  cfg_.ac = ac_.config();
  if (cfg_.use_twin) {
    Rng init = seeded(seed, 4);
    twin_.emplace(cfg_.ac.state_dim, cfg_.ac.actions, cfg_.twin, init);
  }
}

MigrationCommand A2cAgent::decide(const World& world, int fg_id, TimeStep /*t*/) {
  const VnfFg& fg = world.fg(fg_id);
  if (fg.chain_length() != chain_length_ || world.topology().server_count() != servers_) {
    throw DimensionError("agent was built for a different chain length or server count");
  }
  pending_.fg_id = fg_id;
  pending_.s = encode_state(world.state(), world.topology(), fg, world.config().perf, cfg_.encoding)
                   .cast<float>();
  pending_.a = ac_.select_action(pending_.s, act_rng_,
                                 training_ ? SelectMode::Sample : SelectMode::Greedy);
  return decode_action(pending_.a, fg, servers_);
}

void A2cAgent::observe(const World& world, int fg_id, const MigrationCommand& /*cmd*/,
                       const MigrationOutcome& outcome, TimeStep t) {
  if (pending_.fg_id != fg_id) throw std::logic_error("observe does not match the last decision");
  pending_.fg_id = -1;
  if (!training_) return;
  const VnfFg& fg = world.fg(fg_id);
  Experience e;
  e.s = std::move(pending_.s);
  e.a = pending_.a;
  e.r = reward(outcome);
  e.s_next =
      encode_state(world.state(), world.topology(), fg, world.config().perf, cfg_.encoding).cast<float>();
  e.terminal = t + 1 >= fg.departure();
  e.origin = outcome.applied ? Origin::PhysicalSuccess : Origin::PhysicalFail;
  buffers_.push(std::move(e));
  ++episode_transitions_;
}

void A2cAgent::end_step(const World& /*world*/, TimeStep /*t*/) {
  if (!training_ || buffers_.physical_size() < cfg_.warmup) return;
  std::vector<Experience> batch =
      sample_physical(buffers_, cfg_.batch_physical, cfg_.kappa_balance, sample_rng_);
  if (cfg_.use_twin) {
    std::vector<Experience> synth = sample_dt(buffers_.synthetic, cfg_.batch_dt, sample_rng_);
    batch.insert(batch.end(), std::make_move_iterator(synth.begin()),
                 std::make_move_iterator(synth.end()));
  }
  const LossPair losses = ac_.update(batch);
  ++episode_.updates;
  episode_.actor_loss += losses.actor;
  episode_.critic_loss += losses.critic;
}

void A2cAgent::begin_episode() {
  episode_ = {};
  episode_transitions_ = 0;
  pending_ = {};
}

EpisodeLearning A2cAgent::end_episode() {
  EpisodeLearning out = episode_;
  if (out.updates > 0) {
    out.actor_loss /= out.updates;
    out.critic_loss /= out.updates;
  }
  if (training_ && twin_ && buffers_.physical_size() > 0) {
    std::vector<Experience> physical;
    physical.reserve(buffers_.physical_size());
    for (std::size_t i = 0; i < buffers_.success.size(); ++i) physical.push_back(buffers_.success[i]);
    for (std::size_t i = 0; i < buffers_.fail.size(); ++i) physical.push_back(buffers_.fail[i]);
    const TwinTrainStats stats = twin_->train(physical, cfg_.twin_steps, twin_rng_);
    if (!stats.vae_loss.empty()) {
      out.twin_vae_loss = stats.vae_loss.back();
      out.twin_lstm_loss = stats.lstm_loss.back();
    }
    for (Experience& e : twin_->populate(physical, episode_transitions_, twin_rng_)) {
      buffers_.push(std::move(e));
    }
    out.generated = episode_transitions_;
  }
  episode_ = {};
  episode_transitions_ = 0;
  return out;
}

void A2cAgent::save_checkpoint(const std::filesystem::path& stem) const {
  std::vector<nn::ParamBlock> blocks{nn::to_block("actor", ac_.actor()),
                                     nn::to_block("critic", ac_.critic())};
  if (twin_) {
    for (auto& b : twin_->checkpoint_blocks()) blocks.push_back(std::move(b));
  }
  nn::save_checkpoint(stem, blocks);
}

void A2cAgent::load_checkpoint(const std::filesystem::path& stem) {
  const auto blocks = nn::load_checkpoint(stem);
  bool actor = false;
  bool critic = false;
  for (const auto& b : blocks) {
    if (b.name == "actor") {
      nn::from_block(b, ac_.actor());
      actor = true;
    } else if (b.name == "critic") {
      nn::from_block(b, ac_.critic());
      critic = true;
    }
  }
  if (!actor || !critic) throw std::runtime_error("checkpoint lacks actor or critic parameters");
}

}  // namespace edgemig
