#pragma once

#include <span>
#include <vector>

#include "edgemig/experience.hpp"
#include "edgemig/neural.hpp"
#include "edgemig/random.hpp"

namespace edgemig {

struct ActorCriticConfig {
  int state_dim = 0;
  int actions = 0;
  std::vector<int> actor_hidden{256, 128, 64};
  int actor_tanh = 64;
  std::vector<int> critic_hidden{256, 128, 64};
  double gamma = 0.95;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double entropy_coef = 0.01;
  double clip_norm = 5.0;

  void validate() const;
};

enum class SelectMode { Sample, Greedy };

struct LossPair {
  double actor = 0.0;
  double critic = 0.0;
};

/// Policy network (relu trunk, one tanh layer, softmax over actions) and a
/// state-value network, each with its own Adam state.
///
/// The actor's last layer is linear; softmax is applied by probabilities() and
/// folded into the loss, which keeps the log-probability gradient exact.
template <typename T>
class ActorCritic {
 public:
  using Mat = nn::Matrix<T>;
  using Vec = nn::Vector<T>;

  ActorCritic(const ActorCriticConfig& cfg, Rng& rng);

  const ActorCriticConfig& config() const { return cfg_; }
  nn::DenseNet<T>& actor() { return actor_; }
  nn::DenseNet<T>& critic() { return critic_; }
  const nn::DenseNet<T>& actor() const { return actor_; }
  const nn::DenseNet<T>& critic() const { return critic_; }

  /// Columns are states; returns one probability column per state.
  Mat probabilities(const Mat& states) const;
  Vec probabilities(const Vec& state) const;
  int select_action(const Vec& state, Rng& rng, SelectMode mode) const;

  double value(const Vec& state) const;
  /// r + gamma * V(s_next) * (1 - terminal) - V(s).
  double advantage(const Vec& s, double r, const Vec& s_next, bool terminal) const;

  /// Advantages and critic targets recomputed with the current critic, then one
  /// clipped Adam step for each network. Throws TrainingError on a non-finite
  /// loss; throws std::invalid_argument on an empty batch.
  LossPair update(std::span<const Experience> batch);

  /// mean(-log pi(a|s) * A) - entropy_coef * mean(H(pi(.|s))). Adds the
  /// parameter gradient into `grad` when non-null.
  double actor_loss(const Mat& states, std::span<const int> actions, std::span<const T> adv,
                    Vec* grad) const;
  /// mean((V(s) - target)^2). `values`, when non-null, receives V(s).
  double critic_loss(const Mat& states, std::span<const T> targets, Vec* grad,
                     Mat* values = nullptr) const;

  /// One clipped Adam step on the actor with fixed advantages.
  double actor_step(const Mat& states, std::span<const int> actions, std::span<const T> adv);
  double critic_step(const Mat& states, std::span<const T> targets, Mat* values = nullptr);

 private:
  ActorCriticConfig cfg_;
  nn::DenseNet<T> actor_;
  nn::DenseNet<T> critic_;
  nn::AdamState<T> actor_opt_;
  nn::AdamState<T> critic_opt_;
  Vec actor_grad_;  // reused across steps
  Vec critic_grad_;
};

extern template class ActorCritic<float>;
extern template class ActorCritic<double>;

}  // namespace edgemig
