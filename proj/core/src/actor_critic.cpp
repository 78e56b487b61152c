#include "edgemig/actor_critic.hpp"

#include <cmath>
#include <stdexcept>

#include "edgemig/errors.hpp"

namespace edgemig {

void ActorCriticConfig::validate() const {
  if (state_dim < 1 || actions < 1) throw ConfigError("actor-critic dimensions must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("discount must lie in [0, 1]");
  if (!(actor_lr > 0.0 && critic_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (entropy_coef < 0.0) throw ConfigError("entropy coefficient must be non-negative");
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be positive");
}

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int extra, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  if (extra > 0) sizes.push_back(extra);
  sizes.push_back(out);
  return sizes;
}

std::vector<nn::Activation> relu_stack(std::size_t n, bool tanh_layer) {
  std::vector<nn::Activation> acts(n, nn::Activation::Relu);
  if (tanh_layer) acts.push_back(nn::Activation::Tanh);
  acts.push_back(nn::Activation::Linear);
  return acts;
}

template <typename T>
nn::Matrix<T> softmax_columns(const nn::Matrix<T>& logits) {
  nn::Matrix<T> p = logits;
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    auto col = p.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
  return p;
}

template <typename T>
nn::Matrix<T> stack_states(std::span<const Experience> batch, bool next) {
  const Eigen::Index d = batch.front().s.size();
  nn::Matrix<T> m(d, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Eigen::VectorXf& v = next ? batch[i].s_next : batch[i].s;
    if (v.size() != d) throw DimensionError("batch states differ in dimension");
    m.col(static_cast<Eigen::Index>(i)) = v.cast<T>();
  }
  return m;
}

}  // namespace

template <typename T>
ActorCritic<T>::ActorCritic(const ActorCriticConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  actor_ = nn::DenseNet<T>(with_ends(cfg_.state_dim, cfg_.actor_hidden, cfg_.actor_tanh, cfg_.actions),
                           relu_stack(cfg_.actor_hidden.size(), cfg_.actor_tanh > 0), rng);
  critic_ = nn::DenseNet<T>(with_ends(cfg_.state_dim, cfg_.critic_hidden, 0, 1),
                            relu_stack(cfg_.critic_hidden.size(), false), rng);
  actor_opt_ = nn::AdamState<T>(actor_.param_count(), cfg_.actor_lr);
  critic_opt_ = nn::AdamState<T>(critic_.param_count(), cfg_.critic_lr);
}

template <typename T>
typename ActorCritic<T>::Mat ActorCritic<T>::probabilities(const Mat& states) const {
  return softmax_columns<T>(actor_.forward(states));
}

template <typename T>
typename ActorCritic<T>::Vec ActorCritic<T>::probabilities(const Vec& state) const {
  return probabilities(Mat(state)).col(0);
}

template <typename T>
int ActorCritic<T>::select_action(const Vec& state, Rng& rng, SelectMode mode) const {
  const Vec p = probabilities(state);
  if (mode == SelectMode::Greedy) {
    Eigen::Index best = 0;
    p.maxCoeff(&best);  // first maximum on ties
    return static_cast<int>(best);
  }
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += static_cast<double>(p[i]);
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left the cumulative sum just short of 1: take the last positive entry.
  for (Eigen::Index i = p.size() - 1; i >= 0; --i) {
    if (p[i] > T(0)) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

template <typename T>
double ActorCritic<T>::value(const Vec& state) const {
  return static_cast<double>(critic_.forward(Mat(state))(0, 0));
}

template <typename T>
double ActorCritic<T>::advantage(const Vec& s, double r, const Vec& s_next, bool terminal) const {
  const double next = terminal ? 0.0 : value(s_next);
  return r + cfg_.gamma * next - value(s);
}

template <typename T>
double ActorCritic<T>::actor_loss(const Mat& states, std::span<const int> actions,
                                  std::span<const T> adv, Vec* grad) const {
  const Eigen::Index b = states.cols();
  if (b == 0 || static_cast<std::size_t>(b) != actions.size() || actions.size() != adv.size()) {
    throw std::invalid_argument("actor batch sizes disagree");
  }
  typename nn::DenseNet<T>::Cache cache;
  const Mat logits = actor_.forward(states, cache);
  const Mat p = softmax_columns<T>(logits);
  const T beta = static_cast<T>(cfg_.entropy_coef);
  const T inv_b = T(1) / static_cast<T>(b);

  Mat dlogits(p.rows(), b);
  double loss = 0.0;
  for (Eigen::Index c = 0; c < b; ++c) {
    const int a = actions[static_cast<std::size_t>(c)];
    if (a < 0 || a >= p.rows()) throw std::out_of_range("action index out of range");
    const T A = adv[static_cast<std::size_t>(c)];
    // log-softmax computed from logits for stability.
    const T zmax = logits.col(c).maxCoeff();
    const T lse = zmax + std::log((logits.col(c).array() - zmax).exp().sum());
    const auto logp = (logits.col(c).array() - lse).eval();
    const T entropy = -(p.col(c).array() * logp).sum();
    loss += static_cast<double>(-logp[a] * A - beta * entropy);

    auto d = dlogits.col(c);
    d = (A * p.col(c).array() + beta * p.col(c).array() * (logp + entropy)).matrix();
    d[a] -= A;
    d *= inv_b;
  }
  loss /= static_cast<double>(b);
  if (grad) actor_.backward(cache, dlogits, *grad, false);
  return loss;
}

template <typename T>
double ActorCritic<T>::critic_loss(const Mat& states, std::span<const T> targets, Vec* grad,
                                   Mat* values) const {
  const Eigen::Index b = states.cols();
  if (b == 0 || static_cast<std::size_t>(b) != targets.size()) {
    throw std::invalid_argument("critic batch sizes disagree");
  }
  typename nn::DenseNet<T>::Cache cache;
  const Mat v = critic_.forward(states, cache);
  const Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> y(targets.data(), b);
  const Mat diff = v - y;
  const double loss = static_cast<double>(diff.squaredNorm()) / static_cast<double>(b);
  if (grad) {
    const Mat upstream = diff * (T(2) / static_cast<T>(b));
    critic_.backward(cache, upstream, *grad, false);
  }
  if (values) *values = v;
  return loss;
}

template <typename T>
double ActorCritic<T>::actor_step(const Mat& states, std::span<const int> actions,
                                  std::span<const T> adv) {
  Vec& grad = actor_grad_;
  grad.setZero(actor_.param_count());
  const double loss = actor_loss(states, actions, adv, &grad);
  if (!std::isfinite(loss)) throw TrainingError("non-finite actor loss");
  Vec* blocks[] = {&grad};
  nn::clip_grad_norm<T>(blocks, cfg_.clip_norm);
  nn::adam_update(actor_.params(), grad, actor_opt_);
  return loss;
}

template <typename T>
double ActorCritic<T>::critic_step(const Mat& states, std::span<const T> targets, Mat* values) {
  Vec& grad = critic_grad_;
  grad.setZero(critic_.param_count());
  const double loss = critic_loss(states, targets, &grad, values);
  if (!std::isfinite(loss)) throw TrainingError("non-finite critic loss");
  Vec* blocks[] = {&grad};
  nn::clip_grad_norm<T>(blocks, cfg_.clip_norm);
  nn::adam_update(critic_.params(), grad, critic_opt_);
  return loss;
}

template <typename T>
LossPair ActorCritic<T>::update(std::span<const Experience> batch) {
  if (batch.empty()) throw std::invalid_argument("update needs a non-empty batch");
  const Mat s = stack_states<T>(batch, false);
  const Mat s_next = stack_states<T>(batch, true);
  const Mat v_next = critic_.forward(s_next);

  std::vector<int> actions(batch.size());
  std::vector<T> targets(batch.size());
  std::vector<T> adv(batch.size());
  const T gamma = static_cast<T>(cfg_.gamma);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    const T boot = batch[i].terminal ? T(0) : v_next(0, c);
    actions[i] = batch[i].a;
    targets[i] = static_cast<T>(batch[i].r) + gamma * boot;
  }
  LossPair out;
  Mat v;  // V(s) before the critic step
  out.critic = critic_step(s, targets, &v);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    adv[i] = targets[i] - v(0, static_cast<Eigen::Index>(i));
  }
  out.actor = actor_step(s, actions, adv);
  return out;
}

template class ActorCritic<float>;
template class ActorCritic<double>;

}  // namespace edgemig
