#include "edgemig/digital_twin.hpp"

#include <algorithm>
#include <cmath>

#include "edgemig/errors.hpp"

namespace edgemig {

template <typename T>
nn::Matrix<T> one_hot(std::span<const int> actions, int action_count) {
  nn::Matrix<T> m = nn::Matrix<T>::Zero(action_count, static_cast<Eigen::Index>(actions.size()));
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] < 0 || actions[i] >= action_count) {
      throw std::out_of_range("action index out of range");
    }
    m(actions[i], static_cast<Eigen::Index>(i)) = T(1);
  }
  return m;
}

namespace {

template <typename T>
nn::Matrix<T> stacked(const nn::Matrix<T>& top, const nn::Matrix<T>& bottom) {
  if (top.cols() != bottom.cols()) throw DimensionError("state and action batches differ in size");
  nn::Matrix<T> x(top.rows() + bottom.rows(), top.cols());
  x << top, bottom;
  return x;
}

template <typename T>
nn::Matrix<T> std_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  nn::Matrix<T> m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = static_cast<T>(normal(rng));
  }
  return m;
}

// Sum over entries of softplus(z) - x z, the BCE of sigmoid(z) against x.
template <typename T>
double bce_with_logits(const nn::Matrix<T>& z, const nn::Matrix<T>& x) {
  const auto sp = z.array().max(T(0)) + (-z.array().abs()).exp().log1p();
  return static_cast<double>((sp - x.array() * z.array()).sum());
}

template <typename T>
nn::Matrix<T> sigmoid(const nn::Matrix<T>& z) {
  return (T(1) / (T(1) + (-z.array()).exp())).matrix();
}

template <typename T>
void resize_grads(std::vector<nn::Vector<T>>& grads, const std::vector<const nn::Vector<T>*>& blocks) {
  if (grads.size() != blocks.size()) grads.resize(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (grads[i].size() != blocks[i]->size()) grads[i] = nn::Vector<T>::Zero(blocks[i]->size());
  }
}

}  // namespace

// ------------------------------------------------------------------ TwinVae

template <typename T>
TwinVae<T>::TwinVae(int state_dim, int action_count, const VaeConfig& cfg, Rng& rng)
    : state_dim_(state_dim), action_count_(action_count), latent_(cfg.latent) {
  if (state_dim < 1 || action_count < 1 || cfg.latent < 1 || cfg.decoder_hidden < 1) {
    throw DimensionError("VAE dimensions must be positive");
  }
  std::vector<int> enc{state_dim + action_count};
  enc.insert(enc.end(), cfg.encoder_hidden.begin(), cfg.encoder_hidden.end());
  enc.push_back(2 * cfg.latent);
  std::vector<nn::Activation> enc_acts(cfg.encoder_hidden.size(), nn::Activation::Relu);
  enc_acts.push_back(nn::Activation::Linear);
  encoder_ = nn::DenseNet<T>(enc, enc_acts, rng);
  trunk_ = nn::DenseNet<T>({cfg.latent, cfg.decoder_hidden}, {nn::Activation::Relu}, rng);
  state_head_ = nn::DenseNet<T>({cfg.decoder_hidden, state_dim}, {nn::Activation::Linear}, rng);
  action_head_ = nn::DenseNet<T>({cfg.decoder_hidden, action_count}, {nn::Activation::Linear}, rng);
}

template <typename T>
std::vector<typename TwinVae<T>::Vec*> TwinVae<T>::parameter_blocks() {
  return {&encoder_.params(), &trunk_.params(), &state_head_.params(), &action_head_.params()};
}

template <typename T>
std::vector<const typename TwinVae<T>::Vec*> TwinVae<T>::parameter_blocks() const {
  return {&encoder_.params(), &trunk_.params(), &state_head_.params(), &action_head_.params()};
}

template <typename T>
VaeLoss TwinVae<T>::loss(const Mat& states, const Mat& actions, Rng& rng,
                         std::vector<Vec>* grads) const {
  return loss(states, actions, std_normal<T>(latent_, states.cols(), rng), grads);
}

template <typename T>
VaeLoss TwinVae<T>::loss(const Mat& states, const Mat& actions, const Mat& noise,
                         std::vector<Vec>* grads) const {
  const Eigen::Index b = states.cols();
  if (b == 0) throw std::invalid_argument("VAE loss needs a non-empty batch");
  if (states.rows() != state_dim_ || actions.rows() != action_count_) {
    throw DimensionError("VAE input dimension mismatch");
  }
  typename nn::DenseNet<T>::Cache enc_cache, trunk_cache, s_cache, a_cache;
  const Mat h = encoder_.forward(stacked(states, actions), enc_cache);
  const Mat mean = h.topRows(latent_);
  const Mat raw_logvar = h.bottomRows(latent_);
  const nn::Reparameterized<T> rep = nn::gaussian_reparam<T>(mean, raw_logvar, noise);
  const Mat d = trunk_.forward(rep.sample, trunk_cache);
  const Mat zs = state_head_.forward(d, s_cache);
  const Mat za = action_head_.forward(d, a_cache);

  const double inv_b = 1.0 / static_cast<double>(b);
  VaeLoss out;
  out.recon_state = bce_with_logits<T>(zs, states) * inv_b;
  out.recon_action = bce_with_logits<T>(za, actions) * inv_b;
  const auto& lv = rep.logvar.array();
  out.kl = -0.5 * static_cast<double>((T(1) + lv - mean.array().square() - lv.exp()).sum()) * inv_b;
  out.total = out.recon_state + out.recon_action + out.kl;

  if (grads) {
    resize_grads<T>(*grads, parameter_blocks());
    const T tb = static_cast<T>(inv_b);
    const Mat dzs = (sigmoid<T>(zs) - states) * tb;
    const Mat dza = (sigmoid<T>(za) - actions) * tb;
    Mat dd = state_head_.backward(s_cache, dzs, (*grads)[2]);
    dd += action_head_.backward(a_cache, dza, (*grads)[3]);
    const Mat dz = trunk_.backward(trunk_cache, dd, (*grads)[1]);

    Mat dh(2 * latent_, b);
    dh.topRows(latent_) = dz + mean * tb;
    const auto half_std = (lv * T(0.5)).exp() * T(0.5);
    Mat dlv = (dz.array() * rep.noise.array() * half_std + T(0.5) * (lv.exp() - T(1)) * tb).matrix();
    // Clamped entries pass no gradient back to the encoder.
    dlv = (raw_logvar.array() < T(nn::kLogvarMin) || raw_logvar.array() > T(nn::kLogvarMax))
              .select(Mat::Zero(latent_, b), dlv);
    dh.bottomRows(latent_) = dlv;
    encoder_.backward(enc_cache, dh, (*grads)[0], false);
  }
  return out;
}

template <typename T>
typename TwinVae<T>::Generated TwinVae<T>::generate(const Mat& states, const Mat& actions, Rng& rng,
                                                    bool sample_latent) const {
  const Mat h = encoder_.forward(stacked(states, actions));
  const Mat mean = h.topRows(latent_);
  Mat z = mean;
  if (sample_latent) z = nn::gaussian_reparam<T>(mean, h.bottomRows(latent_), rng).sample;
  const Mat d = trunk_.forward(z);
  Generated out;
  out.states = sigmoid<T>(state_head_.forward(d));
  const Mat za = action_head_.forward(d);
  out.actions.resize(static_cast<std::size_t>(za.cols()));
  for (Eigen::Index c = 0; c < za.cols(); ++c) {
    Eigen::Index best = 0;
    za.col(c).maxCoeff(&best);
    out.actions[static_cast<std::size_t>(c)] = static_cast<int>(best);
  }
  return out;
}

// ----------------------------------------------------------------- TwinLstm

template <typename T>
TwinLstm<T>::TwinLstm(int state_dim, int action_count, const LstmTwinConfig& cfg, Rng& rng)
    : state_dim_(state_dim), action_count_(action_count) {
  if (state_dim < 1 || action_count < 1) throw DimensionError("LSTM twin dimensions must be positive");
  cell_ = nn::LstmCell<T>(state_dim + action_count, cfg.hidden, rng);
  head_ = nn::DenseNet<T>({cfg.hidden, cfg.fc, state_dim + 1},
                          {nn::Activation::Relu, nn::Activation::Linear}, rng);
}

template <typename T>
std::vector<typename TwinLstm<T>::Vec*> TwinLstm<T>::parameter_blocks() {
  return {&cell_.params(), &head_.params()};
}

template <typename T>
std::vector<const typename TwinLstm<T>::Vec*> TwinLstm<T>::parameter_blocks() const {
  return {&cell_.params(), &head_.params()};
}

template <typename T>
typename TwinLstm<T>::Mat TwinLstm<T>::raw(const Mat& states, const Mat& actions) const {
  const Mat x = stacked(states, actions);
  const auto st = cell_.step(x, nn::LstmCell<T>::State::zeros(cell_.hidden_size(), x.cols()));
  return head_.forward(st.h);
}

template <typename T>
TwinPrediction TwinLstm<T>::predict(const Mat& states, const Mat& actions) const {
  if (states.rows() != state_dim_ || actions.rows() != action_count_) {
    throw DimensionError("LSTM twin input dimension mismatch");
  }
  const Mat y = raw(states, actions);
  TwinPrediction out;
  out.states = y.topRows(state_dim_).template cast<double>().cwiseMax(0.0).cwiseMin(1.0);
  out.rewards = y.row(state_dim_).template cast<double>();
  return out;
}

template <typename T>
double TwinLstm<T>::loss(const Mat& states, const Mat& actions, const Mat& next_states,
                         std::span<const T> rewards, double kappa1, double kappa2,
                         std::vector<Vec>* grads) const {
  const Eigen::Index b = states.cols();
  if (b == 0) throw std::invalid_argument("LSTM loss needs a non-empty batch");
  if (states.rows() != state_dim_ || actions.rows() != action_count_ ||
      next_states.rows() != state_dim_ || next_states.cols() != b ||
      rewards.size() != static_cast<std::size_t>(b)) {
    throw DimensionError("LSTM twin loss dimension mismatch");
  }
  const Mat x = stacked(states, actions);
  typename nn::LstmCell<T>::Cache cell_cache;
  typename nn::DenseNet<T>::Cache head_cache;
  const auto st = cell_.step(x, nn::LstmCell<T>::State::zeros(cell_.hidden_size(), b), cell_cache);
  const Mat y = head_.forward(st.h, head_cache);

  const Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> r(rewards.data(), b);
  const Mat ds = y.topRows(state_dim_) - next_states;
  const Mat dr = y.row(state_dim_) - r;
  const double inv_b = 1.0 / static_cast<double>(b);
  const double value = (kappa1 * static_cast<double>(ds.squaredNorm()) +
                        kappa2 * static_cast<double>(dr.squaredNorm())) *
                       inv_b;
  if (grads) {
    resize_grads<T>(*grads, parameter_blocks());
    Mat dy(state_dim_ + 1, b);
    dy.topRows(state_dim_) = ds * static_cast<T>(2.0 * kappa1 * inv_b);
    dy.row(state_dim_) = dr * static_cast<T>(2.0 * kappa2 * inv_b);
    const Mat dh = head_.backward(head_cache, dy, (*grads)[1]);
    cell_.backward(cell_cache, dh, Mat::Zero(cell_.hidden_size(), b), (*grads)[0]);
  }
  return value;
}

// -------------------------------------------------------------- DigitalTwin

void DigitalTwinConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("twin learning rate must be positive");
  if (!(kappa1 >= 0.0 && kappa1 <= 1.0 && kappa2 >= 0.0 && kappa2 <= 1.0)) {
    throw ConfigError("twin loss weights must lie in [0, 1]");
  }
  if (batch < 1) throw ConfigError("twin batch size must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be positive");
}

DigitalTwin::DigitalTwin(int state_dim, int action_count, const DigitalTwinConfig& cfg, Rng& rng)
    : cfg_(cfg),
      vae_(state_dim, action_count, cfg.vae, rng),
      lstm_(state_dim, action_count, cfg.lstm, rng) {
  cfg_.validate();
  for (const auto* p : std::as_const(vae_).parameter_blocks()) vae_opt_.emplace_back(p->size(), cfg_.lr);
  for (const auto* p : std::as_const(lstm_).parameter_blocks()) lstm_opt_.emplace_back(p->size(), cfg_.lr);
}

namespace {

struct Batch {
  Eigen::MatrixXf s, a, s_next;
  std::vector<int> actions;
  std::vector<float> r;
};

Batch make_batch(std::span<const Experience> data, std::span<const std::size_t> idx, int actions) {
  Batch b;
  const Eigen::Index d = data.front().s.size();
  const auto n = static_cast<Eigen::Index>(idx.size());
  b.s.resize(d, n);
  b.s_next.resize(d, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Experience& e = data[idx[static_cast<std::size_t>(c)]];
    if (e.s.size() != d) throw DimensionError("experiences differ in state dimension");
    b.s.col(c) = e.s;
    b.s_next.col(c) = e.s_next;
    b.actions.push_back(e.a);
    b.r.push_back(static_cast<float>(e.r));
  }
  b.a = one_hot<float>(b.actions, actions);
  return b;
}

void apply(std::vector<nn::Vector<float>*> params, std::vector<nn::Vector<float>>& grads,
           std::vector<nn::AdamState<float>>& opt, double clip) {
  std::vector<nn::Vector<float>*> g;
  for (auto& v : grads) g.push_back(&v);
  nn::clip_grad_norm<float>(g, clip);
  for (std::size_t i = 0; i < params.size(); ++i) nn::adam_update(*params[i], grads[i], opt[i]);
}

}  // namespace

TwinTrainStats DigitalTwin::train(std::span<const Experience> data, int steps, Rng& rng) {
  TwinTrainStats stats;
  if (data.empty() || steps <= 0) return stats;
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<std::size_t> idx(static_cast<std::size_t>(cfg_.batch));
  for (int step = 0; step < steps; ++step) {
    for (auto& i : idx) i = pick(rng);
    const Batch b = make_batch(data, idx, vae_.action_count());

    std::vector<nn::Vector<float>> vg;
    const VaeLoss vl = vae_.loss(b.s, b.a, rng, &vg);
    if (!std::isfinite(vl.total)) throw TrainingError("non-finite VAE loss");
    apply(vae_.parameter_blocks(), vg, vae_opt_, cfg_.clip_norm);

    std::vector<nn::Vector<float>> lg;
    const double ll = lstm_.loss(b.s, b.a, b.s_next, b.r, cfg_.kappa1, cfg_.kappa2, &lg);
    if (!std::isfinite(ll)) throw TrainingError("non-finite LSTM loss");
    apply(lstm_.parameter_blocks(), lg, lstm_opt_, cfg_.clip_norm);

    stats.vae_loss.push_back(vl.total);
    stats.lstm_loss.push_back(ll);
  }
  return stats;
}

std::vector<Experience> DigitalTwin::populate(std::span<const Experience> physical,
                                              std::size_t count, Rng& rng) const {
  std::vector<Experience> out;
  if (count == 0) return out;
  if (physical.empty()) throw GenerationError("no physical experiences to seed generation");
  std::uniform_int_distribution<std::size_t> pick(0, physical.size() - 1);
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = pick(rng);
  const Batch seeds = make_batch(physical, idx, vae_.action_count());

  const auto gen = vae_.generate(seeds.s, seeds.a, rng);
  const TwinPrediction pred = lstm_.predict(gen.states, one_hot<float>(gen.actions, vae_.action_count()));
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    Experience e;
    e.s = gen.states.col(c);
    e.a = gen.actions[i];
    e.r = pred.rewards[c];
    e.s_next = pred.states.col(c).cast<float>();
    e.terminal = false;
    e.origin = Origin::Synthetic;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<nn::ParamBlock> DigitalTwin::checkpoint_blocks() const {
  const auto vb = vae_.parameter_blocks();
  const char* vae_names[] = {"vae.encoder", "vae.trunk", "vae.state_head", "vae.action_head"};
  std::vector<nn::ParamBlock> out;
  for (std::size_t i = 0; i < vb.size(); ++i) {
    out.push_back({vae_names[i], {static_cast<int>(vb[i]->size())},
                   std::vector<double>(vb[i]->data(), vb[i]->data() + vb[i]->size())});
  }
  out.push_back(nn::to_block("lstm.cell", lstm_.cell()));
  out.push_back(nn::to_block("lstm.head", lstm_.head()));
  return out;
}

template nn::Matrix<float> one_hot<float>(std::span<const int>, int);
template nn::Matrix<double> one_hot<double>(std::span<const int>, int);
template class TwinVae<float>;
template class TwinVae<double>;
template class TwinLstm<float>;
template class TwinLstm<double>;

}  // namespace edgemig
