#pragma once

#include <span>
#include <vector>

#include "edgemig/experience.hpp"
#include "edgemig/neural.hpp"
#include "edgemig/random.hpp"

namespace edgemig {

template <typename T>
nn::Matrix<T> one_hot(std::span<const int> actions, int action_count);

struct VaeConfig {
  std::vector<int> encoder_hidden{64, 32};
  int decoder_hidden = 64;
  int latent = 16;
};

struct VaeLoss {
  double total = 0.0;
  double recon_state = 0.0;
  double recon_action = 0.0;
  double kl = 0.0;
};

/// Encoder x -> (mean | logvar), decoder z -> shared relu layer -> two heads
/// whose sigmoid outputs reconstruct the state and the action one-hot. The
/// heads emit logits; reconstruction loss is binary cross-entropy on them.
template <typename T>
class TwinVae {
 public:
  using Mat = nn::Matrix<T>;
  using Vec = nn::Vector<T>;

  TwinVae() = default;
  TwinVae(int state_dim, int action_count, const VaeConfig& cfg, Rng& rng);

  int state_dim() const { return state_dim_; }
  int action_count() const { return action_count_; }
  int latent() const { return latent_; }

  /// Encoder, decoder trunk, state head, action head.
  std::vector<Vec*> parameter_blocks();
  std::vector<const Vec*> parameter_blocks() const;

  /// Batch-mean loss for columns of (states, one-hot actions) with fixed
  /// standard-normal `noise` (latent x batch). When `grads` is non-null it is
  /// resized to match parameter_blocks() and the gradients are added to it.
  VaeLoss loss(const Mat& states, const Mat& actions, const Mat& noise,
               std::vector<Vec>* grads) const;
  VaeLoss loss(const Mat& states, const Mat& actions, Rng& rng, std::vector<Vec>* grads) const;

  struct Generated {
    Mat states;               // sigmoid outputs, in (0, 1)
    std::vector<int> actions;  // argmax of the action head
  };
  /// Encode, draw z (or take the mean when sample_latent is false), decode.
  Generated generate(const Mat& states, const Mat& actions, Rng& rng,
                     bool sample_latent = true) const;

 private:
  int state_dim_ = 0;
  int action_count_ = 0;
  int latent_ = 0;
  nn::DenseNet<T> encoder_;
  nn::DenseNet<T> trunk_;
  nn::DenseNet<T> state_head_;
  nn::DenseNet<T> action_head_;
};

struct LstmTwinConfig {
  int hidden = 64;
  int fc = 64;
};

struct TwinPrediction {
  Eigen::MatrixXd states;  // clamped to [0, 1]
  Eigen::RowVectorXd rewards;
};

/// One LSTM step from a zero state on [state; one-hot action], a relu layer,
/// then linear heads for the next state and the reward.
template <typename T>
class TwinLstm {
 public:
  using Mat = nn::Matrix<T>;
  using Vec = nn::Vector<T>;

  TwinLstm() = default;
  TwinLstm(int state_dim, int action_count, const LstmTwinConfig& cfg, Rng& rng);

  int state_dim() const { return state_dim_; }
  int action_count() const { return action_count_; }

  /// LSTM cell, then head network.
  std::vector<Vec*> parameter_blocks();
  std::vector<const Vec*> parameter_blocks() const;
  nn::LstmCell<T>& cell() { return cell_; }
  nn::DenseNet<T>& head() { return head_; }
  const nn::LstmCell<T>& cell() const { return cell_; }
  const nn::DenseNet<T>& head() const { return head_; }

  TwinPrediction predict(const Mat& states, const Mat& actions) const;

  /// Batch mean of kappa1 * |S_hat - S'|^2 + kappa2 * (R_hat - r)^2, on the
  /// unclamped state head.
  double loss(const Mat& states, const Mat& actions, const Mat& next_states,
              std::span<const T> rewards, double kappa1, double kappa2,
              std::vector<Vec>* grads) const;

 private:
  Mat raw(const Mat& states, const Mat& actions) const;

  int state_dim_ = 0;
  int action_count_ = 0;
  nn::LstmCell<T> cell_;
  nn::DenseNet<T> head_;
};

struct DigitalTwinConfig {
  VaeConfig vae;
  LstmTwinConfig lstm;
  double lr = 1e-3;
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  int batch = 32;
  double clip_norm = 5.0;

  void validate() const;
};

struct TwinTrainStats {
  std::vector<double> vae_loss;
  std::vector<double> lstm_loss;
};

/// VAE + LSTM pair trained on physical transitions and used to synthesize
/// experiences. Single precision throughout.
class DigitalTwin {
 public:
  DigitalTwin(int state_dim, int action_count, const DigitalTwinConfig& cfg, Rng& rng);

  TwinVae<float>& vae() { return vae_; }
  TwinLstm<float>& lstm() { return lstm_; }
  const TwinVae<float>& vae() const { return vae_; }
  const TwinLstm<float>& lstm() const { return lstm_; }

  /// `steps` minibatch Adam steps on each model; batches are drawn uniformly
  /// with replacement from `data`. Per-step losses are returned.
  TwinTrainStats train(std::span<const Experience> data, int steps, Rng& rng);

  /// Draws `count` seeds uniformly from `physical`, regenerates a state-action
  /// pair with the VAE and completes the tuple with the LSTM's predictions.
  /// Throws GenerationError when `physical` is empty and count > 0.
  std::vector<Experience> populate(std::span<const Experience> physical, std::size_t count,
                                   Rng& rng) const;

  std::vector<nn::ParamBlock> checkpoint_blocks() const;

 private:
  DigitalTwinConfig cfg_;
  TwinVae<float> vae_;
  TwinLstm<float> lstm_;
  std::vector<nn::AdamState<float>> vae_opt_;
  std::vector<nn::AdamState<float>> lstm_opt_;
};

extern template class TwinVae<float>;
extern template class TwinVae<double>;
extern template class TwinLstm<float>;
extern template class TwinLstm<double>;

}  // namespace edgemig
