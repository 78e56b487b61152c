#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "edgemig/random.hpp"

namespace edgemig::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class Activation : std::uint8_t { Relu, Tanh, Sigmoid, Linear, Softmax };

inline constexpr double kLogvarMin = -20.0;
inline constexpr double kLogvarMax = 5.0;

/// Fully connected network. Samples are columns of the input matrix.
///
/// All parameters live in one flat vector, laid out layer by layer as
/// [W (out x in, column-major), b (out)], so optimizers and checkpoints treat
/// the network as a single vector. Weights start uniform in +-1/sqrt(fan_in).
template <typename T>
class DenseNet {
 public:
  /// activations[0] is the input; activations[i + 1] the output of layer i.
  struct Cache {
    std::vector<Matrix<T>> activations;
  };

  DenseNet() = default;
  DenseNet(std::vector<int> sizes, std::vector<Activation> activations, Rng& rng);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int layer_count() const { return static_cast<int>(acts_.size()); }
  Eigen::Index param_count() const { return params_.size(); }
  std::span<const int> sizes() const { return sizes_; }
  Activation activation(int layer) const { return acts_[static_cast<std::size_t>(layer)]; }

  Vector<T>& params() { return params_; }
  const Vector<T>& params() const { return params_; }

  Eigen::Map<Matrix<T>> weight(int layer);
  Eigen::Map<const Matrix<T>> weight(int layer) const;
  Eigen::Map<Vector<T>> bias(int layer);
  Eigen::Map<const Vector<T>> bias(int layer) const;

  Matrix<T> forward(const Matrix<T>& x) const;
  Matrix<T> forward(const Matrix<T>& x, Cache& cache) const;

  /// Adds dL/dparams into `grad` and returns dL/dx (empty when
  /// `need_input_grad` is false). Throws std::logic_error without a cache.
  Matrix<T> backward(const Cache& cache, const Matrix<T>& upstream, Vector<T>& grad,
                     bool need_input_grad = true) const;

 private:
  std::vector<int> sizes_;
  std::vector<Activation> acts_;
  std::vector<Eigen::Index> offsets_;
  Vector<T> params_;
};

/// Gated recurrent cell, gates ordered (input, forget, candidate, output).
/// Parameters: [W (4H x (X + H)), b (4H)]. States are passed in and returned,
/// never kept inside the cell.
template <typename T>
class LstmCell {
 public:
  struct State {
    Matrix<T> h;
    Matrix<T> c;
    static State zeros(int hidden, Eigen::Index batch) {
      return {Matrix<T>::Zero(hidden, batch), Matrix<T>::Zero(hidden, batch)};
    }
  };
  struct Cache {
    Matrix<T> x, h_prev, c_prev, i, f, g, o, c, tanh_c;
  };
  struct InputGrads {
    Matrix<T> dx, dh_prev, dc_prev;
  };

  LstmCell() = default;
  LstmCell(int input_size, int hidden_size, Rng& rng);

  int input_size() const { return input_; }
  int hidden_size() const { return hidden_; }
  Eigen::Index param_count() const { return params_.size(); }
  Vector<T>& params() { return params_; }
  const Vector<T>& params() const { return params_; }

  State step(const Matrix<T>& x, const State& prev) const;
  State step(const Matrix<T>& x, const State& prev, Cache& cache) const;

  /// dh, dc: gradients w.r.t. the returned h and c.
  InputGrads backward(const Cache& cache, const Matrix<T>& dh, const Matrix<T>& dc,
                      Vector<T>& grad) const;

 private:
  int input_ = 0;
  int hidden_ = 0;
  Vector<T> params_;
};

template <typename T>
struct Reparameterized {
  Matrix<T> sample;
  Matrix<T> noise;
  Matrix<T> logvar;  // after clamping
};

/// mean + exp(logvar / 2) * noise, logvar clamped to [kLogvarMin, kLogvarMax].
template <typename T>
Reparameterized<T> gaussian_reparam(const Matrix<T>& mean, const Matrix<T>& logvar, Rng& rng);
template <typename T>
Reparameterized<T> gaussian_reparam(const Matrix<T>& mean, const Matrix<T>& logvar,
                                    const Matrix<T>& noise);

template <typename T>
struct AdamState {
  Vector<T> m;
  Vector<T> v;
  std::int64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(Eigen::Index n, double learning_rate)
      : m(Vector<T>::Zero(n)), v(Vector<T>::Zero(n)), lr(learning_rate) {}
};

/// Bias-corrected Adam step. Throws TrainingError on a non-finite gradient.
template <typename T>
void adam_update(Vector<T>& params, const Vector<T>& grads, AdamState<T>& opt);

/// Rescales all gradient blocks jointly so their global L2 norm is at most
/// max_norm. Returns the norm before clipping.
template <typename T>
double clip_grad_norm(std::span<Vector<T>* const> grads, double max_norm);

// Checkpoints: one flat little-endian float64 file plus a JSON manifest
// naming each block, its shape and its offset.

struct ParamBlock {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;
};

template <typename T>
ParamBlock to_block(std::string name, const DenseNet<T>& net);
template <typename T>
ParamBlock to_block(std::string name, const LstmCell<T>& cell);
template <typename T>
void from_block(const ParamBlock& block, DenseNet<T>& net);
template <typename T>
void from_block(const ParamBlock& block, LstmCell<T>& cell);

void save_checkpoint(const std::filesystem::path& stem, std::span<const ParamBlock> blocks);
std::vector<ParamBlock> load_checkpoint(const std::filesystem::path& stem);

}  // namespace edgemig::nn
