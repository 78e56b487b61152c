#include "edgemig/neural.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "edgemig/errors.hpp"

namespace edgemig::nn {

namespace {

template <typename T>
void activate(Matrix<T>& z, Activation act) {
  switch (act) {
    case Activation::Relu:
      z = z.cwiseMax(T(0));
      break;
    case Activation::Tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::Sigmoid:
      z = (T(1) / (T(1) + (-z.array()).exp())).matrix();
      break;
    case Activation::Linear:
      break;
    case Activation::Softmax:
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        auto col = z.col(c);
        col.array() -= col.maxCoeff();
        col = col.array().exp().matrix();
        col /= col.sum();
      }
      break;
  }
}

// Turns dL/dy into dL/dz in place, given the layer's activated output y.
template <typename T>
void activation_backward(Matrix<T>& delta, const Matrix<T>& y, Activation act) {
  switch (act) {
    case Activation::Relu:
      delta.array() *= (y.array() > T(0)).template cast<T>();
      break;
    case Activation::Tanh:
      delta.array() *= T(1) - y.array().square();
      break;
    case Activation::Sigmoid:
      delta.array() *= y.array() * (T(1) - y.array());
      break;
    case Activation::Linear:
      break;
    case Activation::Softmax: {
      const Eigen::Matrix<T, 1, Eigen::Dynamic> dots = (delta.array() * y.array()).colwise().sum();
      delta = (y.array() * (delta.array().rowwise() - dots.array())).matrix();
      break;
    }
  }
}

template <typename T>
void fill_uniform(Eigen::Ref<Matrix<T>> m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = static_cast<T>(dist(rng));
  }
}

}  // namespace

// ---------------------------------------------------------------- DenseNet

template <typename T>
DenseNet<T>::DenseNet(std::vector<int> sizes, std::vector<Activation> activations, Rng& rng)
    : sizes_(std::move(sizes)), acts_(std::move(activations)) {
  if (sizes_.size() < 2 || acts_.size() != sizes_.size() - 1) {
    throw DimensionError("DenseNet needs n+1 sizes for n activations");
  }
  for (int s : sizes_) {
    if (s < 1) throw DimensionError("layer sizes must be positive");
  }
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = Vector<T>::Zero(total);
  for (int l = 0; l < layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[static_cast<std::size_t>(l)]));
    fill_uniform<T>(weight(l), bound, rng);
    fill_uniform<T>(bias(l), bound, rng);
  }
}

template <typename T>
Eigen::Map<Matrix<T>> DenseNet<T>::weight(int layer) {
  const auto l = static_cast<std::size_t>(layer);
  return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}

template <typename T>
Eigen::Map<const Matrix<T>> DenseNet<T>::weight(int layer) const {
  const auto l = static_cast<std::size_t>(layer);
  return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}

template <typename T>
Eigen::Map<Vector<T>> DenseNet<T>::bias(int layer) {
  const auto l = static_cast<std::size_t>(layer);
  return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
          sizes_[l + 1]};
}

template <typename T>
Eigen::Map<const Vector<T>> DenseNet<T>::bias(int layer) const {
  const auto l = static_cast<std::size_t>(layer);
  return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
          sizes_[l + 1]};
}

template <typename T>
Matrix<T> DenseNet<T>::forward(const Matrix<T>& x) const {
  if (x.rows() != input_size()) {
    throw DimensionError("DenseNet input has " + std::to_string(x.rows()) + " rows, expected " +
                         std::to_string(input_size()));
  }
  Matrix<T> h = x;
  for (int l = 0; l < layer_count(); ++l) {
    Matrix<T> z = weight(l) * h;
    z.colwise() += bias(l);
    activate(z, activation(l));
    h = std::move(z);
  }
  return h;
}

template <typename T>
Matrix<T> DenseNet<T>::forward(const Matrix<T>& x, Cache& cache) const {
  if (x.rows() != input_size()) {
    throw DimensionError("DenseNet input has " + std::to_string(x.rows()) + " rows, expected " +
                         std::to_string(input_size()));
  }
  cache.activations.clear();
  cache.activations.reserve(static_cast<std::size_t>(layer_count()) + 1);
  cache.activations.push_back(x);
  for (int l = 0; l < layer_count(); ++l) {
    Matrix<T> z = weight(l) * cache.activations.back();
    z.colwise() += bias(l);
    activate(z, activation(l));
    cache.activations.push_back(std::move(z));
  }
  return cache.activations.back();
}

template <typename T>
Matrix<T> DenseNet<T>::backward(const Cache& cache, const Matrix<T>& upstream, Vector<T>& grad,
                                bool need_input_grad) const {
  if (cache.activations.size() != static_cast<std::size_t>(layer_count()) + 1) {
    throw std::logic_error("DenseNet::backward called without a cached forward pass");
  }
  if (grad.size() != params_.size()) grad = Vector<T>::Zero(params_.size());
  Matrix<T> delta = upstream;
  for (int l = layer_count() - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    activation_backward(delta, cache.activations[li + 1], activation(l));
    const Matrix<T>& input = cache.activations[li];
    Eigen::Map<Matrix<T>> dw(grad.data() + offsets_[li], sizes_[li + 1], sizes_[li]);
    Eigen::Map<Vector<T>> db(grad.data() + offsets_[li] +
                                 static_cast<Eigen::Index>(sizes_[li + 1]) * sizes_[li],
                             sizes_[li + 1]);
    dw.noalias() += delta * input.transpose();
    db += delta.rowwise().sum();
    if (l > 0 || need_input_grad) {
      delta = weight(l).transpose() * delta;
    } else {
      delta.resize(0, 0);
    }
  }
  return delta;
}

// ---------------------------------------------------------------- LstmCell

template <typename T>
LstmCell<T>::LstmCell(int input_size, int hidden_size, Rng& rng)
    : input_(input_size), hidden_(hidden_size) {
  if (input_ < 1 || hidden_ < 1) throw DimensionError("LSTM sizes must be positive");
  const Eigen::Index rows = 4 * static_cast<Eigen::Index>(hidden_);
  params_ = Vector<T>::Zero(rows * (input_ + hidden_) + rows);
  Eigen::Map<Matrix<T>> w(params_.data(), rows, input_ + hidden_);
  fill_uniform<T>(w, 1.0 / std::sqrt(static_cast<double>(input_ + hidden_)), rng);
  // Forget-gate bias starts at 1.
  params_.segment(rows * (input_ + hidden_) + hidden_, hidden_).setConstant(T(1));
}

template <typename T>
typename LstmCell<T>::State LstmCell<T>::step(const Matrix<T>& x, const State& prev) const {
  Cache cache;
  return step(x, prev, cache);
}

template <typename T>
typename LstmCell<T>::State LstmCell<T>::step(const Matrix<T>& x, const State& prev,
                                              Cache& cache) const {
  if (x.rows() != input_) throw DimensionError("LSTM input dimension mismatch");
  if (prev.h.rows() != hidden_ || prev.c.rows() != hidden_ || prev.h.cols() != x.cols() ||
      prev.c.cols() != x.cols()) {
    throw DimensionError("LSTM state dimension mismatch");
  }
  const Eigen::Index rows = 4 * static_cast<Eigen::Index>(hidden_);
  Eigen::Map<const Matrix<T>> w(params_.data(), rows, input_ + hidden_);
  Eigen::Map<const Vector<T>> b(params_.data() + rows * (input_ + hidden_), rows);

  Matrix<T> z = w.leftCols(input_) * x;
  z.noalias() += w.rightCols(hidden_) * prev.h;
  z.colwise() += b;

  const Eigen::Index h = hidden_;
  auto sig = [](const auto& a) { return (T(1) / (T(1) + (-a.array()).exp())).matrix(); };
  cache.x = x;
  cache.h_prev = prev.h;
  cache.c_prev = prev.c;
  cache.i = sig(z.topRows(h));
  cache.f = sig(z.middleRows(h, h));
  cache.g = z.middleRows(2 * h, h).array().tanh().matrix();
  cache.o = sig(z.bottomRows(h));
  cache.c = (cache.f.array() * prev.c.array() + cache.i.array() * cache.g.array()).matrix();
  cache.tanh_c = cache.c.array().tanh().matrix();
  State next;
  next.c = cache.c;
  next.h = (cache.o.array() * cache.tanh_c.array()).matrix();
  return next;
}

template <typename T>
typename LstmCell<T>::InputGrads LstmCell<T>::backward(const Cache& cache, const Matrix<T>& dh,
                                                       const Matrix<T>& dc,
                                                       Vector<T>& grad) const {
  if (cache.x.size() == 0) throw std::logic_error("LstmCell::backward without cached step");
  if (grad.size() != params_.size()) grad = Vector<T>::Zero(params_.size());
  const Eigen::Index h = hidden_;
  const Eigen::Index rows = 4 * h;
  const Eigen::Index batch = cache.x.cols();

  const auto one = T(1);
  Matrix<T> dc_total = dc;
  dc_total.array() +=
      dh.array() * cache.o.array() * (one - cache.tanh_c.array().square());

  Matrix<T> dz(rows, batch);
  dz.topRows(h) = (dc_total.array() * cache.g.array() * cache.i.array() * (one - cache.i.array()))
                      .matrix();
  dz.middleRows(h, h) =
      (dc_total.array() * cache.c_prev.array() * cache.f.array() * (one - cache.f.array()))
          .matrix();
  dz.middleRows(2 * h, h) =
      (dc_total.array() * cache.i.array() * (one - cache.g.array().square())).matrix();
  dz.bottomRows(h) = (dh.array() * cache.tanh_c.array() * cache.o.array() *
                      (one - cache.o.array()))
                         .matrix();

  Eigen::Map<Matrix<T>> dw(grad.data(), rows, input_ + hidden_);
  Eigen::Map<Vector<T>> db(grad.data() + rows * (input_ + hidden_), rows);
  dw.leftCols(input_).noalias() += dz * cache.x.transpose();
  dw.rightCols(hidden_).noalias() += dz * cache.h_prev.transpose();
  db += dz.rowwise().sum();

  Eigen::Map<const Matrix<T>> w(params_.data(), rows, input_ + hidden_);
  InputGrads out;
  out.dx = w.leftCols(input_).transpose() * dz;
  out.dh_prev = w.rightCols(hidden_).transpose() * dz;
  out.dc_prev = (dc_total.array() * cache.f.array()).matrix();
  return out;
}

// ------------------------------------------------------------ reparameterize

template <typename T>
Reparameterized<T> gaussian_reparam(const Matrix<T>& mean, const Matrix<T>& logvar,
                                    const Matrix<T>& noise) {
  if (mean.rows() != logvar.rows() || mean.cols() != logvar.cols() || noise.rows() != mean.rows() ||
      noise.cols() != mean.cols()) {
    throw DimensionError("gaussian_reparam shape mismatch");
  }
  Reparameterized<T> out;
  out.logvar = logvar.cwiseMax(T(kLogvarMin)).cwiseMin(T(kLogvarMax));
  out.noise = noise;
  out.sample = (mean.array() + (out.logvar.array() * T(0.5)).exp() * noise.array()).matrix();
  return out;
}

template <typename T>
Reparameterized<T> gaussian_reparam(const Matrix<T>& mean, const Matrix<T>& logvar, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<T> noise(mean.rows(), mean.cols());
  for (Eigen::Index c = 0; c < noise.cols(); ++c) {
    for (Eigen::Index r = 0; r < noise.rows(); ++r) noise(r, c) = static_cast<T>(normal(rng));
  }
  return gaussian_reparam<T>(mean, logvar, noise);
}

// -------------------------------------------------------------------- Adam

template <typename T>
void adam_update(Vector<T>& params, const Vector<T>& grads, AdamState<T>& opt) {
  if (grads.size() != params.size() || opt.m.size() != params.size() ||
      opt.v.size() != params.size()) {
    throw DimensionError("adam_update shape mismatch");
  }
  // 0 * x is 0 for finite x and NaN otherwise.
  if (!((grads.array() * T(0)).sum() == T(0))) throw TrainingError("non-finite gradient");
  ++opt.step;
  const T b1 = static_cast<T>(opt.beta1);
  const T b2 = static_cast<T>(opt.beta2);
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  const T step_size = static_cast<T>(opt.lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(opt.eps);
  const T tiny = std::numeric_limits<T>::min();
  auto m = opt.m.array();
  auto v = opt.v.array();
  const auto g = grads.array();
  // Moments of long-idle parameters decay into subnormals, which are very slow
  // on x86; they are flushed to zero instead.
  m = b1 * m + (T(1) - b1) * g;
  m = (m.abs() < tiny).select(T(0), m);
  v = b2 * v + (T(1) - b2) * g.square();
  v = (v < tiny).select(T(0), v);
  params.array() -= step_size * m / ((v * inv_c2).sqrt() + eps);
}

template <typename T>
double clip_grad_norm(std::span<Vector<T>* const> grads, double max_norm) {
  double sq = 0.0;
  for (const Vector<T>* g : grads) sq += static_cast<double>(g->squaredNorm());
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm && norm > 0) {
    const T scale = static_cast<T>(max_norm / norm);
    for (Vector<T>* g : grads) *g *= scale;
  }
  return norm;
}

// ------------------------------------------------------------- checkpoints

template <typename T>
ParamBlock to_block(std::string name, const DenseNet<T>& net) {
  ParamBlock b;
  b.name = std::move(name);
  b.shape.assign(net.sizes().begin(), net.sizes().end());
  b.values.resize(static_cast<std::size_t>(net.param_count()));
  for (Eigen::Index i = 0; i < net.param_count(); ++i) {
    b.values[static_cast<std::size_t>(i)] = static_cast<double>(net.params()[i]);
  }
  return b;
}

template <typename T>
ParamBlock to_block(std::string name, const LstmCell<T>& cell) {
  ParamBlock b;
  b.name = std::move(name);
  b.shape = {cell.input_size(), cell.hidden_size()};
  b.values.resize(static_cast<std::size_t>(cell.param_count()));
  for (Eigen::Index i = 0; i < cell.param_count(); ++i) {
    b.values[static_cast<std::size_t>(i)] = static_cast<double>(cell.params()[i]);
  }
  return b;
}

namespace {

template <typename T>
void copy_values(const ParamBlock& block, Vector<T>& dst) {
  if (static_cast<Eigen::Index>(block.values.size()) != dst.size()) {
    throw DimensionError("checkpoint block '" + block.name + "' has the wrong size");
  }
  for (Eigen::Index i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<T>(block.values[static_cast<std::size_t>(i)]);
  }
}

}  // namespace

template <typename T>
void from_block(const ParamBlock& block, DenseNet<T>& net) {
  if (!std::equal(block.shape.begin(), block.shape.end(), net.sizes().begin(),
                  net.sizes().end())) {
    throw DimensionError("checkpoint block '" + block.name + "' shape mismatch");
  }
  copy_values(block, net.params());
}

template <typename T>
void from_block(const ParamBlock& block, LstmCell<T>& cell) {
  if (block.shape != std::vector<int>{cell.input_size(), cell.hidden_size()}) {
    throw DimensionError("checkpoint block '" + block.name + "' shape mismatch");
  }
  copy_values(block, cell.params());
}

void save_checkpoint(const std::filesystem::path& stem, std::span<const ParamBlock> blocks) {
  auto bin_path = stem;
  bin_path += ".bin";
  auto manifest_path = stem;
  manifest_path += ".json";
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + bin_path.string());
  nlohmann::json manifest{{"dtype", "float64-le"}, {"blocks", nlohmann::json::array()}};
  std::size_t offset = 0;
  for (const ParamBlock& b : blocks) {
    bin.write(reinterpret_cast<const char*>(b.values.data()),
              static_cast<std::streamsize>(b.values.size() * sizeof(double)));
    manifest["blocks"].push_back(
        {{"name", b.name}, {"shape", b.shape}, {"offset", offset}, {"size", b.values.size()}});
    offset += b.values.size();
  }
  std::ofstream(manifest_path) << manifest.dump(2) << '\n';
}

std::vector<ParamBlock> load_checkpoint(const std::filesystem::path& stem) {
  auto bin_path = stem;
  bin_path += ".bin";
  auto manifest_path = stem;
  manifest_path += ".json";
  std::ifstream mf(manifest_path);
  if (!mf) throw std::runtime_error("cannot read " + manifest_path.string());
  const nlohmann::json manifest = nlohmann::json::parse(mf);
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + bin_path.string());
  std::vector<ParamBlock> out;
  for (const auto& jb : manifest.at("blocks")) {
    ParamBlock b;
    b.name = jb.at("name").get<std::string>();
    b.shape = jb.at("shape").get<std::vector<int>>();
    b.values.resize(jb.at("size").get<std::size_t>());
    bin.seekg(static_cast<std::streamoff>(jb.at("offset").get<std::size_t>() * sizeof(double)));
    bin.read(reinterpret_cast<char*>(b.values.data()),
             static_cast<std::streamsize>(b.values.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("truncated checkpoint " + bin_path.string());
    out.push_back(std::move(b));
  }
  return out;
}

#define EDGEMIG_INSTANTIATE(T)                                                                   \
  template class DenseNet<T>;                                                                    \
  template class LstmCell<T>;                                                                    \
  template Reparameterized<T> gaussian_reparam<T>(const Matrix<T>&, const Matrix<T>&, Rng&);     \
  template Reparameterized<T> gaussian_reparam<T>(const Matrix<T>&, const Matrix<T>&,            \
                                                  const Matrix<T>&);                             \
  template void adam_update<T>(Vector<T>&, const Vector<T>&, AdamState<T>&);                     \
  template double clip_grad_norm<T>(std::span<Vector<T>* const>, double);                        \
  template ParamBlock to_block<T>(std::string, const DenseNet<T>&);                              \
  template ParamBlock to_block<T>(std::string, const LstmCell<T>&);                              \
  template void from_block<T>(const ParamBlock&, DenseNet<T>&);                                  \
  template void from_block<T>(const ParamBlock&, LstmCell<T>&);

EDGEMIG_INSTANTIATE(float)
EDGEMIG_INSTANTIATE(double)

#undef EDGEMIG_INSTANTIATE

}  // namespace edgemig::nn
