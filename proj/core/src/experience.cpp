#include "edgemig/experience.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "edgemig/errors.hpp"

namespace edgemig {

const char* to_string(Origin origin) {
  switch (origin) {
    case Origin::PhysicalSuccess:
      return "physical-success";
    case Origin::PhysicalFail:
      return "physical-fail";
    case Origin::Synthetic:
      return "synthetic";
  }
  return "?";
}

RingBuffer::RingBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("buffer capacity must be positive");
}

void RingBuffer::push(Experience exp) {
  if (exp.s.size() != exp.s_next.size()) throw DimensionError("experience state sizes differ");
  if (!std::isfinite(exp.r)) throw std::invalid_argument("experience reward must be finite");
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(exp));
}

std::vector<Experience> RingBuffer::sample(std::size_t count, Rng& rng) const {
  std::vector<Experience> out;
  if (items_.empty() || count == 0) return out;
  out.reserve(count);
  if (items_.size() >= count) {
    // Partial Fisher-Yates over the index range.
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      out.push_back(items_[idx[i]]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    for (std::size_t i = 0; i < count; ++i) out.push_back(items_[pick(rng)]);
  }
  return out;
}

void ExperienceBuffers::push(Experience exp) {
  switch (exp.origin) {
    case Origin::PhysicalSuccess:
      success.push(std::move(exp));
      break;
    case Origin::PhysicalFail:
      fail.push(std::move(exp));
      break;
    case Origin::Synthetic:
      synthetic.push(std::move(exp));
      break;
  }
}

std::vector<Experience> sample_physical(const ExperienceBuffers& buffers, std::size_t count,
                                        double kappa, Rng& rng) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw ConfigError("balance parameter must lie in [0, 1]");
  if (buffers.success.empty() && buffers.fail.empty()) {
    throw SamplingError("both physical buffers are empty");
  }
  auto n_success = static_cast<std::size_t>(std::floor(kappa * static_cast<double>(count) + 1e-9));
  n_success = std::min(n_success, count);
  if (buffers.fail.empty()) n_success = count;
  if (buffers.success.empty()) n_success = 0;

  std::vector<Experience> batch = buffers.success.sample(n_success, rng);
  std::vector<Experience> rest = buffers.fail.sample(count - n_success, rng);
  batch.insert(batch.end(), std::make_move_iterator(rest.begin()),
               std::make_move_iterator(rest.end()));
  std::shuffle(batch.begin(), batch.end(), rng);
  return batch;
}

std::vector<Experience> sample_dt(const RingBuffer& buffer, std::size_t count, Rng& rng) {
  return buffer.sample(count, rng);
}

void export_jsonl(const RingBuffer& buffer, std::ostream& out) {
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const Experience& e = buffer[i];
    nlohmann::json j{{"s", std::vector<float>(e.s.data(), e.s.data() + e.s.size())},
                     {"a", e.a},
                     {"r", e.r},
                     {"s_next", std::vector<float>(e.s_next.data(), e.s_next.data() + e.s_next.size())},
                     {"terminal", e.terminal},
                     {"origin", to_string(e.origin)}};
    out << j.dump() << '\n';
  }
}

}  // namespace edgemig
