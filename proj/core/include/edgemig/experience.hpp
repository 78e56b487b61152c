#pragma once

#include <cstdint>
#include <deque>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "edgemig/random.hpp"

namespace edgemig {

enum class Origin : std::uint8_t { PhysicalSuccess, PhysicalFail, Synthetic };

const char* to_string(Origin origin);

struct Experience {
  Eigen::VectorXf s;
  int a = 0;
  double r = 0.0;
  Eigen::VectorXf s_next;
  bool terminal = false;
  Origin origin = Origin::PhysicalSuccess;
};

/// Fixed-capacity FIFO; pushing into a full buffer evicts the oldest entry.
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity);

  void push(Experience exp);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  void clear() { items_.clear(); }
  /// 0 is the oldest entry.
  const Experience& operator[](std::size_t i) const { return items_[i]; }

  /// `count` entries drawn uniformly, without replacement when the buffer holds
  /// at least `count` items and with replacement otherwise. Empty buffer or
  /// count 0 yields an empty batch.
  std::vector<Experience> sample(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Experience> items_;
};

struct BufferCapacities {
  std::size_t success = 4000;
  std::size_t fail = 2000;
  std::size_t synthetic = 6000;
};

struct ExperienceBuffers {
  RingBuffer success;
  RingBuffer fail;
  RingBuffer synthetic;

  explicit ExperienceBuffers(const BufferCapacities& caps = {})
      : success(caps.success), fail(caps.fail), synthetic(caps.synthetic) {}

  /// Routes by origin.
  void push(Experience exp);
  std::size_t physical_size() const { return success.size() + fail.size(); }
};

/// floor(kappa * count) entries from the success buffer, the rest from the fail
/// buffer, shuffled together. If one buffer is empty the whole batch comes from
/// the other. Throws SamplingError when both are empty.
std::vector<Experience> sample_physical(const ExperienceBuffers& buffers, std::size_t count,
                                        double kappa, Rng& rng);

std::vector<Experience> sample_dt(const RingBuffer& buffer, std::size_t count, Rng& rng);

/// One JSON object per line: s, a, r, s_next, terminal, origin.
void export_jsonl(const RingBuffer& buffer, std::ostream& out);

}  // namespace edgemig
