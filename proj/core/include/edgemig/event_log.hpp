#pragma once

#include <ostream>

#include <json.hpp>

namespace edgemig {

/// JSON-lines sink for deploy/migrate/expire/step records. A default-constructed
/// log is disabled and drops everything.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::ostream* out) : out_(out) {}

  bool enabled() const { return out_ != nullptr; }
  void set_episode(int episode) { episode_ = episode; }
  int episode() const { return episode_; }

  void write(nlohmann::json record);

 private:
  std::ostream* out_ = nullptr;
  int episode_ = 0;
};

}  // namespace edgemig
