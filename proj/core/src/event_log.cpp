#include "edgemig/event_log.hpp"

namespace edgemig {

void EventLog::write(nlohmann::json record) {
  if (!out_) return;
  record["episode"] = episode_;
  *out_ << record.dump() << '\n';
}

}  // namespace edgemig
