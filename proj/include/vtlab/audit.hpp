#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "vtlab/market_data.hpp"

namespace vtlab {

/// Records the latest date each training component reads and flags any read
/// past the active phase's horizon.
class DataAudit {
 public:
  struct Violation {
    std::string phase;
    std::string reader;
    Date horizon;
    Date read;
  };

  void begin_phase(std::string name, Date horizon);
  void end_phase();
  bool in_phase() const;

  /// Outside a phase this is a no-op.
  void record(const std::string& reader, Date last_date_read);
  void record(const std::string& reader, const std::vector<Date>& dates_read);

  bool clean() const;
  std::vector<Violation> violations() const;
  std::size_t reads() const;

 private:
  mutable std::mutex mu_;
  bool active_ = false;
  std::string phase_;
  Date horizon_{};
  std::size_t reads_ = 0;
  std::vector<Violation> violations_;
};

}  // namespace vtlab
