#include "vtlab/audit.hpp"

namespace vtlab {

void DataAudit::begin_phase(std::string name, Date horizon) {
  std::lock_guard lock(mu_);
  active_ = true;
  phase_ = std::move(name);
  horizon_ = horizon;
}

void DataAudit::end_phase() {
  std::lock_guard lock(mu_);
  active_ = false;
}

bool DataAudit::in_phase() const {
  std::lock_guard lock(mu_);
  return active_;
}

void DataAudit::record(const std::string& reader, Date last_date_read) {
  std::lock_guard lock(mu_);
  if (!active_) return;
  ++reads_;
  if (horizon_ < last_date_read) violations_.push_back({phase_, reader, horizon_, last_date_read});
}

void DataAudit::record(const std::string& reader, const std::vector<Date>& dates_read) {
  if (dates_read.empty()) return;
  record(reader, dates_read.back());
}

bool DataAudit::clean() const {
  std::lock_guard lock(mu_);
  return violations_.empty();
}

std::vector<DataAudit::Violation> DataAudit::violations() const {
  std::lock_guard lock(mu_);
  return violations_;
}

std::size_t DataAudit::reads() const {
  std::lock_guard lock(mu_);
  return reads_;
}

}  // namespace vtlab
