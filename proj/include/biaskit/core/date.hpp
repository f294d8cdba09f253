#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace biaskit {

// Calendar date (UTC, no time of day).
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  // Accepts "YYYY-MM-DD" and "YYYYMMDD"; throws InvalidInput otherwise.
  static Date parse(std::string_view text);

  int year() const;
  unsigned month() const;
  unsigned day() const;

  std::string iso() const;      // YYYY-MM-DD
  std::string compact() const;  // YYYYMMDD

  std::chrono::sys_days days() const { return days_; }
  Date plus_days(int n) const { return Date(days_ + std::chrono::days(n)); }

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

// Current wall-clock time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp_now();

struct DateRange {
  Date first;
  Date last;  // inclusive

  bool empty() const { return last < first; }
  bool contains(const Date& d) const { return first <= d && d <= last; }
  int day_count() const;
};

}  // namespace biaskit
