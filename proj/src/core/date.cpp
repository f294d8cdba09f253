#include "biaskit/core/date.hpp"

#include <cctype>
#include <fmt/core.h>

#include "biaskit/core/error.hpp"

namespace biaskit {

namespace chr = std::chrono;

Date::Date(int y, unsigned m, unsigned d) {
  chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
  if (!ymd.ok()) throw InvalidInput(fmt::format("invalid date {:04d}-{:02d}-{:02d}", y, m, d));
  days_ = chr::sys_days{ymd};
}

namespace {

bool all_digits(std::string_view s) {
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return !s.empty();
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

Date Date::parse(std::string_view text) {
  std::string_view y, m, d;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    y = text.substr(0, 4);
    m = text.substr(5, 2);
    d = text.substr(8, 2);
  } else if (text.size() == 8) {
    y = text.substr(0, 4);
    m = text.substr(4, 2);
    d = text.substr(6, 2);
  }
  if (!all_digits(y) || !all_digits(m) || !all_digits(d))
    throw InvalidInput("unparseable date '" + std::string(text) + "'");
  return Date(to_int(y), static_cast<unsigned>(to_int(m)), static_cast<unsigned>(to_int(d)));
}

int Date::year() const { return int(chr::year_month_day{days_}.year()); }
unsigned Date::month() const { return unsigned(chr::year_month_day{days_}.month()); }
unsigned Date::day() const { return unsigned(chr::year_month_day{days_}.day()); }

std::string Date::iso() const { return fmt::format("{:04d}-{:02d}-{:02d}", year(), month(), day()); }

std::string Date::compact() const { return fmt::format("{:04d}{:02d}{:02d}", year(), month(), day()); }

int DateRange::day_count() const {
  if (empty()) return 0;
  return static_cast<int>((last.days() - first.days()).count()) + 1;
}

std::string utc_timestamp_now() {
  const auto now = chr::floor<chr::seconds>(chr::system_clock::now());
  const auto day = chr::floor<chr::days>(now);
  const chr::year_month_day ymd{day};
  const chr::hh_mm_ss hms{now - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", int(ymd.year()), unsigned(ymd.month()),
                     unsigned(ymd.day()), hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

}  // namespace biaskit
