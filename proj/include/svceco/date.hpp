#pragma once

#include <algorithm>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace svceco {

/// Calendar date at day resolution, stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

  static Date from_ymd(int y, unsigned m, unsigned d) {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) {
      throw std::invalid_argument("invalid calendar date");
    }
    return Date(static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count()));
  }

  /// Strict `YYYY-MM-DD`.
  static std::optional<Date> try_parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
      return std::nullopt;
    }
    auto digits = [&](std::size_t from, std::size_t len) -> std::optional<int> {
      int v = 0;
      for (std::size_t i = from; i < from + len; ++i) {
        if (text[i] < '0' || text[i] > '9') return std::nullopt;
        v = v * 10 + (text[i] - '0');
      }
      return v;
    };
    const auto y = digits(0, 4);
    const auto m = digits(5, 2);
    const auto d = digits(8, 2);
    if (!y || !m || !d) return std::nullopt;
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                             std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date(static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count()));
  }

  static Date parse(std::string_view text) {
    if (auto d = try_parse(text)) return *d;
    throw std::invalid_argument("invalid ISO-8601 date: '" + std::string(text) + "'");
  }

  std::string iso() const {
    const auto ymd = to_ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  std::chrono::year_month_day to_ymd() const {
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days_}}};
  }

  int year() const { return static_cast<int>(to_ymd().year()); }
  unsigned month() const { return static_cast<unsigned>(to_ymd().month()); }

  constexpr std::int32_t days() const { return days_; }

  constexpr Date operator+(std::int64_t n) const {
    return Date(static_cast<std::int32_t>(days_ + n));
  }
  constexpr Date operator-(std::int64_t n) const {
    return Date(static_cast<std::int32_t>(days_ - n));
  }
  constexpr std::int64_t operator-(Date other) const {
    return static_cast<std::int64_t>(days_) - other.days_;
  }

  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::int32_t days_ = 0;
};

/// Half-open `[from, to)`; an absent end means the interval is unbounded.
struct Interval {
  Date from;
  std::optional<Date> to;

  bool contains(Date t) const { return from <= t && (!to || t < *to); }
  bool empty() const { return to && *to <= from; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval intersect(const Interval& a, const Interval& b) {
  Interval out{std::max(a.from, b.from), std::nullopt};
  if (a.to && b.to) {
    out.to = std::min(*a.to, *b.to);
  } else if (a.to) {
    out.to = a.to;
  } else if (b.to) {
    out.to = b.to;
  }
  return out;
}

}  // namespace svceco
