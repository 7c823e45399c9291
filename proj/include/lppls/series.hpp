#pragma once

// Daily price ingestion on a calendar-day time axis.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lppls/error.hpp"

namespace lppls {

using Date = std::chrono::sys_days;

inline Date make_date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

/// Parses YYYY-MM-DD. Throws ParseError on anything else.
inline Date parse_date(std::string_view s) {
  auto fail = [&] { throw ParseError("invalid ISO-8601 date '" + std::string(s) + "'"); };
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
  int y = 0;
  unsigned mo = 0, d = 0;
  auto parse = [&](std::string_view part, auto& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc{} || p != part.data() + part.size()) fail();
  };
  parse(s.substr(0, 4), y);
  parse(s.substr(5, 2), mo);
  parse(s.substr(8, 2), d);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok()) fail();
  return Date{ymd};
}

inline std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline bool is_business_day(Date date) {
  const std::chrono::weekday wd{date};
  return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

inline long days_between(Date from, Date to) { return (to - from).count(); }

/// Dated log-prices. Numeric time of an observation is the whole number of
/// calendar days since `origin()`, so weekends still advance the clock.
class PriceSeries {
 public:
  PriceSeries() = default;

  PriceSeries(std::vector<Date> dates, std::vector<double> log_prices, Date origin)
      : dates_(std::move(dates)), log_prices_(std::move(log_prices)), origin_(origin) {
    if (dates_.size() != log_prices_.size())
      throw DataError("dates and log-prices differ in length");
    for (std::size_t i = 0; i < dates_.size(); ++i) {
      if (!std::isfinite(log_prices_[i]))
        throw DomainError("non-finite log-price at " + format_date(dates_[i]));
      if (i > 0 && dates_[i] <= dates_[i - 1])
        throw DataError("dates not strictly increasing at " + format_date(dates_[i]));
    }
  }

  /// Origin defaults to the first date.
  static PriceSeries from_log_prices(std::vector<Date> dates, std::vector<double> log_prices) {
    const Date origin = dates.empty() ? Date{} : dates.front();
    return PriceSeries(std::move(dates), std::move(log_prices), origin);
  }

  std::size_t size() const noexcept { return dates_.size(); }
  bool empty() const noexcept { return dates_.empty(); }
  std::span<const Date> dates() const noexcept { return dates_; }
  std::span<const double> log_prices() const noexcept { return log_prices_; }
  Date origin() const noexcept { return origin_; }
  Date front() const { return dates_.front(); }
  Date back() const { return dates_.back(); }

  double time_of(Date d) const { return static_cast<double>(days_between(origin_, d)); }
  Date date_of(long t) const { return origin_ + std::chrono::days{t}; }
  double time(std::size_t i) const { return time_of(dates_[i]); }

  std::vector<double> times() const {
    std::vector<double> t(size());
    for (std::size_t i = 0; i < size(); ++i) t[i] = time(i);
    return t;
  }

  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

 private:
  std::vector<Date> dates_;
  std::vector<double> log_prices_;
  Date origin_{};
};

/// Numeric view used by the estimators: times in days and log-prices.
struct Observations {
  std::vector<double> t;
  std::vector<double> y;

  std::size_t size() const noexcept { return t.size(); }

  static Observations from(const PriceSeries& s) { return {s.times(), {s.log_prices().begin(), s.log_prices().end()}}; }
};

inline constexpr std::size_t kDefaultMinObservations = 30;

/// Calibration window [t1, t2].
struct Window {
  Date t1;
  Date t2;

  Window(Date first, Date last) : t1(first), t2(last) {
    if (!(t1 < t2)) throw DataError("window start must precede window end");
  }
  /// Window of `dt` calendar days ending at `last`.
  static Window ending_at(Date last, long dt) { return Window(last - std::chrono::days{dt}, last); }

  long dt() const { return days_between(t1, t2); }
};

/// Observations with dates in [t1, t2], same origin as the parent series.
inline PriceSeries window(const PriceSeries& series, Date t1, Date t2) {
  if (!(t1 < t2)) throw DataError("window start must precede window end");
  const auto dates = series.dates();
  const auto lo = std::lower_bound(dates.begin(), dates.end(), t1);
  const auto hi = std::upper_bound(dates.begin(), dates.end(), t2);
  if (lo >= hi)
    throw DataError("empty window [" + format_date(t1) + ", " + format_date(t2) + "]");
  const auto a = static_cast<std::size_t>(lo - dates.begin());
  const auto b = static_cast<std::size_t>(hi - dates.begin());
  std::vector<Date> d(lo, hi);
  std::vector<double> y(series.log_prices().begin() + a, series.log_prices().begin() + b);
  return PriceSeries(std::move(d), std::move(y), series.origin());
}

/// Window with an observation-count floor.
inline PriceSeries window(const PriceSeries& series, const Window& w,
                          std::size_t min_observations = kDefaultMinObservations) {
  auto sub = window(series, w.t1, w.t2);
  if (sub.size() < min_observations)
    throw DataError("window [" + format_date(w.t1) + ", " + format_date(w.t2) + "] has " +
                    std::to_string(sub.size()) + " observations, fewer than " +
                    std::to_string(min_observations));
  return sub;
}

/// Reads `date,close` CSV. Lines starting with '#' and blank lines are skipped.
inline PriceSeries parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<std::pair<Date, double>> rows;
  auto trim = [](std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = trim(line);
    if (line_no == 1 && v.substr(0, 3) == "\xEF\xBB\xBF") v.remove_prefix(3);
    if (v.empty() || v.front() == '#') continue;
    const auto comma = v.find(',');
    if (comma == std::string_view::npos) throw ParseError("expected 'date,close'", line_no);
    const auto c0 = trim(v.substr(0, comma));
    const auto c1 = trim(v.substr(comma + 1));
    if (!header_seen) {
      if (c0 != "date" || c1 != "close") throw ParseError("missing 'date,close' header", line_no);
      header_seen = true;
      continue;
    }
    if (c1.find(',') != std::string_view::npos) throw ParseError("too many columns", line_no);
    Date d;
    try {
      d = parse_date(c0);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    const std::string num(c1);
    char* end = nullptr;
    const double close = std::strtod(num.c_str(), &end);
    if (num.empty() || end != num.c_str() + num.size() || !std::isfinite(close))
      throw ParseError("invalid close price '" + num + "'", line_no);
    if (close <= 0.0)
      throw DomainError("line " + std::to_string(line_no) + ": non-positive close price " + num +
                        " on " + std::string(c0));
    rows.emplace_back(d, close);
  }
  if (!header_seen) throw ParseError("missing 'date,close' header");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Date> dates;
  std::vector<double> logs;
  dates.reserve(rows.size());
  logs.reserve(rows.size());
  for (const auto& [d, c] : rows) {
    if (!dates.empty() && dates.back() == d) throw DataError("duplicate date " + format_date(d));
    dates.push_back(d);
    logs.push_back(std::log(c));
  }
  return PriceSeries::from_log_prices(std::move(dates), std::move(logs));
}

inline PriceSeries load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in);
}

struct GapRecord {
  Date start;  ///< first missing business day
  Date end;    ///< last missing business day
  bool filled;
  friend bool operator==(const GapRecord&, const GapRecord&) = default;
};

struct FilledSeries {
  PriceSeries series;
  std::vector<GapRecord> gaps;
};

/// Carries the previous close forward over closures of at least
/// `min_missing_business_days` business days (single-day holidays and weekends
/// stay absent). A closure whose calendar length exceeds `max_gap_days` is
/// reported and left unfilled.
inline FilledSeries fill_gaps(const PriceSeries& series, int max_gap_days,
                              int min_missing_business_days = 2) {
  if (series.empty()) throw DataError("fill_gaps on empty series");
  std::vector<Date> dates;
  std::vector<double> logs;
  std::vector<GapRecord> gaps;
  const auto d = series.dates();
  const auto y = series.log_prices();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i > 0) {
      std::vector<Date> missing;
      for (Date x = d[i - 1] + std::chrono::days{1}; x < d[i]; x += std::chrono::days{1})
        if (is_business_day(x)) missing.push_back(x);
      if (static_cast<int>(missing.size()) >= min_missing_business_days) {
        const long closure_days = days_between(d[i - 1], d[i]) - 1;
        const bool fill = closure_days <= max_gap_days;
        gaps.push_back({missing.front(), missing.back(), fill});
        if (fill)
          for (Date x : missing) {
            dates.push_back(x);
            logs.push_back(y[i - 1]);
          }
      }
    }
    dates.push_back(d[i]);
    logs.push_back(y[i]);
  }
  return {PriceSeries(std::move(dates), std::move(logs), series.origin()), std::move(gaps)};
}

}  // namespace lppls
