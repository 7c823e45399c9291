#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lppls/series.hpp"

using namespace lppls;

namespace {

PriceSeries parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

}  // namespace

TEST(Series, LogTransformAtIngestion) {
  const auto s = parse("date,close\n2015-01-01,2.718281828459045\n2015-01-02,7.38905609893065\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s.log_prices()[0], 1.0, 1e-15);
  EXPECT_NEAR(s.log_prices()[1], 2.0, 1e-15);
}

TEST(Series, UnsortedRowsAreSorted) {
  const auto s = parse("date,close\n2015-01-05,3\n2015-01-01,1\n2015-01-02,2\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.dates()[0], make_date(2015, 1, 1));
  EXPECT_EQ(s.dates()[2], make_date(2015, 1, 5));
  EXPECT_DOUBLE_EQ(s.log_prices()[2], std::log(3.0));
}

TEST(Series, NegativeCloseNamesTheRow) {
  try {
    parse("date,close\n2015-01-01,1\n2015-01-02,-5\n");
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Series, MalformedRowReportsLine) {
  try {
    parse("date,close\n2015-01-01,1\n2015-13-02,1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("date,close\n2015-01-01\n"), ParseError);
  EXPECT_THROW(parse("date,close\n2015-01-01,abc\n"), ParseError);
  EXPECT_THROW(parse("day,price\n2015-01-01,1\n"), ParseError);
}

TEST(Series, DuplicateDatesRejected) {
  EXPECT_THROW(parse("date,close\n2015-01-01,1\n2015-01-01,2\n"), DataError);
}

TEST(Series, CommentsAndBlankLinesSkipped) {
  const auto s = parse("# generated\n\ndate,close\n# note\n2015-01-01,1\n\n");
  EXPECT_EQ(s.size(), 1u);
}

TEST(Series, NumericTimeIsCalendarDays) {
  const auto s = parse("date,close\n2015-01-02,1\n2015-01-05,1\n2015-01-06,1\n");
  EXPECT_EQ(s.origin(), make_date(2015, 1, 2));
  const auto t = s.times();
  EXPECT_EQ(t[0], 0.0);
  EXPECT_EQ(t[1], 3.0);  // weekend still counted
  EXPECT_EQ(t[2], 4.0);
}

TEST(Series, WindowIsInclusiveAndKeepsOrigin) {
  std::vector<Date> d;
  std::vector<double> y;
  for (Date x = make_date(2020, 1, 1); x <= make_date(2020, 12, 31); x += std::chrono::days{1})
    if (is_business_day(x)) {
      d.push_back(x);
      y.push_back(1.0);
    }
  const auto s = PriceSeries::from_log_prices(d, y);
  EXPECT_EQ(window(s, s.front(), s.back()), s);

  const Date t2 = make_date(2020, 12, 31);
  const Date t1 = t2 - std::chrono::days{180};
  const auto w = window(s, t1, t2);
  long business = 0;
  for (Date x = t1; x <= t2; x += std::chrono::days{1}) business += is_business_day(x);
  EXPECT_EQ(static_cast<long>(w.size()), business);
  EXPECT_EQ(w.origin(), s.origin());
  EXPECT_EQ(w.time(0), s.time_of(w.front()));

  EXPECT_THROW(window(s, make_date(2021, 2, 1), make_date(2021, 3, 1)), DataError);
  EXPECT_THROW(Window(t2, t1), DataError);
  EXPECT_THROW(window(s, Window(make_date(2020, 12, 20), t2), 30), DataError);
}

TEST(Series, FillsExchangeClosureWithPreviousClose) {
  // Closed Friday Feb 6 through Friday Feb 13: five business days missing.
  std::vector<Date> d;
  std::vector<double> y;
  double v = 0.0;
  for (Date x = make_date(2015, 1, 26); x <= make_date(2015, 2, 27); x += std::chrono::days{1}) {
    if (!is_business_day(x)) continue;
    if (x >= make_date(2015, 2, 7) && x <= make_date(2015, 2, 13)) continue;
    d.push_back(x);
    y.push_back(v += 0.01);
  }
  // Feb 6 is present (last trading day before the closure).
  const auto s = PriceSeries::from_log_prices(d, y);
  const auto filled = fill_gaps(s, 10);
  ASSERT_EQ(filled.series.size(), s.size() + 5);
  ASSERT_EQ(filled.gaps.size(), 1u);
  EXPECT_TRUE(filled.gaps[0].filled);
  EXPECT_EQ(filled.gaps[0].start, make_date(2015, 2, 9));
  EXPECT_EQ(filled.gaps[0].end, make_date(2015, 2, 13));
  const double prior = s.log_prices()[static_cast<std::size_t>(
      std::find(d.begin(), d.end(), make_date(2015, 2, 6)) - d.begin())];
  for (std::size_t i = 0; i < filled.series.size(); ++i) {
    const Date x = filled.series.dates()[i];
    if (x >= make_date(2015, 2, 9) && x <= make_date(2015, 2, 13))
      EXPECT_EQ(filled.series.log_prices()[i], prior);
  }
  // Idempotent.
  EXPECT_EQ(fill_gaps(filled.series, 10).series, filled.series);
}

TEST(Series, NoGapsIsIdentity) {
  std::vector<Date> d;
  std::vector<double> y;
  for (Date x = make_date(2015, 1, 5); x <= make_date(2015, 3, 5); x += std::chrono::days{1})
    if (is_business_day(x)) {
      d.push_back(x);
      y.push_back(1.0);
    }
  const auto s = PriceSeries::from_log_prices(d, y);
  const auto f = fill_gaps(s, 10);
  EXPECT_EQ(f.series, s);
  EXPECT_TRUE(f.gaps.empty());
}

TEST(Series, LongGapReportedNotFilled) {
  std::vector<Date> d{make_date(2015, 1, 2), make_date(2015, 1, 22), make_date(2015, 1, 23)};
  const auto s = PriceSeries::from_log_prices(d, {1, 2, 3});
  const auto f = fill_gaps(s, 10);
  EXPECT_EQ(f.series, s);
  ASSERT_EQ(f.gaps.size(), 1u);
  EXPECT_FALSE(f.gaps[0].filled);
  EXPECT_EQ(f.gaps[0].start, make_date(2015, 1, 5));
  EXPECT_EQ(f.gaps[0].end, make_date(2015, 1, 21));
}

TEST(Series, ConstructorInvariants) {
  EXPECT_THROW(PriceSeries::from_log_prices({make_date(2015, 1, 2), make_date(2015, 1, 1)}, {1, 1}), DataError);
  EXPECT_THROW(PriceSeries::from_log_prices({make_date(2015, 1, 1)}, {NAN}), DomainError);
  EXPECT_THROW(PriceSeries::from_log_prices({make_date(2015, 1, 1)}, {1, 2}), DataError);
}
