#pragma once

// JSON and CSV serialization of results. Every document carries
// schema_version; CSV files prefix their configuration as '#' comment lines,
// which parse_csv skips.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lppls/calibrate.hpp"
#include "lppls/intervals.hpp"
#include "lppls/likelihood.hpp"
#include "lppls/model.hpp"
#include "lppls/multiscale.hpp"
#include "lppls/series.hpp"
#include "lppls/synthetic.hpp"

namespace lppls::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// NaN and infinities become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline json to_json(const LinearParams& l) {
  return {{"A", l.A}, {"B", l.B}, {"C1", l.C1}, {"C2", l.C2}, {"C", l.amplitude()}, {"phi", l.phase()}};
}

inline json to_json(const LpplsParams& p) {
  return {{"tc", p.nonlinear.tc}, {"m", p.nonlinear.m}, {"omega", p.nonlinear.omega},
          {"linear", to_json(p.linear)}, {"s", p.s}};
}

inline json to_json(const QualificationFlags& q) {
  return {{"m_ok", q.m_ok}, {"omega_ok", q.omega_ok}, {"b_ok", q.b_ok}, {"d_ok", q.d_ok},
          {"all", q.all()},
          {"mode", q.mode == QualificationMode::strict ? "strict" : "confidence_aware"}};
}

inline json to_json(const NuisanceInterval& i) {
  return {{"parameter", to_string(i.parameter)}, {"center", number(i.center)},
          {"half_width", number(i.half_width)}, {"lo", number(i.lo())}, {"hi", number(i.hi())}};
}

inline json to_json(const LikelihoodInterval& li, const std::string& parameter) {
  json segs = json::array();
  for (const auto& s : li.segments) segs.push_back({s.lo, s.hi});
  return {{"schema_version", kSchemaVersion}, {"parameter", parameter}, {"cutoff", li.cutoff},
          {"segments", segs}, {"boundary_touched", li.boundary_touched}};
}

inline LikelihoodInterval interval_from_json(const json& j) {
  LikelihoodInterval li;
  li.cutoff = j.at("cutoff").get<double>();
  li.boundary_touched = j.at("boundary_touched").get<bool>();
  for (const auto& s : j.at("segments")) li.segments.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
  return li;
}

inline json to_json(const GapRecord& g) {
  return {{"start", format_date(g.start)}, {"end", format_date(g.end)}, {"filled", g.filled}};
}

inline json gap_report(const std::vector<GapRecord>& gaps) {
  json a = json::array();
  for (const auto& g : gaps) a.push_back(to_json(g));
  return a;
}

inline json to_json(const GeneratorSpec& s) {
  return {{"tc0", format_date(s.tc0)}, {"m0", s.m0}, {"omega0", s.omega0}, {"phi0", s.phi0},
          {"A0", s.A0}, {"B0", s.B0}, {"C0", s.C0}, {"sigma0", s.sigma0},
          {"start", format_date(s.start)}, {"end", format_date(s.end)},
          {"calendar", s.business_days_only ? "business_days" : "calendar_days"},
          {"seed", s.seed}, {"damping0", s.damping()},
          {"normal_generator", kNormalGeneratorName}};
}

/// Long CSV of a tc curve; offsets relative to `t2_time`.
inline void write_curve_csv(std::ostream& out, const LikelihoodCurve& c, double t2_time,
                            const std::string& comment = {}) {
  if (!comment.empty()) {
    std::istringstream lines(comment);
    for (std::string l; std::getline(lines, l);) out << "# " << l << '\n';
  }
  out << "tc_offset_days,f2,log_lp,log_lm,rel_lp,rel_lm,flag\n";
  for (std::size_t i = 0; i < c.size(); ++i)
    out << format_double(c.grid[i] - t2_time) << ',' << format_double(c.f2[i]) << ','
        << format_double(c.log_lp[i]) << ',' << format_double(c.log_lm[i]) << ','
        << format_double(c.rel_lp[i]) << ',' << format_double(c.rel_lm[i]) << ',' << c.flags[i]
        << '\n';
}

inline json to_json(const MultiscaleSurface& s) {
  json rel = json::array(), strict = json::array(), conf = json::array(), flags = json::array();
  json rows = json::array();
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    json rr = json::array(), fr = json::array();
    for (const auto& c : s.rows[r].cells) {
      rr.push_back(number(c.rel_lm));
      fr.push_back(c.flags);
    }
    rel.push_back(rr);
    flags.push_back(fr);
    strict.push_back(s.qualified_strict[r]);
    conf.push_back(s.qualified_confidence[r]);
    const auto& row = s.rows[r];
    json info = {{"dt", row.dt}, {"n", row.n}, {"missing", row.missing},
                 {"boundary", row.boundary}, {"interval_unreliable", row.boundary}};
    if (row.missing) info["missing_reason"] = row.missing_reason;
    if (row.mle) {
      info["mle"] = to_json(row.mle->params);
      info["mle_tc_offset_days"] = row.mle->params.nonlinear.tc - s.t2_time;
      info["mle_converged"] = row.mle->converged;
    }
    rows.push_back(info);
  }
  return {{"schema_version", kSchemaVersion}, {"t2", format_date(s.t2)}, {"tc_shift_days", s.tc_shift},
          {"dt_values", s.dt_values}, {"tc_offsets", s.tc_offsets}, {"rel_lm", rel},
          {"qualified_strict", strict}, {"qualified_confidence", conf}, {"flags", flags},
          {"boundary_rows", s.boundary_rows()}, {"rows", rows}};
}

/// Long format: dt, tc_offset, rel_lm, strict, confidence, flag.
inline void write_surface_csv(std::ostream& out, const MultiscaleSurface& s,
                              const std::string& comment = {}) {
  if (!comment.empty()) {
    std::istringstream lines(comment);
    for (std::string l; std::getline(lines, l);) out << "# " << l << '\n';
  }
  out << "dt,tc_offset,rel_lm,strict,confidence,flag\n";
  for (std::size_t r = 0; r < s.rows.size(); ++r)
    for (std::size_t c = 0; c < s.tc_offsets.size(); ++c)
      out << format_double(s.dt_values[r]) << ',' << format_double(s.tc_offsets[c]) << ','
          << format_double(s.rel_lm(r, c)) << ',' << (s.qualified_strict[r][c] ? 1 : 0) << ','
          << (s.qualified_confidence[r][c] ? 1 : 0) << ',' << s.rows[r].cells[c].flags << '\n';
}

inline json to_json(const ContourSet& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    json levels = json::array();
    for (const auto& li : r.intervals) levels.push_back(to_json(li, "tc_offset"));
    rows.push_back({{"dt", r.dt}, {"boundary", r.boundary}, {"missing", r.missing}, {"levels", levels}});
  }
  return {{"schema_version", kSchemaVersion}, {"cutoffs", c.cutoffs}, {"dt_values", c.dt_values},
          {"tc_offsets", c.tc_offsets}, {"rows", rows}, {"qualified_strict", c.qualified_strict},
          {"qualified_confidence", c.qualified_confidence}};
}

inline ContourSet contour_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion) throw ParseError("unsupported contour schema version");
  ContourSet c;
  c.cutoffs = j.at("cutoffs").get<std::vector<double>>();
  c.dt_values = j.at("dt_values").get<std::vector<double>>();
  c.tc_offsets = j.at("tc_offsets").get<std::vector<double>>();
  c.qualified_strict = j.at("qualified_strict").get<std::vector<std::vector<bool>>>();
  c.qualified_confidence = j.at("qualified_confidence").get<std::vector<std::vector<bool>>>();
  for (const auto& r : j.at("rows")) {
    ContourRow row;
    row.dt = r.at("dt").get<double>();
    row.boundary = r.at("boundary").get<bool>();
    row.missing = r.at("missing").get<bool>();
    for (const auto& l : r.at("levels")) row.intervals.push_back(interval_from_json(l));
    c.rows.push_back(std::move(row));
  }
  return c;
}

/// `date,close` CSV with closes exp(log-price).
inline void write_series_csv(std::ostream& out, const PriceSeries& s, const std::string& comment = {}) {
  if (!comment.empty()) {
    std::istringstream lines(comment);
    for (std::string l; std::getline(lines, l);) out << "# " << l << '\n';
  }
  out << "date,close\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << format_date(s.dates()[i]) << ',' << format_double(std::exp(s.log_prices()[i])) << '\n';
}

}  // namespace lppls::io
