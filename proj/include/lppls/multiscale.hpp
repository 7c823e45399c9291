#pragma once

// Relative modified profile likelihood R(tc, dt) over window sizes dt at a
// fixed analysis date t2. Each row is normalized on its own because
// likelihoods computed from different sample sizes are not comparable.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lppls/calibrate.hpp"
#include "lppls/error.hpp"
#include "lppls/intervals.hpp"
#include "lppls/likelihood.hpp"
#include "lppls/model.hpp"
#include "lppls/parallel.hpp"
#include "lppls/series.hpp"

namespace lppls {

/// Inclusive arithmetic range min, min + step, ..., <= max.
struct Range {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::vector<double> values() const {
    if (!(step > 0.0) || !(max >= min)) throw ConfigError("invalid range");
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k) v[k] = min + static_cast<double>(k) * step;
    return v;
  }
};

struct ScanOptions {
  CalibrationOptions calibration;
  /// Cutoff of the approximate nuisance intervals used for filtering.
  double qualification_cutoff = kDefaultCutoff;
  QualificationBounds bounds;
  std::size_t min_observations = kDefaultMinObservations;
  /// tc = t2 + offset + tc_shift keeps tc off the integer observation times.
  double tc_shift = 0.5;
  /// Rows are independent work units spread over this many workers.
  unsigned threads = 1;
};

enum CellFlag : std::uint32_t {
  kCellMissing = 1u << 8,              ///< no relative likelihood value
  kCellNoIntervals = 1u << 9,          ///< approximate intervals unavailable
  kCellIntervalUnreliable = 1u << 10,  ///< row maximum on the tc boundary
};

struct CellEstimate {
  ProfilePoint point;
  std::optional<NuisanceIntervals> intervals;
  double rel_lm = std::numeric_limits<double>::quiet_NaN();
  /// PointFlag bits of the likelihood computation plus CellFlag bits.
  std::uint32_t flags = 0;

  bool missing() const { return (flags & kCellMissing) != 0; }
};

struct MultiscaleRow {
  double dt = 0.0;
  bool missing = false;
  std::string missing_reason;
  /// Row argmax on the first or last tc column.
  bool boundary = false;
  std::size_t n = 0;
  std::optional<FitResult> mle;
  std::vector<CellEstimate> cells;
};

struct MultiscaleSurface {
  Date t2{};
  double t2_time = 0.0;  ///< numeric time of t2 on the series axis
  double tc_shift = 0.5;
  std::vector<double> dt_values;
  std::vector<double> tc_offsets;
  std::vector<MultiscaleRow> rows;
  std::vector<std::vector<bool>> qualified_strict;
  std::vector<std::vector<bool>> qualified_confidence;
  /// False for surfaces assembled without approximate intervals.
  bool has_intervals = true;

  std::size_t row_count() const { return rows.size(); }
  std::size_t column_count() const { return tc_offsets.size(); }
  double rel_lm(std::size_t r, std::size_t c) const { return rows[r].cells[c].rel_lm; }
  std::vector<bool> boundary_rows() const {
    std::vector<bool> b;
    for (const auto& r : rows) b.push_back(r.boundary);
    return b;
  }
};

/// Computes one row: window [t2 - dt, t2], tc profile, full MLE, modified
/// profile likelihood and the approximate intervals of every cell.
inline MultiscaleRow scan_row(const PriceSeries& series, Date t2, double dt,
                              std::span<const double> tc_offsets, const ScanOptions& opt) {
  MultiscaleRow row;
  row.dt = dt;
  const std::size_t cols = tc_offsets.size();
  row.cells.resize(cols);
  for (auto& c : row.cells) c.flags = kCellMissing;
  try {
    const auto days = std::chrono::days{static_cast<long>(std::llround(dt))};
    const auto sub = window(series, Window(t2 - days, t2), opt.min_observations);
    const Observations obs = Observations::from(sub);
    row.n = obs.size();
    const double t2_time = series.time_of(t2);
    std::vector<double> grid(cols);
    for (std::size_t j = 0; j < cols; ++j) grid[j] = t2_time + tc_offsets[j] + opt.tc_shift;

    CalibrationOptions copt = opt.calibration;
    copt.threads = 1;
    const auto profile = profile_f2(obs, grid, copt);
    const FitResult mle = full_mle(obs, profile, copt);
    row.mle = mle;
    const LikelihoodCurve curve = modified_profile_likelihood(obs, profile, mle);

    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < cols; ++j) {
      CellEstimate& cell = row.cells[j];
      cell.point = profile[j];
      cell.flags = curve.flags[j];
      cell.rel_lm = curve.rel_lm[j];
      if (std::isnan(cell.rel_lm)) {
        cell.flags |= kCellMissing;
        continue;
      }
      if (!best || cell.rel_lm > row.cells[*best].rel_lm) best = j;
      cell.intervals = approx_nuisance_intervals(fisher_blocks(obs, profile[j]),
                                                 opt.qualification_cutoff);
      if (!cell.intervals) cell.flags |= kCellNoIntervals;
    }
    row.boundary = best && (*best == 0 || *best + 1 == cols);
    if (row.boundary)
      for (auto& c : row.cells) c.flags |= kCellIntervalUnreliable;
  } catch (const Error& e) {
    row.missing = true;
    row.missing_reason = e.what();
    row.boundary = false;
    for (auto& c : row.cells) {
      c = CellEstimate{};
      c.flags = kCellMissing;
    }
  }
  return row;
}

/// Strict: point estimates satisfy every constraint. Confidence-aware: each
/// constrained parameter's approximate interval overlaps its allowed range;
/// cells whose intervals are unreliable or unavailable keep their strict
/// outcome. Missing cells are never qualified.
inline std::vector<std::vector<bool>> qualify_surface(const MultiscaleSurface& s,
                                                      QualificationMode mode,
                                                      const QualificationBounds& bounds = {}) {
  if (mode == QualificationMode::confidence_aware && !s.has_intervals)
    throw ConfigError("confidence-aware filtering requires per-cell intervals");
  std::vector<std::vector<bool>> mask(s.rows.size(), std::vector<bool>(s.column_count(), false));
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    for (std::size_t c = 0; c < s.rows[r].cells.size(); ++c) {
      const CellEstimate& cell = s.rows[r].cells[c];
      if (cell.missing()) continue;
      const LpplsParams p = cell.point.params();
      const bool strict = qualify(p, std::nullopt, QualificationMode::strict, bounds).all();
      if (mode == QualificationMode::strict || !cell.intervals ||
          (cell.flags & kCellIntervalUnreliable)) {
        mask[r][c] = strict;
        continue;
      }
      mask[r][c] = qualify(p, cell.intervals, QualificationMode::confidence_aware, bounds).all();
    }
  }
  return mask;
}

/// Full surface. Rows that cannot be computed are marked missing and the
/// scan continues.
inline MultiscaleSurface scan(const PriceSeries& series, Date t2, const Range& dt_range,
                              const Range& tc_range, const ScanOptions& opt = {}) {
  MultiscaleSurface s;
  s.t2 = t2;
  s.t2_time = series.time_of(t2);
  s.tc_shift = opt.tc_shift;
  s.dt_values = dt_range.values();
  s.tc_offsets = tc_range.values();
  s.rows.resize(s.dt_values.size());
  parallel_for(s.dt_values.size(), opt.threads, [&](std::size_t r) {
    s.rows[r] = scan_row(series, t2, s.dt_values[r], s.tc_offsets, opt);
  });
  s.qualified_strict = qualify_surface(s, QualificationMode::strict, opt.bounds);
  s.qualified_confidence = qualify_surface(s, QualificationMode::confidence_aware, opt.bounds);
  return s;
}

/// Per-row threshold segments at several cutoffs plus both masks, in tc
/// offset units.
struct ContourRow {
  double dt = 0.0;
  bool boundary = false;
  bool missing = false;
  std::vector<LikelihoodInterval> intervals;  ///< one per cutoff
};

struct ContourSet {
  std::vector<double> cutoffs;
  std::vector<double> dt_values;
  std::vector<double> tc_offsets;
  std::vector<ContourRow> rows;
  std::vector<std::vector<bool>> qualified_strict;
  std::vector<std::vector<bool>> qualified_confidence;
};

inline std::vector<double> default_contour_cutoffs() { return {0.05, 0.5, 0.95}; }

inline ContourSet contour_export(const MultiscaleSurface& s,
                                 const std::vector<double>& cutoffs = default_contour_cutoffs()) {
  ContourSet out;
  out.cutoffs = cutoffs;
  out.dt_values = s.dt_values;
  out.tc_offsets = s.tc_offsets;
  out.qualified_strict = s.qualified_strict;
  out.qualified_confidence = s.qualified_confidence;
  for (const auto& row : s.rows) {
    ContourRow cr;
    cr.dt = row.dt;
    cr.boundary = row.boundary;
    cr.missing = row.missing;
    std::vector<double> rel(row.cells.size());
    for (std::size_t j = 0; j < rel.size(); ++j) rel[j] = row.cells[j].rel_lm;
    for (double c : cutoffs) {
      auto li = threshold_segments(s.tc_offsets, rel, c);
      li.boundary_touched = li.boundary_touched || row.boundary;
      cr.intervals.push_back(std::move(li));
    }
    out.rows.push_back(std::move(cr));
  }
  return out;
}

}  // namespace lppls
