#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "lppls/error.hpp"
#include "lppls/model.hpp"
#include "lppls/series.hpp"

namespace lppls {

/// Name recorded in metadata for the normal variate stream below.
inline constexpr const char* kNormalGeneratorName = "mt19937_64+polar-v1";

/// Standard normal variates: 53-bit uniforms from mt19937_64 fed to the
/// Marsaglia polar method. Written out rather than using
/// std::normal_distribution, whose output is implementation-defined.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double k = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * k;
    has_spare_ = true;
    return u * k;
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct GeneratorSpec {
  Date tc0 = make_date(1975, 2, 9);
  double m0 = 0.8;
  double omega0 = 9.0;
  double phi0 = 0.0;
  double A0 = 8.0;
  double B0 = -0.015;
  double C0 = 0.0015;
  double sigma0 = 0.03;
  Date start = make_date(1975, 2, 9) - std::chrono::days{800};
  Date end = make_date(1975, 2, 9) - std::chrono::days{1};
  bool business_days_only = true;
  std::uint64_t seed = 0;

  LinearParams linear() const { return LinearParams::from_phase(A0, B0, C0, phi0); }
  double damping() const { return lppls::damping(m0, B0, omega0, linear().C1, linear().C2); }
};

/// tc0 = 1975-02-09, m = 0.8, omega = 9, phi = 0, A = 8, B = -0.015,
/// C = 0.0015, sigma = 0.03; business days from 800 days before tc0 to the
/// day before it.
inline GeneratorSpec default_paper_spec() { return {}; }

struct GeneratedSeries {
  PriceSeries series;
  /// Sample dates dropped because they coincide with tc0.
  std::vector<Date> skipped;
};

/// log p(t) = LPPLS(t) + sigma0 eps(t), eps iid N(0, 1) from a stream seeded
/// with spec.seed. Numeric time origin is the first sample date.
inline GeneratedSeries generate(const GeneratorSpec& spec) {
  if (!(spec.sigma0 >= 0.0) || !std::isfinite(spec.sigma0)) throw ConfigError("sigma0 must be >= 0");
  if (!(spec.start <= spec.end)) throw ConfigError("generator start must not follow its end");
  if (!(spec.omega0 > 0.0)) throw ConfigError("omega0 must be positive");
  NormalStream noise(spec.seed);
  const LinearParams lin = spec.linear();
  GeneratedSeries out;
  std::vector<Date> dates;
  std::vector<double> y;
  Date origin{};
  bool have_origin = false;
  for (Date d = spec.start; d <= spec.end; d += std::chrono::days{1}) {
    if (spec.business_days_only && !is_business_day(d)) continue;
    if (d == spec.tc0) {
      out.skipped.push_back(d);
      continue;
    }
    if (!have_origin) {
      origin = d;
      have_origin = true;
    }
    const double t = static_cast<double>(days_between(origin, d));
    const double tc = static_cast<double>(days_between(origin, spec.tc0));
    const double clean = lppls_eval(t, {tc, spec.m0, spec.omega0}, lin);
    const double eps = noise();
    dates.push_back(d);
    y.push_back(spec.sigma0 == 0.0 ? clean : clean + spec.sigma0 * eps);
  }
  if (dates.empty()) throw ConfigError("generator span contains no sample dates");
  out.series = PriceSeries(std::move(dates), std::move(y), origin);
  return out;
}

/// True parameters on the numeric axis of `series`.
inline LpplsParams true_params(const GeneratorSpec& spec, const PriceSeries& series) {
  return {{series.time_of(spec.tc0), spec.m0, spec.omega0}, spec.linear(), spec.sigma0 * spec.sigma0};
}

}  // namespace lppls
