// lppls: command-line front end for calibration, likelihood curves, nuisance
// profiles, multi-scale scans and synthetic data.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 convergence failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lppls/io.hpp"
#include "lppls/lppls.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lppls;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kConvergence = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string input;
  std::string t2;
  long window_days = 300;
  double tc_min_offset = -50;
  double tc_max_offset = 150;
  double tc_step = 1;
  double tc_shift = 0.5;
  double dt_min = 60;
  double dt_max = 700;
  double dt_step = 20;
  std::vector<double> cutoffs{kDefaultCutoff};
  std::string filter = "confidence";
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out_dir;
  unsigned threads = default_thread_count();
  int fill_gaps = -1;
  std::size_t min_observations = kDefaultMinObservations;
  std::optional<double> tc_offset;  // nuisance: fixed tc relative to t2
  // optimizer
  int max_iterations = 1000;
  double xtol = 1e-10;
  double ftol = 1e-10;
  double max_condition = 1e12;
  // synth
  bool paper_defaults = false;
  GeneratorSpec spec = default_paper_spec();
  std::string tc0, start, end;

  json to_json() const {
    json j = {{"command", command},
              {"input", input},
              {"t2", t2},
              {"window_days", window_days},
              {"tc_min_offset", tc_min_offset},
              {"tc_max_offset", tc_max_offset},
              {"tc_step", tc_step},
              {"tc_shift", tc_shift},
              {"dt_min", dt_min},
              {"dt_max", dt_max},
              {"dt_step", dt_step},
              {"cutoffs", cutoffs},
              {"filter", filter},
              {"seed", seed},
              {"format", format},
              {"out_dir", out_dir},
              {"threads", threads},
              {"fill_gaps", fill_gaps},
              {"min_observations", min_observations},
              {"optimizer",
               {{"method", "nelder_mead_multistart"},
                {"starts_m", {0.2, 0.5, 0.8}},
                {"starts_omega", {4, 7, 10, 13, 17}},
                {"box", {{"m", {0.01, 1.99}}, {"omega", {1, 50}}}},
                {"max_iterations", max_iterations},
                {"xtol", xtol},
                {"ftol", ftol},
                {"max_condition", max_condition}}},
              {"qualification_bounds",
               {{"m", {0.1, 0.9}}, {"omega", {6, 13}}, {"B", "< 0"}, {"damping_min", 0.8}}}};
    if (tc_offset) j["tc_offset"] = *tc_offset;
    return j;
  }

  CalibrationOptions calibration() const {
    CalibrationOptions o;
    o.nelder_mead.max_iterations = max_iterations;
    o.nelder_mead.xtol = xtol;
    o.nelder_mead.ftol = ftol;
    o.max_condition = max_condition;
    o.threads = 1;
    return o;
  }
};

struct Loaded {
  PriceSeries series;
  std::vector<GapRecord> gaps;
  Date t2;
};

Loaded load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw UsageError("--input is required");
  if (!fs::exists(cfg.input)) throw UsageError("input file not found: " + cfg.input);
  Loaded l;
  l.series = load_csv(cfg.input);
  if (l.series.empty()) throw DataError("input series is empty");
  if (cfg.fill_gaps >= 0) {
    auto filled = fill_gaps(l.series, cfg.fill_gaps);
    l.series = std::move(filled.series);
    l.gaps = std::move(filled.gaps);
  }
  l.t2 = cfg.t2.empty() ? l.series.back() : parse_date(cfg.t2);
  return l;
}

json with_header(const RunConfig& cfg, json body) {
  body["schema_version"] = io::kSchemaVersion;
  body["config"] = cfg.to_json();
  return body;
}

std::string comment_block(const RunConfig& cfg) {
  return "schema_version " + std::to_string(io::kSchemaVersion) + "\nconfig " + cfg.to_json().dump();
}

void ensure_dir(const std::string& d) {
  if (!d.empty()) fs::create_directories(d);
}

void write_text(const RunConfig& cfg, const std::string& name, const std::string& text) {
  std::ofstream out(fs::path(cfg.out_dir) / name, std::ios::binary);
  if (!out) throw DataError("cannot write " + (fs::path(cfg.out_dir) / name).string());
  out << text;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
  write_text(cfg, name, j.dump(2) + "\n");
}

/// Calendar date nearest to the numeric time tc.
std::string tc_date(const PriceSeries& s, double tc) {
  return format_date(s.date_of(std::lround(tc)));
}

struct Analysis {
  Observations obs;
  std::vector<double> grid;
  std::vector<ProfilePoint> profile;
  FitResult mle;
  double t2_time = 0.0;
  std::size_t n = 0;
};

Analysis analyze(const RunConfig& cfg, const Loaded& in) {
  if (cfg.window_days <= 0) throw UsageError("--window-days must be positive");
  const auto sub = window(in.series, Window::ending_at(in.t2, cfg.window_days), cfg.min_observations);
  Analysis a;
  a.obs = Observations::from(sub);
  a.n = a.obs.size();
  a.t2_time = in.series.time_of(in.t2);
  a.grid = make_tc_grid(a.t2_time, cfg.tc_min_offset, cfg.tc_max_offset, cfg.tc_step, cfg.tc_shift);
  CalibrationOptions opt = cfg.calibration();
  opt.threads = cfg.threads;
  a.profile = profile_f2(a.obs, a.grid, opt);
  a.mle = full_mle(a.obs, a.profile, opt);
  return a;
}

json fit_report(const RunConfig& cfg, const Loaded& in, const Analysis& a) {
  const auto& p = a.mle.params;
  json j;
  j["n"] = a.n;
  j["t2"] = format_date(in.t2);
  j["params"] = io::to_json(p);
  j["tc_offset_days"] = p.nonlinear.tc - a.t2_time;
  j["tc_date"] = tc_date(in.series, p.nonlinear.tc);
  j["sse"] = a.mle.sse;
  j["s_mle"] = sigma2_mle(a.mle.sse, a.n);
  j["s_unbiased"] = a.n > 7 ? json(sigma2_unbiased(a.mle.sse, a.n)) : json(nullptr);
  j["damping"] = io::number(damping(p));
  j["qualification"] = io::to_json(qualify(p, std::nullopt, QualificationMode::strict));
  j["diagnostics"] = {{"converged", a.mle.converged},
                      {"n_restarts_used", a.mle.n_restarts_used},
                      {"condition_number", a.mle.condition_number},
                      {"boundary", a.mle.boundary},
                      {"grid_argmin_offset", a.grid[a.mle.grid_argmin] - a.t2_time}};
  if (!in.gaps.empty() || cfg.fill_gaps >= 0) j["gaps"] = io::gap_report(in.gaps);
  return j;
}

int finish(const RunConfig& cfg, const json& report, bool converged) {
  std::cout << with_header(cfg, report).dump(2) << "\n";
  if (!converged) {
    std::cerr << "lppls: optimizer did not converge at the selected optimum\n";
    return kConvergence;
  }
  return kOk;
}

int cmd_fit(const RunConfig& cfg) {
  const Loaded in = load_input(cfg);
  const Analysis a = analyze(cfg, in);
  const json report = fit_report(cfg, in, a);
  if (!cfg.out_dir.empty()) {
    ensure_dir(cfg.out_dir);
    write_json(cfg, "fit.json", with_header(cfg, report));
  }
  return finish(cfg, report, a.mle.converged);
}

int cmd_profile(const RunConfig& cfg) {
  const Loaded in = load_input(cfg);
  const Analysis a = analyze(cfg, in);
  const LikelihoodCurve curve = modified_profile_likelihood(a.obs, a.profile, a.mle, cfg.threads);

  json report = fit_report(cfg, in, a);
  json intervals = json::object();
  bool boundary = false;
  for (auto kind : {CurveKind::lp, CurveKind::lm}) {
    const std::string name = kind == CurveKind::lp ? "lp" : "lm";
    json list = json::array();
    for (double c : cfg.cutoffs) {
      LikelihoodInterval li = likelihood_interval(curve, kind, c);
      for (auto& s : li.segments) {
        s.lo -= a.t2_time;
        s.hi -= a.t2_time;
      }
      boundary = boundary || li.boundary_touched;
      list.push_back(io::to_json(li, "tc_offset_days"));
    }
    intervals[name] = list;
  }
  report["intervals"] = intervals;
  report["boundary_warning"] = boundary;
  if (boundary) std::cerr << "lppls: warning: a likelihood interval touches the tc grid boundary\n";

  // Per-tc nuisance estimates with approximate half-widths at the first cutoff.
  std::ostringstream nuis;
  nuis << "# " << "config " << cfg.to_json().dump() << "\n";
  nuis << "tc_offset_days,m_hat,m_half_width,omega_hat,omega_half_width,damping_hat,damping_half_width,flag\n";
  for (std::size_t k = 0; k < a.profile.size(); ++k) {
    const ProfilePoint& p = a.profile[k];
    std::optional<NuisanceIntervals> ni;
    if (!(curve.flags[k] & kLpExcluding)) ni = approx_nuisance_intervals(fisher_blocks(a.obs, p), cfg.cutoffs.front());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    nuis << io::format_double(p.tc - a.t2_time) << ',' << io::format_double(p.m_hat) << ','
         << io::format_double(ni ? ni->m.half_width : nan) << ',' << io::format_double(p.omega_hat) << ','
         << io::format_double(ni ? ni->omega.half_width : nan) << ','
         << io::format_double(std::isfinite(p.f2) ? damping(p.params()) : nan) << ','
         << io::format_double(ni ? ni->damping.half_width : nan) << ',' << curve.flags[k] << '\n';
  }

  if (!cfg.out_dir.empty()) {
    ensure_dir(cfg.out_dir);
    if (cfg.format == "csv") {
      std::ostringstream cs;
      io::write_curve_csv(cs, curve, a.t2_time, comment_block(cfg));
      write_text(cfg, "curve.csv", cs.str());
    } else {
      json cj = {{"tc_offset_days", json::array()}, {"f2", json::array()}, {"log_lp", json::array()},
                 {"log_lm", json::array()}, {"rel_lp", json::array()}, {"rel_lm", json::array()},
                 {"flag", curve.flags}};
      for (std::size_t k = 0; k < curve.size(); ++k) {
        cj["tc_offset_days"].push_back(curve.grid[k] - a.t2_time);
        cj["f2"].push_back(io::number(curve.f2[k]));
        cj["log_lp"].push_back(io::number(curve.log_lp[k]));
        cj["log_lm"].push_back(io::number(curve.log_lm[k]));
        cj["rel_lp"].push_back(io::number(curve.rel_lp[k]));
        cj["rel_lm"].push_back(io::number(curve.rel_lm[k]));
      }
      write_json(cfg, "curve.json", with_header(cfg, cj));
    }
    write_json(cfg, "intervals_lp.json", with_header(cfg, {{"intervals", intervals["lp"]}}));
    write_json(cfg, "intervals_lm.json", with_header(cfg, {{"intervals", intervals["lm"]}}));
    write_text(cfg, "nuisance_by_tc.csv", nuis.str());
    write_json(cfg, "profile_report.json", with_header(cfg, report));
  }
  return finish(cfg, report, a.mle.converged);
}

json curve_json(const LikelihoodCurve& c) {
  json j = {{"value", c.grid}, {"f2", json::array()}, {"rel_lp", json::array()},
            {"rel_lm", json::array()}, {"flag", c.flags}};
  for (std::size_t k = 0; k < c.size(); ++k) {
    j["f2"].push_back(io::number(c.f2[k]));
    j["rel_lp"].push_back(io::number(c.rel_lp[k]));
    j["rel_lm"].push_back(io::number(c.rel_lm[k]));
  }
  return j;
}

int cmd_nuisance(const RunConfig& cfg) {
  const Loaded in = load_input(cfg);
  const Analysis a = analyze(cfg, in);
  ProfilePoint ref;
  if (cfg.tc_offset) {
    CalibrationOptions opt = cfg.calibration();
    ref = minimize_f1(a.obs, a.t2_time + *cfg.tc_offset, opt);
  } else {
    const auto& p = a.mle.params;
    ref.tc = p.nonlinear.tc;
    ref.m_hat = p.nonlinear.m;
    ref.omega_hat = p.nonlinear.omega;
    ref.linear = p.linear;
    ref.f2 = a.mle.sse;
    ref.s_hat = p.s;
    ref.n = a.n;
    ref.converged = a.mle.converged;
  }
  CalibrationOptions opt = cfg.calibration();
  opt.threads = cfg.threads;
  const FisherBlocks fb = fisher_blocks(a.obs, ref);
  const auto approx = approx_nuisance_intervals(fb, cfg.cutoffs.front());

  json report;
  report["tc_offset_days"] = ref.tc - a.t2_time;
  report["tc_date"] = tc_date(in.series, ref.tc);
  report["reference"] = io::to_json(ref.params());
  report["damping"] = io::number(damping(ref.params()));
  if (approx) {
    report["approx_intervals"] = {io::to_json(approx->m), io::to_json(approx->omega), io::to_json(approx->damping)};
    report["qualification_confidence"] =
        io::to_json(qualify(ref.params(), approx, QualificationMode::confidence_aware));
  }
  report["qualification_strict"] = io::to_json(qualify(ref.params(), std::nullopt, QualificationMode::strict));

  for (auto which : {NuisanceParameter::m, NuisanceParameter::omega}) {
    const auto grid = which == NuisanceParameter::m ? default_m_grid() : default_omega_grid();
    const LikelihoodCurve c = nuisance_profile(a.obs, ref, which, grid, opt);
    json lis = json::array();
    for (double cut : cfg.cutoffs)
      for (auto kind : {CurveKind::lp, CurveKind::lm}) {
        json li = io::to_json(likelihood_interval(c, kind, cut), to_string(which));
        li["curve"] = kind == CurveKind::lp ? "lp" : "lm";
        lis.push_back(li);
      }
    report[std::string("profile_") + to_string(which)] = {{"intervals", lis},
                                                         {"curves_disagree", curves_disagree(c, cfg.cutoffs.front())}};
    if (!cfg.out_dir.empty()) {
      ensure_dir(cfg.out_dir);
      write_json(cfg, std::string("nuisance_") + to_string(which) + ".json",
                 with_header(cfg, {{"parameter", to_string(which)}, {"curve", curve_json(c)}, {"intervals", lis}}));
    }
  }
  if (!cfg.out_dir.empty()) write_json(cfg, "nuisance_report.json", with_header(cfg, report));
  return finish(cfg, report, ref.converged);
}

int cmd_multiscale(const RunConfig& cfg) {
  const Loaded in = load_input(cfg);
  ScanOptions opt;
  opt.calibration = cfg.calibration();
  opt.qualification_cutoff = cfg.cutoffs.front();
  opt.min_observations = cfg.min_observations;
  opt.tc_shift = cfg.tc_shift;
  opt.threads = cfg.threads;
  const MultiscaleSurface s = scan(in.series, in.t2, {cfg.dt_min, cfg.dt_max, cfg.dt_step},
                                   {cfg.tc_min_offset, cfg.tc_max_offset, cfg.tc_step}, opt);
  std::size_t completed = 0, strict_count = 0, conf_count = 0;
  json failures = json::array();
  for (std::size_t r = 0; r < s.rows.size(); ++r) {
    if (s.rows[r].missing) failures.push_back({{"dt", s.rows[r].dt}, {"reason", s.rows[r].missing_reason}});
    else ++completed;
    for (std::size_t c = 0; c < s.column_count(); ++c) {
      strict_count += s.qualified_strict[r][c];
      conf_count += s.qualified_confidence[r][c];
    }
  }
  json report = {{"t2", format_date(in.t2)},
                 {"rows", s.rows.size()},
                 {"columns", s.column_count()},
                 {"rows_completed", completed},
                 {"row_failures", failures},
                 {"boundary_rows", s.boundary_rows()},
                 {"filter", cfg.filter},
                 {"accepted_strict", strict_count},
                 {"accepted_confidence", conf_count}};
  if (cfg.filter != "none")
    report["accepted"] = cfg.filter == "strict" ? strict_count : conf_count;
  if (!in.gaps.empty() || cfg.fill_gaps >= 0) report["gaps"] = io::gap_report(in.gaps);
  for (const auto& f : failures) std::cerr << "lppls: row dt=" << f["dt"] << " failed: " << f["reason"].get<std::string>() << "\n";

  if (!cfg.out_dir.empty()) {
    ensure_dir(cfg.out_dir);
    json sj = io::to_json(s);
    sj["config"] = cfg.to_json();
    sj["filter"] = cfg.filter;
    write_json(cfg, "surface.json", sj);
    std::ostringstream cs;
    io::write_surface_csv(cs, s, comment_block(cfg));
    write_text(cfg, "surface.csv", cs.str());
    std::vector<double> cutoffs = default_contour_cutoffs();
    json cj = io::to_json(contour_export(s, cutoffs));
    cj["config"] = cfg.to_json();
    write_json(cfg, "contours.json", cj);
    write_json(cfg, "multiscale_report.json", with_header(cfg, report));
  }
  std::cout << with_header(cfg, report).dump(2) << "\n";
  if (completed == 0) {
    std::cerr << "lppls: no window size could be computed\n";
    return kData;
  }
  return kOk;
}

int cmd_synth(RunConfig cfg) {
  GeneratorSpec spec = cfg.spec;
  if (!cfg.tc0.empty()) {
    const Date tc0 = parse_date(cfg.tc0);
    const auto shift = tc0 - spec.tc0;
    spec.tc0 = tc0;
    spec.start += shift;
    spec.end += shift;
  }
  if (!cfg.start.empty()) spec.start = parse_date(cfg.start);
  if (!cfg.end.empty()) spec.end = parse_date(cfg.end);
  spec.seed = cfg.seed;
  if (!(spec.sigma0 >= 0.0)) throw UsageError("--sigma must be >= 0");
  if (!(spec.start <= spec.end)) throw UsageError("--start must not follow --end");
  if (!(spec.omega0 > 0.0)) throw UsageError("--omega must be positive");
  const GeneratedSeries g = generate(spec);
  for (Date d : g.skipped) std::cerr << "lppls: skipped sample date " << format_date(d) << " (equals tc0)\n";

  json meta = {{"schema_version", io::kSchemaVersion},
               {"spec", io::to_json(spec)},
               {"paper_defaults", cfg.paper_defaults},
               {"n", g.series.size()},
               {"skipped_dates", json::array()},
               {"config", cfg.to_json()}};
  for (Date d : g.skipped) meta["skipped_dates"].push_back(format_date(d));
  std::ostringstream csv;
  io::write_series_csv(csv, g.series);
  if (cfg.out_dir.empty()) {
    std::cout << csv.str();
    std::cerr << meta.dump(2) << "\n";
    return kOk;
  }
  ensure_dir(cfg.out_dir);
  write_text(cfg, "series.csv", csv.str());
  write_json(cfg, "series.meta.json", meta);
  std::cout << meta.dump(2) << "\n";
  return kOk;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--input", cfg.input, "CSV file with header date,close");
  sub->add_option("--t2", cfg.t2, "analysis date YYYY-MM-DD (default: last date)");
  sub->add_option("--tc-min-offset", cfg.tc_min_offset, "first tc offset from t2 in days")->capture_default_str();
  sub->add_option("--tc-max-offset", cfg.tc_max_offset, "last tc offset from t2 in days")->capture_default_str();
  sub->add_option("--tc-step", cfg.tc_step, "tc grid step in days")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--tc-shift", cfg.tc_shift, "shift of tc off integer days")->capture_default_str();
  sub->add_option("--cutoff", cfg.cutoffs, "relative likelihood cutoff (repeatable)")
      ->capture_default_str()->check(CLI::Range(1e-12, 1.0 - 1e-12));
  sub->add_option("--threads", cfg.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  sub->add_option("--out-dir", cfg.out_dir, "directory for output files");
  sub->add_option("--fill-gaps", cfg.fill_gaps, "carry closes forward over closures up to this many days");
  sub->add_option("--min-observations", cfg.min_observations, "observation floor per window")->capture_default_str();
  sub->add_option("--max-iterations", cfg.max_iterations, "Nelder-Mead iterations per start")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LPPLS calibration and likelihood inference"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* fit = app.add_subcommand("fit", "full MLE over the tc grid");
  auto* profile = app.add_subcommand("profile", "profile and modified profile likelihood of tc");
  auto* nuisance = app.add_subcommand("nuisance", "likelihood profiles of m and omega at fixed tc");
  auto* multiscale = app.add_subcommand("multiscale", "multi-scale modified profile likelihood surface");
  auto* synth = app.add_subcommand("synth", "generate an LPPLS series with Gaussian noise");

  for (auto* sub : {fit, profile, nuisance}) {
    add_common(sub, cfg);
    sub->add_option("--window-days", cfg.window_days, "calibration window length in days")->capture_default_str();
  }
  nuisance->add_option("--tc-offset", cfg.tc_offset, "fixed tc offset from t2 (default: MLE)");
  add_common(multiscale, cfg);
  multiscale->add_option("--dt-min", cfg.dt_min, "smallest window in days")->capture_default_str();
  multiscale->add_option("--dt-max", cfg.dt_max, "largest window in days")->capture_default_str();
  multiscale->add_option("--dt-step", cfg.dt_step, "window step in days")->capture_default_str()->check(CLI::PositiveNumber);
  multiscale->add_option("--filter", cfg.filter, "qualification mask reported")
      ->check(CLI::IsMember({"strict", "confidence", "none"}))->capture_default_str();

  synth->add_flag("--paper-defaults", cfg.paper_defaults, "use the reference generator parameters (default)");
  synth->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  synth->add_option("--out-dir", cfg.out_dir, "directory for series.csv and series.meta.json");
  synth->add_option("--tc0", cfg.tc0, "critical date (shifts the default span with it)");
  synth->add_option("--start", cfg.start, "first sample date");
  synth->add_option("--end", cfg.end, "last sample date");
  synth->add_option("--m", cfg.spec.m0, "power-law exponent")->capture_default_str();
  synth->add_option("--omega", cfg.spec.omega0, "log-periodic angular frequency")->capture_default_str();
  synth->add_option("--phi", cfg.spec.phi0, "log-periodic phase")->capture_default_str();
  synth->add_option("--A", cfg.spec.A0, "log-price level")->capture_default_str();
  synth->add_option("--B", cfg.spec.B0, "power-law amplitude")->capture_default_str();
  synth->add_option("--C", cfg.spec.C0, "log-periodic amplitude")->capture_default_str();
  synth->add_option("--sigma", cfg.spec.sigma0, "noise standard deviation")->capture_default_str();
  synth->add_flag("!--calendar-days", cfg.spec.business_days_only, "sample every calendar day");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (fit->parsed()) cfg.command = "fit";
    if (profile->parsed()) cfg.command = "profile";
    if (nuisance->parsed()) cfg.command = "nuisance";
    if (multiscale->parsed()) cfg.command = "multiscale";
    if (synth->parsed()) cfg.command = "synth";
    if (cfg.tc_max_offset < cfg.tc_min_offset) throw UsageError("--tc-max-offset is below --tc-min-offset");
    if (cfg.dt_max < cfg.dt_min) throw UsageError("--dt-max is below --dt-min");
    if (cfg.cutoffs.empty()) throw UsageError("at least one --cutoff is required");

    if (cfg.command == "fit") return cmd_fit(cfg);
    if (cfg.command == "profile") return cmd_profile(cfg);
    if (cfg.command == "nuisance") return cmd_nuisance(cfg);
    if (cfg.command == "multiscale") return cmd_multiscale(cfg);
    return cmd_synth(cfg);
  } catch (const UsageError& e) {
    std::cerr << "lppls: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "lppls: " << e.what() << "\n";
    return kUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "lppls: " << e.what() << "\n";
    return kConvergence;
  } catch (const Error& e) {
    std::cerr << "lppls: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "lppls: " << e.what() << "\n";
    return kData;
  }
}
