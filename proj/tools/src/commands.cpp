#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "paretotab/error.hpp"
#include "paretotab/pareto.hpp"
#include "paretotab/sampleframe.hpp"
#include "paretotab/serialize.hpp"
#include "svg.hpp"

#ifndef PARETOTAB_VERSION
#define PARETOTAB_VERSION "0.0.0"
#endif

namespace paretotab::cli {

using nlohmann::ordered_json;

std::string_view tool_version() { return PARETOTAB_VERSION; }

namespace {

std::string num(double v) { return fmt::format("{}", v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }
ordered_json jnum(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

int exit_code(std::size_t failed, std::size_t total) {
  if (total > 0 && failed == total) return kExitFatal;
  return failed > 0 ? kExitPartial : kExitOk;
}

// Writes result files into the output directory, each stamped with the tool
// version and manifest hash.
class OutputWriter {
 public:
  explicit OutputWriter(const RunManifest& m)
      : dir_(m.out_dir),
        stamp_(fmt::format("paretotab {} command={} manifest={}", tool_version(), to_string(m.command),
                           m.hash())) {
    std::filesystem::create_directories(dir_);
  }

  void csv(const std::string& name, const std::string& body) { write(name, "# " + stamp_ + '\n' + body); }

  void json(const std::string& name, const ordered_json& body) {
    ordered_json doc;
    doc["generator"] = stamp_;
    for (const auto& [k, v] : body.items()) doc[k] = v;
    write(name, doc.dump(2) + '\n');
  }

  void svg(const std::string& name, const LineChart& chart) { write(name, render_svg(chart, stamp_)); }

  const std::vector<std::string>& written() const { return written_; }

 private:
  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path.string());
    f << content;
    if (!f) throw Error("error writing " + path.string());
    written_.push_back(path.string());
  }

  std::filesystem::path dir_;
  std::string stamp_;
  std::vector<std::string> written_;
};

using DatasetMap = std::map<int, std::map<IncomeConcept, Tabulation>>;

bool concept_selected(const RunManifest& m, IncomeConcept c) {
  return m.concept_filter == "all" || income_concept_from_string(m.concept_filter) == c;
}

std::string label(int year, IncomeConcept c) { return fmt::format("{} {}", year, to_string(c)); }

// Loads, cleans and filters the input tabulations. Capital is derived for
// years that have AGI and AGI-ranked wages but no capital table.
DatasetMap load_inputs(const RunManifest& m, std::ostream& err, bool derive = true) {
  DatasetMap data;
  for (const auto& path : m.inputs) {
    auto t = merge_zero_count_groups(parse_tabulation(path));
    if (t.year == 0) throw ValidationError(path + ": no year; add year=... to the .meta sidecar");
    if (!m.years.contains(t.year)) continue;
    auto& slot = data[t.year];
    if (slot.contains(t.income_concept)) {
      throw ValidationError(fmt::format("two {} tables for {}", to_string(t.income_concept), t.year));
    }
    slot.emplace(t.income_concept, std::move(t));
  }
  if (derive) {
    for (auto& [year, tabs] : data) {
      const auto agi = tabs.find(IncomeConcept::kAgi);
      const auto wages = tabs.find(IncomeConcept::kWages);
      if (agi == tabs.end() || wages == tabs.end() || tabs.contains(IncomeConcept::kCapital)) continue;
      if (!concept_selected(m, IncomeConcept::kCapital)) continue;
      try {
        auto derived = derive_capital(agi->second, wages->second);
        if (!derived.negative_groups.empty()) {
          err << fmt::format("note: {} capital has {} group(s) with negative totals\n", year,
                             derived.negative_groups.size());
        }
        tabs.emplace(IncomeConcept::kCapital, std::move(derived.capital));
      } catch (const Error& e) {
        err << fmt::format("note: capital not derived for {}: {}\n", year, e.what());
      }
    }
  }
  for (auto& [year, tabs] : data) {
    std::erase_if(tabs, [&](const auto& kv) { return !concept_selected(m, kv.first); });
  }
  std::erase_if(data, [](const auto& kv) { return kv.second.empty(); });
  if (data.empty()) throw ValidationError("no input tabulation matches the selected years and concept");
  return data;
}

// Resolves the population of potential tax units for a year: an explicit
// --population, then population_n in the metadata, then the demographic series.
class PopulationSource {
 public:
  explicit PopulationSource(const RunManifest& m) : m_(m) {
    if (!m.population_csv.empty()) series_ = fill_intercensal(load_demographics(m.population_csv));
  }

  double for_year(int year, const Tabulation& t) {
    if (m_.population) return *m_.population;
    if (t.population_n) return static_cast<double>(*t.population_n);
    if (!series_) {
      throw ValidationError(fmt::format(
          "no population for {}: give --population, population_n in the metadata, or --population-csv", year));
    }
    if (m_.alt_population) return alt_units(*series_, year);
    if (year >= m_.cutover) return potential_units(*series_, year, m_.cutover);
    if (!regression_) regression_ = fit_joint_share_regression(*series_, m_.cutover);
    return potential_units(*series_, year, m_.cutover, *regression_);
  }

 private:
  const RunManifest& m_;
  std::optional<DemographicSeries> series_;
  std::optional<JointShareRegression> regression_;
};

EstimateResult run_method(Method method, const Tabulation& t, double n, const RunManifest& m) {
  switch (method) {
    case Method::kTw:
      return tw_estimate(t, n, m.tw);
    case Method::kMl: {
      // Every group inside the top fraction, i.e. one more than TW's L.
      const int L = select_top_groups(cumulate(t), n, m.tw.top_fraction) + 1;
      return ml_estimate(t, L);
    }
    case Method::kFp:
      if (!t.thresholds_measure_concept()) {
        throw EstimationError(fmt::format("FP needs thresholds of {} itself; this table is ranked by {}",
                                          to_string(t.income_concept), to_string(t.ranked_by)));
      }
      return fp_estimate(cumulate(t), n);
    case Method::kAp:
      return ap_estimate(share_curve_from_tabulation(t, n));
  }
  throw Error("unknown method");
}

int cmd_ingest(const RunManifest& m, std::ostream& out, std::ostream& err) {
  OutputWriter w(m);
  const auto data = load_inputs(m, err);
  std::ostringstream csv;
  csv << "year,concept,column,group_sum,published,delta,pass\n";
  auto rows = ordered_json::array();
  std::size_t failed = 0;
  for (const auto& [year, tabs] : data) {
    for (const auto& [c, t] : tabs) {
      const auto report = validate_totals(t);
      if (!report.passed) ++failed;
      for (const auto& col : report.columns) {
        const std::string published = col.published ? std::to_string(*col.published) : "";
        csv << year << ',' << to_string(c) << ',' << col.column << ',' << col.group_sum << ',' << published << ','
            << col.delta() << ',' << (col.ok ? "true" : "false") << '\n';
        ordered_json r;
        r["year"] = year;
        r["concept"] = to_string(c);
        r["column"] = col.column;
        r["group_sum"] = col.group_sum;
        r["published"] = col.published ? ordered_json(*col.published) : ordered_json(nullptr);
        r["delta"] = col.delta();
        r["pass"] = col.ok;
        rows.push_back(std::move(r));
      }
      std::ostringstream body, meta;
      write_tabulation_csv(body, t);
      write_metadata(meta, t);
      const auto stem = fmt::format("{}_{}", year, to_string(c));
      w.csv(stem + ".csv", body.str());
      w.csv(stem + ".meta", meta.str());
      out << fmt::format("{}: {} groups, totals {}\n", label(year, c), t.groups.size(),
                         report.passed ? "consistent" : "INCONSISTENT");
    }
  }
  if (m.wants("csv")) w.csv("validation.csv", csv.str());
  if (m.wants("json")) w.json("validation.json", {{"validation", rows}});
  return failed > 0 ? kExitPartial : kExitOk;
}

int cmd_estimate(const RunManifest& m, std::ostream& out, std::ostream& err) {
  const auto data = load_inputs(m, err);
  PopulationSource pop(m);
  OutputWriter w(m);
  std::ostringstream csv;
  csv << "year,concept,method,n,alpha_hat,se,L_used,iterations,objective_value,warnings,error\n";
  auto rows = ordered_json::array();
  std::map<std::string, ChartSeries> series;
  std::size_t failed = 0, total = 0;
  for (const auto& [year, tabs] : data) {
    for (const auto& [c, t] : tabs) {
      std::optional<double> n;
      std::string pop_error;
      try {
        n = pop.for_year(year, t);
      } catch (const Error& e) {
        pop_error = e.what();
      }
      for (Method method : m.methods) {
        ++total;
        std::optional<EstimateResult> r;
        std::string error = pop_error;
        if (n) {
          try {
            r = run_method(method, t, *n, m);
          } catch (const Error& e) {
            error = e.what();
          }
        }
        if (!r) ++failed;
        std::string warnings;
        if (r) {
          for (const auto& wmsg : r->warnings) warnings += (warnings.empty() ? "" : "; ") + wmsg;
        }
        csv << year << ',' << to_string(c) << ',' << to_string(method) << ',' << num(n) << ','
            << (r ? num(r->alpha_hat) : "") << ',' << (r ? num(r->se) : "") << ',' << (r ? std::to_string(r->L_used) : "")
            << ',' << (r ? std::to_string(r->iterations) : "") << ',' << (r ? num(r->objective_value) : "") << ','
            << csv_escape(warnings) << ',' << csv_escape(error) << '\n';
        ordered_json j;
        j["year"] = year;
        j["concept"] = to_string(c);
        j["n"] = jnum(n);
        if (r) {
          const auto est = ordered_json::parse(to_json(*r));
          for (const auto& [k, v] : est.items()) j[k] = v;
        } else {
          j["method"] = to_string(method);
        }
        j["error"] = error;
        rows.push_back(std::move(j));
        auto& s = series[fmt::format("{} {}", to_string(c), to_string(method))];
        s.name = fmt::format("{} {}", to_string(c), to_string(method));
        s.points.emplace_back(year, r ? r->alpha_hat : std::nan(""));
        if (r) {
          out << fmt::format("{} {}: alpha = {:.4f}{}\n", label(year, c), to_string(method), r->alpha_hat,
                             r->se ? fmt::format(" (se {:.2e})", *r->se) : "");
        } else {
          err << fmt::format("{} {}: failed: {}\n", label(year, c), to_string(method), error);
        }
      }
    }
  }
  if (m.wants("csv")) w.csv("estimates.csv", csv.str());
  if (m.wants("json")) w.json("estimates.json", {{"estimates", rows}});
  if (m.wants("svg")) {
    LineChart chart{"Pareto exponent estimates", "year", "alpha", false, false, {}};
    for (auto& [k, s] : series) chart.series.push_back(std::move(s));
    w.svg("estimates.svg", chart);
  }
  return exit_code(failed, total);
}

int cmd_scan(const RunManifest& m, std::ostream& out, std::ostream& err) {
  const auto data = load_inputs(m, err);
  PopulationSource pop(m);
  OutputWriter w(m);
  std::ostringstream csv;
  csv << "year,concept,n,L,threshold,fractile,alpha_hat,se,error\n";
  auto rows = ordered_json::array();
  LineChart chart{"Estimate by tail cutoff", "lower threshold of group L+1", "alpha", true, false, {}};
  std::size_t failed = 0, total = 0;
  for (const auto& [year, tabs] : data) {
    for (const auto& [c, t] : tabs) {
      ++total;
      std::vector<ScanPoint> scan;
      std::optional<double> n;
      try {
        n = pop.for_year(year, t);
        scan = tail_scan(t, *n, m.tw);
      } catch (const Error& e) {
        err << fmt::format("{}: scan failed: {}\n", label(year, c), e.what());
      }
      std::size_t ok = 0;
      ChartSeries mid{label(year, c), {}, false}, lo{label(year, c) + " -1.96 se", {}, true},
          hi{label(year, c) + " +1.96 se", {}, true};
      for (const auto& p : scan) {
        if (p.alpha_hat) ++ok;
        csv << year << ',' << to_string(c) << ',' << num(n) << ',' << p.L << ',' << num(p.threshold) << ','
            << num(p.fractile) << ',' << num(p.alpha_hat) << ',' << num(p.se) << ',' << csv_escape(p.error) << '\n';
        ordered_json j;
        j["year"] = year;
        j["concept"] = to_string(c);
        j["n"] = jnum(n);
        j["L"] = p.L;
        j["threshold"] = jnum(p.threshold);
        j["fractile"] = p.fractile;
        j["alpha_hat"] = jnum(p.alpha_hat);
        j["se"] = jnum(p.se);
        j["error"] = p.error;
        rows.push_back(std::move(j));
        const double x = p.threshold.value_or(std::nan(""));
        const double a = p.alpha_hat.value_or(std::nan(""));
        const double s = p.se.value_or(std::nan(""));
        mid.points.emplace_back(x, a);
        lo.points.emplace_back(x, a - 1.96 * s);
        hi.points.emplace_back(x, a + 1.96 * s);
      }
      if (ok == 0) ++failed;
      out << fmt::format("{}: {} of {} cutoffs estimated\n", label(year, c), ok, scan.size());
      chart.series.push_back(std::move(mid));
      chart.series.push_back(std::move(lo));
      chart.series.push_back(std::move(hi));
    }
  }
  if (m.wants("csv")) w.csv("scan.csv", csv.str());
  if (m.wants("json")) w.json("scan.json", {{"scan", rows}});
  if (m.wants("svg")) w.svg("scan.svg", chart);
  return exit_code(failed, total);
}

int cmd_shares(const RunManifest& m, std::ostream& out, std::ostream& err) {
  const auto data = load_inputs(m, err);
  PopulationSource pop(m);
  OutputWriter w(m);
  std::ostringstream curve_csv, implied_csv;
  curve_csv << "year,concept,fractile,share\n";
  implied_csv << "year,concept,alpha,alpha_source,share_top1,share_top01_spline,share_top01_implied,error\n";
  auto curves = ordered_json::array();
  auto implied = ordered_json::array();
  LineChart chart{"Top income shares", "top fractile p", "share S(p)", true, true, {}};
  std::size_t failed = 0, total = 0;
  for (const auto& [year, tabs] : data) {
    for (const auto& [c, t] : tabs) {
      ++total;
      std::optional<ShareCurve> curve;
      std::optional<double> alpha, top1, top01_spline, top01_implied;
      std::string source = m.implied_alpha ? "given" : "TW";
      std::string error;
      try {
        const double n = pop.for_year(year, t);
        curve = share_curve_from_tabulation(t, n);
        alpha = m.implied_alpha ? *m.implied_alpha : tw_estimate(t, n, m.tw).alpha_hat;
        top1 = interpolate_share(*curve, 0.01);
        top01_spline = interpolate_share(*curve, 0.001);
        top01_implied = implied_share(*top1, 0.01, 0.001, *alpha);
      } catch (const Error& e) {
        error = e.what();
        err << fmt::format("{}: shares failed: {}\n", label(year, c), error);
      }
      if (!curve) ++failed;
      ordered_json jc;
      jc["year"] = year;
      jc["concept"] = to_string(c);
      jc["points"] = ordered_json::array();
      if (curve) {
        ChartSeries s{label(year, c), {}, false};
        for (const auto& p : curve->points()) {
          curve_csv << year << ',' << to_string(c) << ',' << num(p.fractile) << ',' << num(p.share) << '\n';
          jc["points"].push_back({{"fractile", p.fractile}, {"share", p.share}});
          s.points.emplace_back(p.fractile, p.share);
        }
        chart.series.push_back(std::move(s));
        if (alpha && top1) {
          // Pareto line through the top-1% point, over the fractiles below it.
          ChartSeries line{fmt::format("{} alpha={:.3f}", label(year, c), *alpha), {}, true};
          for (const auto& p : curve->points()) {
            if (p.fractile <= 0.01) line.points.emplace_back(p.fractile, implied_share(*top1, 0.01, p.fractile, *alpha));
          }
          line.points.emplace_back(0.01, *top1);
          chart.series.push_back(std::move(line));
        }
      }
      curves.push_back(std::move(jc));
      implied_csv << year << ',' << to_string(c) << ',' << num(alpha) << ',' << source << ',' << num(top1) << ','
                  << num(top01_spline) << ',' << num(top01_implied) << ',' << csv_escape(error) << '\n';
      ordered_json ji;
      ji["year"] = year;
      ji["concept"] = to_string(c);
      ji["alpha"] = jnum(alpha);
      ji["alpha_source"] = source;
      ji["share_top1"] = jnum(top1);
      ji["share_top01_spline"] = jnum(top01_spline);
      ji["share_top01_implied"] = jnum(top01_implied);
      ji["error"] = error;
      implied.push_back(std::move(ji));
      if (top1 && top01_implied) {
        out << fmt::format("{}: top 1% share {:.4f}, implied top 0.1% {:.4f} (alpha {:.4f})\n", label(year, c), *top1,
                           *top01_implied, *alpha);
      }
    }
  }
  if (m.wants("csv")) {
    w.csv("shares.csv", curve_csv.str());
    w.csv("implied_shares.csv", implied_csv.str());
  }
  if (m.wants("json")) w.json("shares.json", {{"curves", curves}, {"implied", implied}});
  if (m.wants("svg")) w.svg("shares.svg", chart);
  return exit_code(failed, total);
}

int cmd_sampleframe(const RunManifest& m, std::ostream& out, std::ostream& err) {
  const auto series = fill_intercensal(load_demographics(m.population_csv));
  std::vector<int> years;
  if (!m.years.empty()) {
    years = m.years.years();
  } else {
    for (const auto& [year, r] : series.records()) {
      if (r.total_returns) years.push_back(year);
    }
  }
  if (years.empty()) throw ValidationError("no years to evaluate");

  std::optional<JointShareRegression> reg;
  std::string reg_error;
  try {
    reg = fit_joint_share_regression(series, m.cutover);
  } catch (const Error& e) {
    reg_error = e.what();
  }

  OutputWriter w(m);
  std::ostringstream csv;
  csv << "year,A,J,M,J_fitted,n,rule,error\n";
  auto rows = ordered_json::array();
  ChartSeries n_series{m.alt_population ? "A - M" : "potential units", {}, false};
  std::size_t failed = 0;
  for (int year : years) {
    std::optional<double> jfit, n;
    std::string rule, error;
    try {
      if (m.alt_population) {
        rule = "A-M";
        n = alt_units(series, year);
      } else if (year >= m.cutover) {
        rule = "A-J";
        n = potential_units(series, year, m.cutover);
      } else {
        rule = "A-Jhat";
        if (!reg) throw EstimationError("joint-share regression unavailable: " + reg_error);
        n = potential_units(series, year, m.cutover, *reg);
        const auto a = series.get(year, DemographicField::kAdults);
        const auto mm = series.get(year, DemographicField::kMarriedCouples);
        jfit = reg->fitted_joint_returns(*a, *mm);
      }
    } catch (const Error& e) {
      error = e.what();
      ++failed;
      err << fmt::format("{}: {}\n", year, error);
    }
    const auto a = series.get(year, DemographicField::kAdults);
    const auto j = series.get(year, DemographicField::kJointReturns);
    const auto mm = series.get(year, DemographicField::kMarriedCouples);
    csv << year << ',' << num(a) << ',' << num(j) << ',' << num(mm) << ',' << num(jfit) << ',' << num(n) << ','
        << rule << ',' << csv_escape(error) << '\n';
    ordered_json r;
    r["year"] = year;
    r["A"] = jnum(a);
    r["J"] = jnum(j);
    r["M"] = jnum(mm);
    r["J_fitted"] = jnum(jfit);
    r["n"] = jnum(n);
    r["rule"] = rule;
    r["error"] = error;
    rows.push_back(std::move(r));
    n_series.points.emplace_back(year, n.value_or(std::nan("")));
  }

  ordered_json jreg;
  std::ostringstream reg_csv;
  reg_csv << "from_year,observations,intercept,slope,r_squared,warnings\n";
  if (reg) {
    std::string warnings;
    for (const auto& s : reg->warnings) warnings += (warnings.empty() ? "" : "; ") + s;
    reg_csv << m.cutover << ',' << reg->observations << ',' << num(reg->intercept) << ',' << num(reg->slope) << ','
            << num(reg->r_squared) << ',' << csv_escape(warnings) << '\n';
    jreg = {{"from_year", m.cutover},         {"observations", reg->observations}, {"intercept", reg->intercept},
            {"slope", reg->slope},            {"r_squared", reg->r_squared},       {"warnings", reg->warnings}};
    out << fmt::format("joint-share regression from {}: R^2 = {:.4f} over {} years (slope {:.4f})\n", m.cutover,
                       reg->r_squared, reg->observations, reg->slope);
  } else {
    jreg = {{"error", reg_error}};
    err << "joint-share regression failed: " << reg_error << '\n';
  }
  out << fmt::format("{} of {} years computed\n", years.size() - failed, years.size());

  if (m.wants("csv")) {
    w.csv("sampleframe.csv", csv.str());
    w.csv("regression.csv", reg_csv.str());
  }
  if (m.wants("json")) w.json("sampleframe.json", {{"regression", jreg}, {"years", rows}});
  if (m.wants("svg")) {
    w.svg("sampleframe.svg", LineChart{"Potential tax units", "year", "units", false, false, {n_series}});
  }
  return exit_code(failed, years.size());
}

int cmd_simulate(const RunManifest& m, std::ostream& out, std::ostream&) {
  SimConfig cfg = m.sim;
  if (cfg.fractile_grid.empty() && cfg.threshold_grid.empty() && m.sim_method != Method::kTw) {
    for (double f : {1.0, 2.0, 4.0, 8.0}) cfg.threshold_grid.push_back(f * cfg.cutoff);
  }
  const auto report = mc_study(cfg, m.sim_method, m.tw, m.threads);
  OutputWriter w(m);
  if (m.wants("csv")) {
    w.csv("mc_report.csv", mc_report_csv_header() + '\n' + mc_report_csv_row(report) + '\n');
    if (m.dump_replications) w.csv("replications.csv", replications_csv(report));
  }
  if (m.wants("json")) {
    w.json("mc_report.json", {{"report", ordered_json::parse(to_json(report, m.dump_replications))}});
  }
  if (m.wants("svg")) {
    ChartSeries est{"alpha_hat", {}, false}, truth{"true alpha", {}, true};
    for (const auto& r : report.records) {
      est.points.emplace_back(static_cast<double>(r.replication), r.alpha_hat.value_or(std::nan("")));
    }
    truth.points = {{0.0, report.alpha_true}, {static_cast<double>(report.replications - 1), report.alpha_true}};
    w.svg("mc_report.svg", LineChart{"Monte Carlo estimates", "replication", "alpha", false, false, {est, truth}});
  }
  out << fmt::format("{} replications, {} failed: mean alpha {:.5f}, sd {:.5f}", report.replications,
                     report.failures, report.mean_alpha_hat, report.sd_alpha_hat);
  if (report.mean_asymptotic_se && report.ci_coverage_95) {
    out << fmt::format(", mean se {:.5f}, sd/se {:.3f}, coverage {:.3f}", *report.mean_asymptotic_se,
                       report.sd_alpha_hat / *report.mean_asymptotic_se, *report.ci_coverage_95);
  }
  out << '\n';
  return report.failures > 0 ? kExitPartial : kExitOk;
}

}  // namespace

int run_command(const RunManifest& m, std::ostream& out, std::ostream& err) {
  try {
    switch (m.command) {
      case Command::kIngest: return cmd_ingest(m, out, err);
      case Command::kEstimate: return cmd_estimate(m, out, err);
      case Command::kScan: return cmd_scan(m, out, err);
      case Command::kShares: return cmd_shares(m, out, err);
      case Command::kSampleframe: return cmd_sampleframe(m, out, err);
      case Command::kSimulate: return cmd_simulate(m, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitFatal;
}

}  // namespace paretotab::cli
