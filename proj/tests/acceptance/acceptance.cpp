// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: paretotab_acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "paretotab/estimators.hpp"
#include "paretotab/moments.hpp"
#include "paretotab/pareto.hpp"
#include "paretotab/sampleframe.hpp"
#include "paretotab/simulate.hpp"
#include "paretotab/tabulation.hpp"

namespace fs = std::filesystem;
using namespace paretotab;

namespace {

fs::path data(const char* name) { return fs::path(PARETOTAB_DATA_DIR) / name; }

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> geometric_fractiles(int L, double p1 = 0.001, double ratio = 2.0) {
  std::vector<double> p{p1};
  for (int k = 0; k < L; ++k) p.push_back(p.back() * ratio);
  return p;
}

Tabulation agi2019() { return parse_tabulation(data("2019_agi.csv")); }

Tabulation capital2019() { return derive_capital(agi2019(), parse_tabulation(data("2019_wages.csv"))).capital; }

double population_2019(bool alt) {
  const auto s = fill_intercensal(load_demographics(data("demographics.csv")));
  return alt ? alt_units(s, 2019) : potential_units(s, 2019);
}

Outcome exact_moment_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_err = 0.0, worst_obj = 0.0;
  for (double a : {1.2, 1.5, 2.0, 3.0}) {
    for (int L = 2; L <= 8; ++L) {
      const auto p = geometric_fractiles(L);
      const auto est = tw_estimate_moments(p, moment_ratios(a, p), 1e8);
      worst_err = std::max(worst_err, std::abs(est.alpha_hat - a));
      worst_obj = std::max(worst_obj, est.objective_value.value_or(INFINITY));
    }
  }
  const double secs = seconds_since(t0);
  return {worst_err < 1e-6 && worst_obj < 1e-16 && secs < 1.0,
          "max |alpha_hat - alpha| " + fmt(worst_err, 3) + ", max objective " + fmt(worst_obj, 3) + ", " +
              fmt(secs, 3) + " s"};
}

struct Band {
  double bias, sd_over_se, coverage;
};

Band mc_summary(const McReport& r) {
  return {std::abs(r.bias()), r.sd_alpha_hat / r.mean_asymptotic_se.value_or(NAN), r.ci_coverage_95.value_or(NAN)};
}

bool in_bands(const Band& b) {
  return b.bias < 0.01 && b.sd_over_se >= 0.85 && b.sd_over_se <= 1.15 && b.coverage >= 0.90 && b.coverage <= 0.98;
}

std::string describe(const char* name, const McReport& r, const Band& b) {
  return std::string(name) + " mean " + fmt(r.mean_alpha_hat, 5) + " sd/se " + fmt(b.sd_over_se, 4) + " coverage " +
         fmt(b.coverage, 3) + " failures " + std::to_string(r.failures);
}

Outcome monte_carlo_calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig tw_cfg;
  tw_cfg.alpha_true = 1.5;
  tw_cfg.n_draws = 1'000'000;
  tw_cfg.replications = 200;
  tw_cfg.seed = 1;
  const auto tw = mc_study(tw_cfg, Method::kTw);

  SimConfig ml_cfg = tw_cfg;
  ml_cfg.alpha_true = 2.5;
  ml_cfg.threshold_grid = {8.0, 4.0, 2.0, 1.0};
  const auto ml = mc_study(ml_cfg, Method::kMl);

  const auto btw = mc_summary(tw), bml = mc_summary(ml);
  return {in_bands(btw) && in_bands(bml),
          describe("TW", tw, btw) + "; " + describe("ML", ml, bml) + "; " + fmt(seconds_since(t0), 3) + " s"};
}

Outcome point_reproduction_2019() {
  const double n = population_2019(false);
  const auto agi = tw_estimate(agi2019(), n);
  const auto cap = tw_estimate(capital2019(), n);
  const auto ml = ml_estimate(agi2019(), agi.L_used + 1);
  const bool ok = cap.alpha_hat >= 1.05 && cap.alpha_hat <= 1.35 && agi.alpha_hat >= 1.35 && agi.alpha_hat <= 1.70 &&
                  std::abs(ml.alpha_hat - agi.alpha_hat) < 0.05;
  return {ok, "capital TW " + fmt(cap.alpha_hat) + ", AGI TW " + fmt(agi.alpha_hat) + ", AGI ML " + fmt(ml.alpha_hat) +
                  " (L " + std::to_string(ml.L_used) + ")"};
}

Outcome se_magnitude() {
  const double n = population_2019(false);
  const auto agi = tw_estimate(agi2019(), n);
  const double se = agi.se.value_or(NAN);
  return {se >= 2e-4 && se <= 5e-3, "n " + fmt(n, 6) + ", L " + std::to_string(agi.L_used) + ", se " + fmt(se)};
}

Outcome model_closed_exactness() {
  double worst = 0.0;
  const double n = std::ldexp(1.0, 50);
  for (double a : {1.2, 2.0, 3.0}) {
    // Tail counts n 2^-k above thresholds 2^(k/a).
    CumulativeView cv;
    std::int64_t s = 0;
    for (int k = 11; k >= 0; --k) {
      cv.n.push_back(static_cast<std::int64_t>(std::ldexp(1.0, 50 - k)));
      cv.S.push_back(++s);  // unused by FP
      cv.thresholds.push_back(std::pow(2.0, k / a));
    }
    worst = std::max(worst, std::abs(fp_estimate(cv, n).alpha_hat - a) / a);

    std::vector<SharePoint> pts;
    for (double p : {0.0002, 0.0005, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05}) pts.push_back({p, top_share(a, p)});
    worst = std::max(worst, std::abs(ap_estimate(ShareCurve(pts)).alpha_hat - a) / a);
  }
  return {worst <= 1e-10, "max relative error " + fmt(worst, 3)};
}

Outcome scale_invariance() {
  const double n = population_2019(false);
  const auto base = agi2019();
  auto scaled_totals = base;
  for (auto& g : scaled_totals.groups) g.total *= 1000;
  const double tw0 = tw_estimate(base, n).alpha_hat, tw1 = tw_estimate(scaled_totals, n).alpha_hat;

  auto scaled_thresholds = base;
  for (auto& g : scaled_thresholds.groups) {
    if (g.lower_threshold) *g.lower_threshold *= 1000.0;
  }
  const double ml0 = ml_estimate(base, 6).alpha_hat, ml1 = ml_estimate(scaled_thresholds, 6).alpha_hat;
  const double fp0 = fp_estimate(cumulate(base), n).alpha_hat, fp1 = fp_estimate(cumulate(scaled_thresholds), n).alpha_hat;
  const bool ok = tw0 == tw1 && std::abs(ml0 - ml1) <= 1e-10 && std::abs(fp0 - fp1) <= 1e-10;
  return {ok, std::string("TW ") + (tw0 == tw1 ? "bit-identical" : "differs by " + fmt(tw1 - tw0, 3)) +
                  ", |dML| " + fmt(std::abs(ml0 - ml1), 3) + ", |dFP| " + fmt(std::abs(fp0 - fp1), 3)};
}

Outcome omega_positive_definite() {
  double worst = INFINITY;
  int cases = 0;
  for (double a = 1.1; a <= 5.0 + 1e-9; a += 0.1) {
    for (int L = 2; L <= 10; ++L) {
      for (double ratio : {1.5, 2.0, 3.0}) {
        const auto p = geometric_fractiles(L, 0.0005, ratio);
        if (p.back() >= 1.0) continue;
        const auto ms = build_moment_system(a, p);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ms.Omega, Eigen::EigenvaluesOnly);
        worst = std::min(worst, es.eigenvalues().minCoeff());
        ++cases;
      }
    }
  }
  return {worst > 0.0, std::to_string(cases) + " systems, smallest eigenvalue " + fmt(worst, 3)};
}

Outcome efficiency_inequality() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z;
  double worst = INFINITY;
  int draws = 0;
  for (double a : {1.2, 1.5, 2.0, 3.0}) {
    const auto p = geometric_fractiles(5);
    const auto ms = build_moment_system(a, p);
    const Eigen::VectorXd R = moment_ratio_gradient(a, p);
    const double best = efficient_variance(R, ms.Omega);
    const auto dim = ms.Omega.rows();
    for (int t = 0; t < 100; ++t) {
      Eigen::MatrixXd B(dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) B(i, j) = z(rng);
      }
      const Eigen::MatrixXd W = B * B.transpose() + 1e-6 * Eigen::MatrixXd::Identity(dim, dim);
      worst = std::min(worst, sandwich_variance(R, W, ms.Omega) - best);
      ++draws;
    }
  }
  return {worst >= -1e-10, std::to_string(draws) + " random W, min V(W) - V(Omega^-1) " + fmt(worst, 3)};
}

Outcome sample_frame() {
  const auto s = fill_intercensal(load_demographics(data("demographics.csv")));
  const auto fit = fit_joint_share_regression(s);
  const double n_aj = population_2019(false), n_am = population_2019(true);
  const double a1 = tw_estimate(agi2019(), n_aj).alpha_hat, a2 = tw_estimate(agi2019(), n_am).alpha_hat;
  const bool ok = std::abs(fit.r_squared - 0.989) <= 0.01 && std::abs(a1 - a2) < 0.02;
  return {ok, "R^2 " + fmt(fit.r_squared, 5) + " over " + std::to_string(fit.observations) + " years; alpha A-J " +
                  fmt(a1) + ", A-M " + fmt(a2)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

Outcome cli_determinism(const fs::path& work) {
#ifndef PARETOTAB_CLI
  return {false, "CLI not built"};
#else
  const std::string exe = PARETOTAB_CLI;
  const std::string agi = quote(data("2019_agi.csv").string()), wages = quote(data("2019_wages.csv").string());
  const std::vector<std::pair<std::string, std::string>> commands{
      {"ingest", "-i " + agi + " -i " + wages},
      {"estimate", "-i " + agi + " -i " + wages + " --population 192300000 --method all"},
      {"scan", "-i " + agi + " -i " + wages + " --population 192300000"},
      {"shares", "-i " + agi + " --population 192300000"},
      {"sampleframe", "--population-csv " + quote(data("demographics.csv").string())},
      {"simulate", "--alpha 1.5 --n-draws 100000 --replications 20 --seed 7 --dump-replications"},
  };
  std::size_t files = 0;
  for (const auto& [cmd, args] : commands) {
    std::vector<fs::path> outs;
    for (int k = 0; k < 2; ++k) {
      outs.push_back(work / "determinism" / (cmd + "_" + std::to_string(k)));
      fs::remove_all(outs.back());
      const auto line = quote(exe) + " " + cmd + " " + args + " --format csv,json,svg --out " +
                        quote(outs.back().string()) + " >/dev/null 2>&1";
      const int status = std::system(line.c_str());
      if (status == -1 || !fs::exists(outs.back())) return {false, cmd + " did not run"};
    }
    for (const auto& entry : fs::directory_iterator(outs[0])) {
      const auto other = outs[1] / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        return {false, cmd + ": " + entry.path().filename().string() + " differs"};
      }
      ++files;
    }
    for (const auto& entry : fs::directory_iterator(outs[1])) {
      if (!fs::exists(outs[0] / entry.path().filename())) return {false, cmd + ": extra file in second run"};
    }
  }
  return {files > 0, std::to_string(commands.size()) + " commands, " + std::to_string(files) + " files identical"};
#endif
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "paretotab_acceptance";
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact-moment recovery", exact_moment_recovery},
      {"Monte Carlo calibration", monte_carlo_calibration},
      {"2019 point reproduction", point_reproduction_2019},
      {"standard error magnitude", se_magnitude},
      {"FP/AP exact on model-closed data", model_closed_exactness},
      {"scale invariance", scale_invariance},
      {"Omega positive definite", omega_positive_definite},
      {"efficiency inequality", efficiency_inequality},
      {"sample frame", sample_frame},
      {"CLI determinism", [&] { return cli_determinism(work); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
