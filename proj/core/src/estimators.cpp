#include "paretotab/estimators.hpp"

#include <cmath>
#include <limits>

#include "paretotab/error.hpp"
#include "paretotab/minimize.hpp"
#include "text_util.hpp"

namespace paretotab {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kTw: return "TW";
    case Method::kMl: return "ML";
    case Method::kFp: return "FP";
    case Method::kAp: return "AP";
  }
  return "TW";
}

Method method_from_string(std::string_view s) {
  const auto v = detail::to_lower(detail::trim(s));
  if (v == "tw") return Method::kTw;
  if (v == "ml") return Method::kMl;
  if (v == "fp") return Method::kFp;
  if (v == "ap") return Method::kAp;
  throw ValidationError("unknown method '" + std::string(s) + "'");
}

void TwConfig::validate() const {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw DomainError("top_fraction must lie in (0, 1]");
  if (!(alpha_lo > 1.0 && alpha_lo < alpha_hi)) throw DomainError("need 1 < alpha_lo < alpha_hi");
  if (!(alpha_init > 1.0)) throw DomainError("alpha_init must exceed 1");
  if (!(iteration_tol > 0.0 && objective_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
}

int select_top_groups(const CumulativeView& cv, double n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("fraction must lie in (0, 1]");
  if (cv.size() == 0) throw EstimationError("tabulation has no groups");
  if (!(n >= static_cast<double>(cv.n.back()))) {
    throw EstimationError("population " + detail::format_general(n, 10) +
                          " is smaller than the number of returns " + std::to_string(cv.n.back()));
  }
  // groups_within: how many leading groups have n_k / n <= fraction.
  std::size_t groups_within = 0;
  while (groups_within < cv.size() &&
         static_cast<double>(cv.n[groups_within]) / n <= fraction) {
    ++groups_within;
  }
  const int L = static_cast<int>(groups_within) - 1;
  if (L < 2) {
    throw EstimationError("only " + std::to_string(groups_within) +
                          " group(s) lie within the top " + detail::format_general(fraction, 6) +
                          "; at least 3 are needed, use a larger fraction");
  }
  return L;
}

namespace {

double boundary_margin(double lo, double hi) { return 1e-6 * (hi - lo); }

}  // namespace

EstimateResult tw_estimate_moments(std::span<const double> fractiles, const Eigen::VectorXd& s,
                                   double n, const TwConfig& cfg) {
  cfg.validate();
  check_moment_inputs(cfg.alpha_init, fractiles);
  const auto L = static_cast<int>(fractiles.size()) - 1;
  if (s.size() != L - 1) throw EstimationError("ratio vector length does not match L - 1");
  if (!(n > 0.0)) throw DomainError("population must be positive");

  EstimateResult result;
  result.method = Method::kTw;
  result.L_used = L;

  Eigen::MatrixXd W = invert_spd(build_moment_system(cfg.alpha_init, fractiles).Omega, &result.warnings);
  double previous = cfg.alpha_init;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    auto objective = [&](double a) {
      const Eigen::VectorXd d = moment_ratios(a, fractiles) - s;
      return d.dot(W * d);
    };
    auto derivative = [&](double a) {
      const Eigen::VectorXd d = moment_ratios(a, fractiles) - s;
      return 2.0 * d.dot(W * moment_ratio_gradient(a, fractiles));
    };
    const auto best =
        golden_bisect_minimize(objective, derivative, cfg.alpha_lo, cfg.alpha_hi, cfg.objective_tol);
    const double margin = boundary_margin(cfg.alpha_lo, cfg.alpha_hi);
    if (best.x - cfg.alpha_lo < margin || cfg.alpha_hi - best.x < margin) {
      throw EstimationError("minimizer at the edge of [" + detail::format_general(cfg.alpha_lo, 6) +
                            ", " + detail::format_general(cfg.alpha_hi, 6) +
                            "]: the exponent may be at or below 1, or the Pareto model misfits");
    }
    result.alpha_hat = best.x;
    result.objective_value = best.value;
    result.iterations = iter;
    if (std::abs(best.x - previous) < cfg.iteration_tol) {
      result.se = asymptotic_se(result.alpha_hat, fractiles, n, &result.warnings);
      return result;
    }
    previous = best.x;
    W = invert_spd(build_moment_system(best.x, fractiles).Omega, &result.warnings);
  }
  throw EstimationError("weighting iteration did not converge in " +
                        std::to_string(cfg.max_iterations) + " steps");
}

EstimateResult tw_estimate_groups(const CumulativeView& cv, double n, int L, const TwConfig& cfg) {
  const auto p = top_fractiles(cv, L, n);
  const auto em = empirical_ratios(cv, L, n);
  return tw_estimate_moments(p, em.s, n, cfg);
}

EstimateResult tw_estimate(const Tabulation& t, double n, const TwConfig& cfg) {
  cfg.validate();
  const auto cv = cumulate(t, true);
  const int L = select_top_groups(cv, n, cfg.top_fraction);
  return tw_estimate_groups(cv, n, L, cfg);
}

double efficient_variance(const Eigen::VectorXd& R, const Eigen::MatrixXd& Omega) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(Omega);
  if (ldlt.info() != Eigen::Success) throw EstimationError("cannot factorize Omega");
  const double info = R.dot(ldlt.solve(R));
  if (!(info > 0.0) || !std::isfinite(info)) throw EstimationError("R' Omega^-1 R is singular");
  return 1.0 / info;
}

double sandwich_variance(const Eigen::VectorXd& R, const Eigen::MatrixXd& W,
                         const Eigen::MatrixXd& Omega) {
  const Eigen::VectorXd WR = W * R;
  const double bread = R.dot(WR);
  if (!(bread != 0.0)) throw EstimationError("R' W R is singular");
  return WR.dot(Omega * WR) / (bread * bread);
}

double asymptotic_se(double alpha_hat, std::span<const double> fractiles, double n,
                     std::vector<std::string>* warnings) {
  if (!(n > 0.0)) throw DomainError("population must be positive");
  const auto system = build_moment_system(alpha_hat, fractiles);
  const Eigen::VectorXd R = moment_ratio_gradient(alpha_hat, fractiles);
  const Eigen::MatrixXd Winv = invert_spd(system.Omega, warnings);
  const double info = R.dot(Winv * R);
  if (!(info > 0.0) || !std::isfinite(info)) throw EstimationError("R' Omega^-1 R is singular");
  return std::sqrt(1.0 / info / n);
}

namespace {

void check_ml_inputs(std::span<const double> thresholds, std::span<const double> counts, int L) {
  if (L < 2) throw EstimationError("grouped ML needs L >= 2");
  if (thresholds.size() != counts.size()) throw DomainError("thresholds and counts differ in length");
  if (static_cast<std::size_t>(L) > thresholds.size()) {
    throw EstimationError("only " + std::to_string(thresholds.size()) + " groups available, L = " +
                          std::to_string(L));
  }
  for (int k = 0; k < L; ++k) {
    if (!(thresholds[k] > 0.0)) throw DomainError("thresholds must be positive");
    if (k > 0 && !(thresholds[k] < thresholds[k - 1])) {
      throw DomainError("thresholds must decrease strictly");
    }
    if (!(counts[k] > 0.0)) {
      throw EstimationError("group " + std::to_string(k + 1) + " is empty; merge zero-count groups first");
    }
  }
}

// log((t_k/t_L)^-alpha - (t_{k-1}/t_L)^-alpha) and its alpha-derivative.
struct CellTerm {
  double log_prob;
  double dlog_prob;
};

CellTerm cell_term(double upper_ratio_log, double lower_ratio_log, bool top, double alpha) {
  // lower_ratio_log = log(t_k / t_L) >= 0; upper_ratio_log = log(t_{k-1} / t_L).
  if (top) return {-alpha * lower_ratio_log, -lower_ratio_log};
  const double gap = upper_ratio_log - lower_ratio_log;  // log(t_{k-1} / t_k) > 0
  const double tail = std::exp(-alpha * gap);            // (t_k / t_{k-1})^alpha
  const double log_prob = -alpha * lower_ratio_log + std::log1p(-tail);
  const double dlog_prob = -lower_ratio_log + gap * tail / (1.0 - tail);
  return {log_prob, dlog_prob};
}

double ml_derivative(std::span<const double> thresholds, std::span<const double> counts, int L,
                     double alpha) {
  double total = 0.0;
  for (int k = 0; k < L; ++k) total += counts[k];
  const double log_tL = std::log(thresholds[L - 1]);
  double d = 0.0;
  for (int k = 0; k < L; ++k) {
    const double lower = std::log(thresholds[k]) - log_tL;
    const double upper = k == 0 ? 0.0 : std::log(thresholds[k - 1]) - log_tL;
    d += counts[k] / total * cell_term(upper, lower, k == 0, alpha).dlog_prob;
  }
  return d;
}

}  // namespace

double grouped_log_likelihood(std::span<const double> thresholds, std::span<const double> counts,
                              int L, double alpha) {
  check_ml_inputs(thresholds, counts, L);
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  double total = 0.0;
  for (int k = 0; k < L; ++k) total += counts[k];
  const double log_tL = std::log(thresholds[L - 1]);
  double ll = 0.0;
  for (int k = 0; k < L; ++k) {
    const double lower = std::log(thresholds[k]) - log_tL;
    const double upper = k == 0 ? 0.0 : std::log(thresholds[k - 1]) - log_tL;
    ll += counts[k] / total * cell_term(upper, lower, k == 0, alpha).log_prob;
  }
  return ll;
}

EstimateResult ml_grouped(std::span<const double> thresholds, std::span<const double> counts, int L,
                          const MlConfig& cfg) {
  check_ml_inputs(thresholds, counts, L);
  auto neg_ll = [&](double a) { return -grouped_log_likelihood(thresholds, counts, L, a); };
  auto neg_dll = [&](double a) { return -ml_derivative(thresholds, counts, L, a); };
  const auto best = golden_bisect_minimize(neg_ll, neg_dll, cfg.alpha_lo, cfg.alpha_hi, cfg.x_tol);
  if (!std::isfinite(best.value)) throw EstimationError("grouped likelihood is not finite");
  const double margin = boundary_margin(cfg.alpha_lo, cfg.alpha_hi);
  if (best.x - cfg.alpha_lo < margin || cfg.alpha_hi - best.x < margin) {
    throw EstimationError("grouped ML maximizer at the edge of the search interval");
  }

  EstimateResult result;
  result.method = Method::kMl;
  result.alpha_hat = best.x;
  result.L_used = L;
  result.iterations = best.evaluations;
  result.objective_value = -best.value;

  double n_used = 0.0;
  for (int k = 0; k < L; ++k) n_used += counts[k];
  const double h = 1e-5 * best.x;
  const double second = (grouped_log_likelihood(thresholds, counts, L, best.x + h) -
                         2.0 * grouped_log_likelihood(thresholds, counts, L, best.x) +
                         grouped_log_likelihood(thresholds, counts, L, best.x - h)) /
                        (h * h);
  if (second < 0.0 && std::isfinite(second)) {
    result.se = std::sqrt(-1.0 / (n_used * second));
  } else {
    result.warnings.push_back("observed information is not positive; no standard error");
  }
  return result;
}

EstimateResult ml_estimate(const Tabulation& t, int L, const MlConfig& cfg) {
  if (!t.thresholds_measure_concept()) {
    throw EstimationError(std::string("thresholds of this ") + std::string(to_string(t.income_concept)) +
                          " table are " + std::string(to_string(t.ranked_by)) +
                          " thresholds; grouped ML needs thresholds of the concept itself");
  }
  std::vector<double> thresholds, counts;
  for (const auto& g : t.threshold_groups()) {
    thresholds.push_back(*g.lower_threshold);
    counts.push_back(static_cast<double>(g.count));
  }
  return ml_grouped(thresholds, counts, L, cfg);
}

EstimateResult fp_estimate(const CumulativeView& cv, double n, double bracket) {
  if (!(n > 0.0)) throw DomainError("population must be positive");
  std::optional<std::size_t> low;
  for (std::size_t k = 0; k < cv.size(); ++k) {
    if (!cv.thresholds[k]) break;
    if (static_cast<double>(cv.n[k]) / n >= bracket) {
      low = k;
      break;
    }
  }
  if (!low || *low == 0) {
    throw EstimationError("no pair of thresholds brackets the top " +
                          detail::format_general(bracket, 6) + " tail fraction");
  }
  const std::size_t k = *low;
  const double y1 = *cv.thresholds[k];
  const double y2 = *cv.thresholds[k - 1];
  EstimateResult result;
  result.method = Method::kFp;
  result.alpha_hat = std::log(static_cast<double>(cv.n[k]) / static_cast<double>(cv.n[k - 1])) /
                     std::log(y2 / y1);
  result.L_used = 2;
  return result;
}

EstimateResult ap_estimate(const ShareCurve& curve, double p, double q) {
  if (!(p > 0.0 && p < q && q <= 1.0)) throw DomainError("need 0 < p < q <= 1");
  const double sp = interpolate_share(curve, p);
  const double sq = interpolate_share(curve, q);
  const double slope = std::log(sq / sp) / std::log(q / p);
  if (!(slope > 0.0 && slope < 1.0)) {
    throw EstimationError("share ratio implies alpha <= 1 (log-log slope " +
                          detail::format_general(slope, 6) + ")");
  }
  EstimateResult result;
  result.method = Method::kAp;
  result.alpha_hat = 1.0 / (1.0 - slope);
  result.L_used = 2;
  return result;
}

std::vector<ScanPoint> tail_scan(const Tabulation& t, double n, const TwConfig& cfg) {
  cfg.validate();
  const auto cv = cumulate(t, true);
  std::vector<ScanPoint> out;
  for (int L = 2; static_cast<std::size_t>(L) + 1 <= cv.size(); ++L) {
    ScanPoint pt;
    pt.L = L;
    pt.threshold = cv.thresholds[static_cast<std::size_t>(L)];
    pt.fractile = static_cast<double>(cv.n[static_cast<std::size_t>(L)]) / n;
    try {
      const auto est = tw_estimate_groups(cv, n, L, cfg);
      pt.alpha_hat = est.alpha_hat;
      pt.se = est.se;
    } catch (const Error& e) {
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace paretotab
