#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "paretotab/moments.hpp"
#include "paretotab/pareto.hpp"
#include "paretotab/tabulation.hpp"

namespace paretotab {

enum class Method { kTw, kMl, kFp, kAp };

std::string_view to_string(Method m);
// "tw", "ml", "fp", "ap" (case-insensitive).
Method method_from_string(std::string_view s);

// Settings of the minimum-distance (TW) estimator. The search interval is the
// compact parameter set; a minimizer on its edge is reported as an error.
struct TwConfig {
  double top_fraction = 0.01;
  double alpha_init = 2.0;
  double alpha_lo = 1.05;
  double alpha_hi = 20.0;
  double iteration_tol = 1e-6;
  int max_iterations = 50;
  // Width of the final bracket around the minimizer.
  double objective_tol = 1e-10;

  void validate() const;
};

struct EstimateResult {
  double alpha_hat = 0.0;
  std::optional<double> se;
  Method method = Method::kTw;
  int L_used = 0;
  int iterations = 0;
  std::optional<double> objective_value;
  std::vector<std::string> warnings;

  bool operator==(const EstimateResult&) const = default;
};

// Largest L such that groups 1..L+1 all lie within the top `fraction` of the
// population: n_{L+1} / n <= fraction. Throws when L would be below 2.
int select_top_groups(const CumulativeView& cv, double n, double fraction = 0.01);

// Iterated efficient minimum-distance estimate from fractiles p_1..p_{L+1}
// and observed ratios s (length L-1). Starts from W = Omega(alpha_init)^-1
// and re-weights with Omega(alpha_hat)^-1 until alpha_hat settles.
EstimateResult tw_estimate_moments(std::span<const double> fractiles, const Eigen::VectorXd& s,
                                   double n, const TwConfig& cfg = {});

// TW on the top L+1 groups of `cv`.
EstimateResult tw_estimate_groups(const CumulativeView& cv, double n, int L,
                                  const TwConfig& cfg = {});

// TW on a cleaned tabulation; L from select_top_groups with cfg.top_fraction.
EstimateResult tw_estimate(const Tabulation& t, double n, const TwConfig& cfg = {});

// sqrt((R' Omega^-1 R)^-1 / n) with R the derivative of r at alpha_hat.
double asymptotic_se(double alpha_hat, std::span<const double> fractiles, double n,
                     std::vector<std::string>* warnings = nullptr);

// Asymptotic variance of sqrt(n)(alpha_hat - alpha) for weighting matrix W:
// (R'WR)^-1 R'W Omega W R (R'WR)^-1.
double sandwich_variance(const Eigen::VectorXd& R, const Eigen::MatrixXd& W,
                         const Eigen::MatrixXd& Omega);
// The same with W = Omega^-1: (R' Omega^-1 R)^-1.
double efficient_variance(const Eigen::VectorXd& R, const Eigen::MatrixXd& Omega);

struct MlConfig {
  double alpha_lo = 0.05;
  double alpha_hi = 50.0;
  double x_tol = 1e-12;
};

// Normalized grouped log likelihood
//   l(alpha) = sum_k q_k log((t_k/t_L)^-alpha - (t_{k-1}/t_L)^-alpha),
// k = 1..L, t_0 = infinity, q_k = m_k / (m_1 + ... + m_L).
double grouped_log_likelihood(std::span<const double> thresholds,
                              std::span<const double> counts, int L, double alpha);

// Grouped maximum likelihood from thresholds t_1 > ... > t_K and counts. SE
// from the observed information of the unnormalized likelihood.
EstimateResult ml_grouped(std::span<const double> thresholds, std::span<const double> counts,
                          int L, const MlConfig& cfg = {});

// ML on the top L groups of a tabulation whose thresholds measure its own
// concept.
EstimateResult ml_estimate(const Tabulation& t, int L, const MlConfig& cfg = {});

inline constexpr double kFpBracketFraction = 0.005;

// Two-threshold estimate log(n_{k} / n_{k-1}) / log(t_{k-1} / t_k), where t_k is
// the highest threshold whose tail fraction reaches `bracket` and t_{k-1} the
// next higher one.
EstimateResult fp_estimate(const CumulativeView& cv, double n, double bracket = kFpBracketFraction);

// (1 - log(S(q)/S(p)) / log(q/p))^-1 with shares read off the curve by
// log-log spline interpolation.
EstimateResult ap_estimate(const ShareCurve& curve, double p = 0.001, double q = 0.01);

struct ScanPoint {
  int L = 0;
  std::optional<double> threshold;  // lower threshold of group L+1
  double fractile = 0.0;            // n_{L+1} / n
  std::optional<double> alpha_hat;
  std::optional<double> se;
  std::string error;                // set when this L failed

  bool operator==(const ScanPoint&) const = default;
};

// TW for every L from 2 to K-1; failures are recorded, not thrown.
std::vector<ScanPoint> tail_scan(const Tabulation& t, double n, const TwConfig& cfg = {});

}  // namespace paretotab
