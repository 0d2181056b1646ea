#pragma once

// Moment conditions of the minimum-distance tail estimator for tabulated
// partial sums.
//
// With tail index xi = 1/alpha and top fractiles p_1 < ... < p_{L+1}, the
// expected income of the units ranked between fractiles p and q is
// proportional to mu(p, q). Ratios of consecutive group incomes to the income
// of the last group used, r_k = mu_k / mu_L, depend on alpha only, and the
// scaled sampling error of the observed ratios has covariance
// Omega = H Sigma H^T.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paretotab/tabulation.hpp"

namespace paretotab {

// (q^a - p^a) / a for 0 < p <= q, evaluated without cancellation; the a -> 0
// limit log(q/p) is used when |a log(q/p)| < 1e-8.
double power_difference_ratio(double p, double q, double a);

// mu(p, q) = (q^(1-xi) - p^(1-xi)) / (1 - xi).
double mu_segment(double p, double q, double xi);

// Asymptotic variance of the scaled income between fractiles p and q.
double sigma2_segment(double p, double q, double xi);

// Asymptotic covariance between the segments [pj, pj1] and [pk, pk1],
// which must satisfy pj <= pj1 <= pk <= pk1.
double sigma_cross(double pj, double pj1, double pk, double pk1, double xi);

struct MomentSystem {
  Eigen::VectorXd fractiles;  // p_1 .. p_{L+1}
  double xi = 0.0;
  Eigen::VectorXd mu;         // length L
  Eigen::VectorXd r;          // length L-1
  Eigen::MatrixXd Sigma;      // L x L
  Eigen::MatrixXd H;          // (L-1) x L
  Eigen::MatrixXd Omega;      // (L-1) x (L-1)

  int L() const { return static_cast<int>(mu.size()); }
};

// Validates alpha > 1 and strictly increasing fractiles in (0, 1) with at
// least three entries (L >= 2).
void check_moment_inputs(double alpha, std::span<const double> fractiles);

MomentSystem build_moment_system(double alpha, std::span<const double> fractiles);

// Only r(alpha); the objective evaluates this many times per stage.
Eigen::VectorXd moment_ratios(double alpha, std::span<const double> fractiles);

// Central-difference derivative of r(alpha), step 1e-6 * max(1, alpha).
Eigen::VectorXd moment_ratio_gradient(double alpha, std::span<const double> fractiles);

// Observed counterpart of r: s_j = income of group j+1 / income of group L+1,
// for j = 1..L-1. Group 1 never enters.
struct EmpiricalMoments {
  Eigen::VectorXd s;
  double n = 0.0;
  int L = 0;
};

// Uses groups 1..L+1 of `cv` (1-based). `n` is carried along for callers.
EmpiricalMoments empirical_ratios(const CumulativeView& cv, int L, double n = 0.0);

// Top fractiles n_k / n for k = 1..L+1.
std::vector<double> top_fractiles(const CumulativeView& cv, int L, double n);

// Inverse of a symmetric positive definite matrix by Cholesky. On failure one
// retry with diagonal jitter 1e-12 * trace / dim, noted in `warnings`; a
// second failure throws EstimationError.
Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& m, std::vector<std::string>* warnings = nullptr);

}  // namespace paretotab
