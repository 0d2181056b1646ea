#include "paretotab/moments.hpp"

#include <cmath>

#include "paretotab/error.hpp"

namespace paretotab {

namespace {

void check_xi(double xi) {
  if (!(xi > 0.0 && xi < 1.0)) throw DomainError("tail index must lie in (0, 1)");
}

void check_segment(double p, double q) {
  if (!(p > 0.0 && p <= q && q <= 1.0)) {
    throw DomainError("segment needs 0 < p <= q <= 1");
  }
}

// (e^x - 1) / x
double expm1_ratio(double x) {
  if (std::abs(x) < 1e-8) return 1.0 + x / 2.0 + x * x / 6.0;
  return std::expm1(x) / x;
}

}  // namespace

double power_difference_ratio(double p, double q, double a) {
  const double log_ratio = std::log(q / p);
  return std::pow(p, a) * log_ratio * expm1_ratio(a * log_ratio);
}

double mu_segment(double p, double q, double xi) {
  check_xi(xi);
  check_segment(p, q);
  return power_difference_ratio(p, q, 1.0 - xi);
}

double sigma2_segment(double p, double q, double xi) {
  check_xi(xi);
  check_segment(p, q);
  const double one_m = 1.0 - xi;
  // (q^(1-2xi) - p^(1-2xi)) / (1-2xi); log(q/p) at xi = 1/2.
  const double t1 = power_difference_ratio(p, q, 1.0 - 2.0 * xi);
  // p^(1-xi) (q^-xi - p^-xi) / xi
  const double t2 = -std::pow(p, one_m) * power_difference_ratio(p, q, -xi);
  // (2 p^(1-xi) q^(1-xi) - p^(2-2xi) - q^(2-2xi)) / (2-2xi) = -(q^(1-xi) - p^(1-xi))^2 / (2-2xi)
  const double d = one_m * power_difference_ratio(p, q, one_m);
  const double t3 = -d * d / (2.0 * one_m);
  return 2.0 * xi * xi / one_m * (t1 + t2 + t3);
}

double sigma_cross(double pj, double pj1, double pk, double pk1, double xi) {
  check_xi(xi);
  if (!(pj > 0.0 && pj <= pj1 && pj1 <= pk && pk <= pk1 && pk1 <= 1.0)) {
    throw DomainError("sigma_cross needs 0 < pj <= pj1 <= pk <= pk1 <= 1");
  }
  const double first = power_difference_ratio(pj, pj1, 1.0 - xi);
  const double second = -power_difference_ratio(pk, pk1, -xi) + power_difference_ratio(pk, pk1, 1.0 - xi);
  return -xi * xi * first * second;
}

void check_moment_inputs(double alpha, std::span<const double> fractiles) {
  if (!(alpha > 1.0)) throw DomainError("moment system needs alpha > 1");
  if (fractiles.size() < 3) {
    throw EstimationError("need at least three groups (L >= 2) to form a moment condition");
  }
  for (std::size_t k = 0; k < fractiles.size(); ++k) {
    if (!(fractiles[k] > 0.0 && fractiles[k] < 1.0)) {
      throw DomainError("fractiles must lie in (0, 1)");
    }
    if (k > 0 && !(fractiles[k] > fractiles[k - 1])) {
      throw DomainError("fractiles must increase strictly");
    }
  }
}

Eigen::VectorXd moment_ratios(double alpha, std::span<const double> fractiles) {
  check_moment_inputs(alpha, fractiles);
  const double xi = 1.0 / alpha;
  const auto L = static_cast<Eigen::Index>(fractiles.size()) - 1;
  const double mu_last = mu_segment(fractiles[L - 1], fractiles[L], xi);
  Eigen::VectorXd r(L - 1);
  for (Eigen::Index k = 0; k < L - 1; ++k) {
    r(k) = mu_segment(fractiles[k], fractiles[k + 1], xi) / mu_last;
  }
  return r;
}

Eigen::VectorXd moment_ratio_gradient(double alpha, std::span<const double> fractiles) {
  const double h = 1e-6 * std::max(1.0, alpha);
  return (moment_ratios(alpha + h, fractiles) - moment_ratios(alpha - h, fractiles)) / (2.0 * h);
}

MomentSystem build_moment_system(double alpha, std::span<const double> fractiles) {
  check_moment_inputs(alpha, fractiles);
  MomentSystem m;
  const auto L = static_cast<Eigen::Index>(fractiles.size()) - 1;
  m.xi = 1.0 / alpha;
  m.fractiles = Eigen::Map<const Eigen::VectorXd>(fractiles.data(), L + 1);

  m.mu.resize(L);
  for (Eigen::Index k = 0; k < L; ++k) m.mu(k) = mu_segment(fractiles[k], fractiles[k + 1], m.xi);

  m.Sigma.resize(L, L);
  for (Eigen::Index j = 0; j < L; ++j) {
    m.Sigma(j, j) = sigma2_segment(fractiles[j], fractiles[j + 1], m.xi);
    for (Eigen::Index k = j + 1; k < L; ++k) {
      m.Sigma(j, k) = sigma_cross(fractiles[j], fractiles[j + 1], fractiles[k], fractiles[k + 1], m.xi);
      m.Sigma(k, j) = m.Sigma(j, k);
    }
  }

  const double mu_last = m.mu(L - 1);
  m.r = m.mu.head(L - 1) / mu_last;

  m.H.resize(L - 1, L);
  m.H.leftCols(L - 1) = Eigen::MatrixXd::Identity(L - 1, L - 1);
  m.H.col(L - 1) = -m.r;
  m.H /= mu_last;

  m.Omega = m.H * m.Sigma * m.H.transpose();
  // Symmetrize away rounding so the Cholesky sees an exactly symmetric matrix.
  m.Omega = 0.5 * (m.Omega + m.Omega.transpose()).eval();
  return m;
}

std::vector<double> top_fractiles(const CumulativeView& cv, int L, double n) {
  if (L < 2) throw EstimationError("need L >= 2");
  if (static_cast<std::size_t>(L) + 1 > cv.size()) {
    throw EstimationError("tabulation has " + std::to_string(cv.size()) + " groups; " +
                          std::to_string(L + 1) + " are needed");
  }
  if (!(n > 0.0)) throw DomainError("population must be positive");
  std::vector<double> p(static_cast<std::size_t>(L) + 1);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = static_cast<double>(cv.n[k]) / n;
  return p;
}

EmpiricalMoments empirical_ratios(const CumulativeView& cv, int L, double n) {
  if (L < 2) throw EstimationError("need L >= 2");
  if (static_cast<std::size_t>(L) + 1 > cv.size()) {
    throw EstimationError("tabulation has " + std::to_string(cv.size()) + " groups; " +
                          std::to_string(L + 1) + " are needed");
  }
  const auto last = static_cast<double>(cv.group_total(static_cast<std::size_t>(L)));
  if (!(last > 0.0)) {
    throw EstimationError("income of group " + std::to_string(L + 1) + " is not positive");
  }
  EmpiricalMoments em;
  em.L = L;
  em.n = n;
  em.s.resize(L - 1);
  for (int j = 0; j < L - 1; ++j) {
    em.s(j) = static_cast<double>(cv.group_total(static_cast<std::size_t>(j) + 1)) / last;
  }
  return em;
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& m, std::vector<std::string>* warnings) {
  const auto dim = m.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.solve(identity);

  const double jitter = 1e-12 * m.trace() / static_cast<double>(dim);
  Eigen::MatrixXd jittered = m;
  jittered.diagonal().array() += jitter;
  llt.compute(jittered);
  if (llt.info() != Eigen::Success) {
    throw EstimationError("weighting matrix is not positive definite, even after jitter");
  }
  if (warnings) warnings->push_back("Omega needed diagonal jitter to factorize");
  return llt.solve(identity);
}

}  // namespace paretotab
