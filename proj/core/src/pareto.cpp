#include "paretotab/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "paretotab/error.hpp"
#include "text_util.hpp"

namespace paretotab {

ParetoTail::ParetoTail(double a, double c) : alpha(a), cutoff(c) {
  if (!(alpha > 0.0)) throw DomainError("Pareto exponent must be positive");
  if (!(cutoff > 0.0)) throw DomainError("tail cutoff must be positive");
}

double tail_probability(const ParetoTail& tail, double y) {
  if (!(y >= tail.cutoff)) throw DomainError("y is below the tail cutoff");
  return std::pow(y / tail.cutoff, -tail.alpha);
}

double top_share(double alpha, double p) {
  if (!(alpha > 1.0)) throw DomainError("top shares need alpha > 1 (the mean diverges otherwise)");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("fractile must lie in (0, 1]");
  return std::pow(p, 1.0 - 1.0 / alpha);
}

double implied_share(double share_q, double q, double p, double alpha) {
  if (!(alpha > 1.0)) throw DomainError("implied shares need alpha > 1");
  if (!(p > 0.0 && q <= 1.0)) throw DomainError("fractiles must lie in (0, 1]");
  if (p > q) throw DomainError("implied_share needs p <= q");
  if (p == q) return share_q;
  return std::pow(p / q, 1.0 - 1.0 / alpha) * share_q;
}

ShareCurve::ShareCurve(std::vector<SharePoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("share curve has no points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& pt = points_[i];
    if (!(pt.fractile > 0.0 && pt.fractile <= 1.0)) {
      throw ValidationError("share curve fractile outside (0, 1]");
    }
    if (!(pt.share > 0.0 && pt.share <= 1.0)) {
      throw ValidationError("share curve share outside (0, 1]");
    }
    if (i > 0 && !(pt.fractile > points_[i - 1].fractile)) {
      throw ValidationError("share curve fractiles must increase strictly");
    }
    if (i > 0 && !(pt.share > points_[i - 1].share)) {
      throw ValidationError("share curve shares must increase strictly");
    }
  }
}

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), second_(x_.size(), 0.0) {
  const std::size_t n = x_.size();
  if (n != y_.size()) throw DomainError("spline knots and values differ in length");
  if (n < 3) throw DomainError("spline needs at least three knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw DomainError("spline knots must increase strictly");
  }
  // Thomas algorithm for the interior second derivatives; the end values stay
  // zero (natural boundary).
  std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double lower = x_[i] - x_[i - 1];
    const double m = lower / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    second_[i] = (rhs[i] - upper[i] * second_[i + 1]) / diag[i];
  }
}

double NaturalCubicSpline::operator()(double x) const {
  if (!(x >= x_.front() && x <= x_.back())) throw DomainError("spline evaluation outside knot range");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i + 1 >= x_.size()) i = x_.size() - 2;
  if (x == x_[i]) return y_[i];
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
}

double interpolate_share(const ShareCurve& curve, double p) {
  if (curve.size() < 3) throw DomainError("share interpolation needs at least three points");
  if (!(p >= curve.min_fractile() && p <= curve.max_fractile())) {
    throw DomainError("fractile " + detail::format_general(p, 6) + " outside the observed range [" +
                      detail::format_general(curve.min_fractile(), 6) + ", " +
                      detail::format_general(curve.max_fractile(), 6) + "]");
  }
  for (const auto& pt : curve.points()) {
    if (pt.fractile == p) return pt.share;
  }
  std::vector<double> lx, ly;
  lx.reserve(curve.size());
  ly.reserve(curve.size());
  for (const auto& pt : curve.points()) {
    lx.push_back(std::log(pt.fractile));
    ly.push_back(std::log(pt.share));
  }
  const NaturalCubicSpline spline(std::move(lx), std::move(ly));
  return std::exp(spline(std::log(p)));
}

ShareCurve share_curve_from_tabulation(const Tabulation& t, double n) {
  const auto cv = cumulate(t, true);
  if (cv.size() == 0) throw ValidationError("tabulation has no positive-income groups");
  if (!(n >= static_cast<double>(cv.n.back()))) {
    throw ValidationError("population " + detail::format_general(n, 10) +
                          " is smaller than the number of returns " + std::to_string(cv.n.back()));
  }
  std::int64_t positive_total = 0;
  for (const auto& g : t.threshold_groups()) positive_total += g.total;
  if (positive_total <= 0) throw ValidationError("total positive income is not positive");
  std::vector<SharePoint> points;
  points.reserve(cv.size());
  for (std::size_t k = 0; k < cv.size(); ++k) {
    points.push_back({static_cast<double>(cv.n[k]) / n,
                      static_cast<double>(cv.S[k]) / static_cast<double>(positive_total)});
  }
  return ShareCurve(std::move(points));
}

void write_share_curve_csv(std::ostream& out, const ShareCurve& curve) {
  out << "fractile,share\n";
  for (const auto& pt : curve.points()) {
    out << detail::format_double(pt.fractile) << ',' << detail::format_double(pt.share) << '\n';
  }
}

}  // namespace paretotab
