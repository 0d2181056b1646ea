#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "paretotab/tabulation.hpp"

namespace paretotab {

// Pareto upper tail beyond `cutoff`: P(Y > y | Y > cutoff) = (y / cutoff)^-alpha.
struct ParetoTail {
  double alpha;
  double cutoff;

  ParetoTail(double alpha, double cutoff);
};

// (y / cutoff)^-alpha for y >= cutoff; DomainError below the cutoff.
double tail_probability(const ParetoTail& tail, double y);

// Share of total income held by the top fraction p under an exact Pareto law:
// p^(1 - 1/alpha). Requires alpha > 1 and p in (0, 1].
double top_share(double alpha, double p);

// Top-p share implied by the top-q share and exponent alpha:
// S(p) = (p / q)^(1 - 1/alpha) * S(q), for 0 < p <= q <= 1.
double implied_share(double share_q, double q, double p, double alpha);

struct SharePoint {
  double fractile;
  double share;
  bool operator==(const SharePoint&) const = default;
};

// Top-share curve: fractiles and shares both strictly increasing, shares in
// (0, 1]. The constructor enforces this.
class ShareCurve {
 public:
  explicit ShareCurve(std::vector<SharePoint> points);

  const std::vector<SharePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double min_fractile() const { return points_.front().fractile; }
  double max_fractile() const { return points_.back().fractile; }

 private:
  std::vector<SharePoint> points_;
};

// Natural cubic spline through (x_i, y_i), x strictly increasing. Evaluation
// outside [x_0, x_n] throws DomainError.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;

 private:
  std::vector<double> x_, y_, second_;
};

// Interpolates log(share) over log(fractile) with a natural cubic spline.
// Needs at least three points; no extrapolation.
double interpolate_share(const ShareCurve& curve, double p);

// Points (n_k / n, S_k / positive total) at every group boundary, where the
// denominator is the income of all groups with a threshold (the bottom
// deficit row is left out).
ShareCurve share_curve_from_tabulation(const Tabulation& t, double n);

// fractile,share rows.
void write_share_curve_csv(std::ostream& out, const ShareCurve& curve);

}  // namespace paretotab
