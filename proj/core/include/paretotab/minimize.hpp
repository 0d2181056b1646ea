#pragma once

#include <functional>

namespace paretotab {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

// Minimizes a smooth scalar function on [lo, hi]. Golden-section search
// narrows the interval to `bracket_width`; if the derivative changes sign
// across that bracket, bisection on its sign refines the minimizer until the
// bracket is narrower than `x_tol`. Otherwise golden-section continues down
// to `x_tol`.
ScalarMinimum golden_bisect_minimize(const std::function<double(double)>& f,
                                     const std::function<double(double)>& df, double lo,
                                     double hi, double x_tol, double bracket_width = 1e-3);

}  // namespace paretotab
