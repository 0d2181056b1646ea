#include "paretotab/minimize.hpp"

#include <cmath>

#include "paretotab/error.hpp"

namespace paretotab {

ScalarMinimum golden_bisect_minimize(const std::function<double(double)>& f,
                                     const std::function<double(double)>& df, double lo,
                                     double hi, double x_tol, double bracket_width) {
  if (!(lo < hi)) throw DomainError("minimization interval is empty");
  if (!(x_tol > 0.0)) throw DomainError("tolerance must be positive");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  ScalarMinimum out;
  auto eval = [&](double x) {
    ++out.evaluations;
    return f(x);
  };

  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  auto golden_until = [&](double width) {
    while (b - a > width) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = eval(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = eval(d);
      }
    }
  };
  golden_until(std::max(bracket_width, x_tol));

  double ga = df(a), gb = df(b);
  if (ga < 0.0 && gb > 0.0) {
    while (b - a > x_tol) {
      const double m = 0.5 * (a + b);
      const double gm = df(m);
      if (gm == 0.0) {
        a = b = m;
        break;
      }
      (gm < 0.0 ? a : b) = m;
    }
    out.x = 0.5 * (a + b);
    out.value = eval(out.x);
    return out;
  }

  golden_until(x_tol);
  out.x = fc <= fd ? c : d;
  out.value = std::min(fc, fd);
  // The golden points never reach the ends; compare against them so a
  // monotone objective reports its boundary minimizer.
  const double flo = eval(lo), fhi = eval(hi);
  if (flo < out.value) {
    out.x = lo;
    out.value = flo;
  }
  if (fhi < out.value) {
    out.x = hi;
    out.value = fhi;
  }
  return out;
}

}  // namespace paretotab
