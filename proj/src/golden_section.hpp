#pragma once

#include <cmath>
#include <cstddef>

namespace speedmeter::detail {

struct ScalarMinimum {
  double x = 0.0;
  double fx = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Bounded golden-section search. The bracket endpoints are scored as well, so a
// minimum sitting on a bound is returned exactly at that bound.
template <typename F>
ScalarMinimum golden_section_minimize(F&& f, double lo, double hi, double xtol,
                                      std::size_t max_iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);

  ScalarMinimum out;
  while (b - a > xtol && out.iterations < max_iters) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++out.iterations;
  }
  out.converged = b - a <= xtol;
  out.x = fc < fd ? c : d;
  out.fx = fc < fd ? fc : fd;

  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo <= out.fx) {
    out.x = lo;
    out.fx = f_lo;
  }
  if (f_hi < out.fx) {
    out.x = hi;
    out.fx = f_hi;
  }
  return out;
}

}  // namespace speedmeter::detail
