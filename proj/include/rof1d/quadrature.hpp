#pragma once

#include <cmath>
#include <vector>

namespace rof1d {

// Gauss-Legendre nodes/weights on [-1,1].
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
  explicit GaussLegendre(int n);
};

// Cached rule, mapped to [lo,hi].
const GaussLegendre& gl_rule(int n);

template <class F>
double gl_integrate(const GaussLegendre& rule, double lo, double hi, F&& f) {
  const double c = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
  double s = 0.0;
  for (std::size_t k = 0; k < rule.x.size(); ++k) s += rule.w[k] * f(m + c * rule.x[k]);
  return c * s;
}

// The standard 1D bump exp(-1/(1-s^2)) on (-1,1), normalized to unit mass.
double bump1d(double s);
double bump1d_mass();  // integral of the un-normalized bump (cached)

// Radial shell bump rho(r) supported on [1/2,1]: the same bump mapped by
// x = 4r - 3, normalized in dimension d so that the integral of rho(|z|)
// over R^d equals 1.
double shell_bump_raw(double r);       // un-normalized
double shell_bump(double r, int dim);  // normalized for dimension dim

}  // namespace rof1d
