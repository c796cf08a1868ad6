#include "rof1d/quadrature.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace rof1d {

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw std::invalid_argument("GaussLegendre: n >= 1");
  x.resize(n);
  w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration from the Chebyshev guess.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

const GaussLegendre& gl_rule(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
  return it->second;
}

static double bump_raw(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

double bump1d_mass() {
  static const double mass = gl_integrate(gl_rule(96), -1.0, 1.0, bump_raw);
  return mass;
}

double bump1d(double s) { return bump_raw(s) / bump1d_mass(); }

double shell_bump_raw(double r) { return bump_raw(4.0 * r - 3.0); }

// Surface area of the unit sphere in R^d for d = 1,2,3.
static double sphere_area(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI;
    case 3: return 4.0 * M_PI;
    default: throw std::invalid_argument("shell_bump: dim must be 1..3");
  }
}

double shell_bump(double r, int dim) {
  static double mass[4] = {0, 0, 0, 0};
  if (mass[dim] == 0.0) {
    const int d = dim;
    mass[dim] = sphere_area(d) * gl_integrate(gl_rule(96), 0.5, 1.0, [d](double rr) {
                  return shell_bump_raw(rr) * std::pow(rr, d - 1);
                });
  }
  return shell_bump_raw(r) / mass[dim];
}

}  // namespace rof1d
