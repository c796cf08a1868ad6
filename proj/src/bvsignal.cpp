#include "rof1d/bvsignal.hpp"

#include <algorithm>
#include <cmath>

#include "rof1d/anisotropy.hpp"
#include "rof1d/quadrature.hpp"
#include "rof1d/regularizer.hpp"

namespace rof1d {

Mat GridSignal::sampled() const {
  Mat out = values;
  for (const auto& atom : atoms) {
    // the step sits at the midpoint of `cell`: nodes cell+1 .. N are shifted
    for (int i = atom.cell + 1; i < out.cols(); ++i) out.col(i) += atom.jump;
  }
  return out;
}

GridSignal GridSignal::constant(const Grid& g, const Vec& value) {
  GridSignal w;
  w.grid = g;
  w.values = value.replicate(1, g.nodes());
  return w;
}

GridSignal GridSignal::zero(const Grid& g, int channels) {
  return constant(g, Vec::Zero(channels));
}

DerivativeMeasure derivative(const GridSignal& w) {
  DerivativeMeasure mu;
  mu.grid = w.grid;
  const int N = w.grid.cells;
  mu.ac.resize(w.channels(), N);
  const double inv_dx = 1.0 / w.grid.dx();
  for (int j = 0; j < N; ++j) mu.ac.col(j) = (w.values.col(j + 1) - w.values.col(j)) * inv_dx;
  mu.atoms = w.atoms;
  return mu;
}

ConvexIntegrand integrand(const Regularizer& R) {
  ConvexIntegrand g;
  g.value = [&R](const VecRef& p) { return R.value(p); };
  if (!R.recession_warning()) {
    g.recession = [&R](const VecRef& d) { return R.recession_value(d); };
  }
  return g;
}

ConvexIntegrand norm_integrand(const Anisotropy& phi) {
  ConvexIntegrand g;
  g.value = [&phi](const VecRef& p) { return phi.value(p); };
  g.recession = [&phi](const VecRef& d) { return phi.value(d); };
  return g;
}

namespace {

// overlap of cell j with [lo,hi], as a fraction of dx
double cell_overlap(const Grid& g, int j, const MeasureWindow& win) {
  const double lo = g.a + j * g.dx(), hi = lo + g.dx();
  const double ov = std::min(hi, win.hi) - std::max(lo, win.lo);
  return ov <= 0.0 ? 0.0 : ov / g.dx();
}

bool atom_in_window(const Grid& g, const Atom& a, const MeasureWindow& win) {
  const double x = g.midpoint(a.cell);
  return x >= win.lo && x <= win.hi;
}

template <class CellF, class AtomF>
double accumulate_measure(const DerivativeMeasure& mu, const MeasureWindow& win, CellF&& cf,
                          AtomF&& af) {
  const Grid& g = mu.grid;
  const double dx = g.dx();
  // cells intersecting the window
  int j0 = std::max(0, static_cast<int>(std::floor((win.lo - g.a) / dx)));
  int j1 = std::min(g.cells - 1, static_cast<int>(std::ceil((win.hi - g.a) / dx)));
  double acc = 0.0;
  for (int j = j0; j <= j1; ++j) {
    const double ov = cell_overlap(g, j, win);
    if (ov > 0.0) acc += ov * dx * cf(j);
  }
  for (const auto& a : mu.atoms)
    if (atom_in_window(g, a, win)) acc += af(a);
  return acc;
}

}  // namespace

double variation(const DerivativeMeasure& mu, const MeasureWindow& win) {
  return accumulate_measure(
      mu, win, [&](int j) { return mu.ac.col(j).norm(); },
      [&](const Atom& a) { return a.jump.norm(); });
}

double truncated_variation(const DerivativeMeasure& mu, double k, const MeasureWindow& win) {
  if (k < 0.0) throw std::invalid_argument("truncated_variation: k >= 0");
  return accumulate_measure(
      mu, win, [&](int j) { return std::max(mu.ac.col(j).norm() - k, 0.0); },
      [&](const Atom& a) { return a.jump.norm(); });
}

double measure_value(const ConvexIntegrand& G, const DerivativeMeasure& mu,
                     const MeasureWindow& win) {
  return accumulate_measure(
      mu, win, [&](int j) { return G.value(mu.ac.col(j)); },
      [&](const Atom& a) {
        if (!G.recession)
          throw SolveError("measure_value: integrand has infinite recession on atoms");
        const double m = a.jump.norm();
        return m > 0.0 ? G.recession(a.jump / m) * m : 0.0;
      });
}

double singular_mass(const DerivativeMeasure& mu, const MeasureWindow& win,
                     const ClassificationRule& rule) {
  const double dx = mu.grid.dx();
  const double threshold = rule.kappa * std::pow(dx, rule.theta - 1.0);
  return accumulate_measure(
      mu, win,
      [&](int j) {
        const double d = mu.ac.col(j).norm();
        return d > threshold ? d : 0.0;
      },
      [&](const Atom& a) { return a.jump.norm(); });
}

double sweep_singular_mass(const DerivativeMeasure& mu, const MeasureWindow& win) {
  const double k = 1.0 / std::sqrt(mu.grid.dx());
  return truncated_variation(mu, k, win);
}

GridSignal mollify(const GridSignal& w, double eps, bool* warned) {
  if (warned) *warned = false;
  const Grid& g = w.grid;
  const double dx = g.dx();
  if (eps < 2.0 * dx) {
    if (warned) *warned = true;
    return w;
  }
  const Mat s = w.sampled();
  const int N = g.cells;
  const int n = w.channels();
  const int K = static_cast<int>(std::floor(eps / dx));
  // sampled bump, normalized discretely so constants are reproduced exactly
  std::vector<double> ker(2 * K + 1);
  double mass = 0.0;
  for (int k = -K; k <= K; ++k) {
    ker[k + K] = bump1d(k * dx / eps);
    mass += ker[k + K];
  }
  for (double& v : ker) v /= mass;

  GridSignal out;
  out.grid = g;
  out.values = Mat::Zero(n, N + 1);
  for (int i = 0; i <= N; ++i) {
    for (int k = -K; k <= K; ++k) {
      const int j = i - k;
      if (j < 0 || j > N) continue;  // zero extension
      out.values.col(i) += ker[k + K] * s.col(j);
    }
  }
  return out;
}

bool jensen_check(const ConvexIntegrand& G, const DerivativeMeasure& mu, const Vec& b_cells,
                  const MeasureWindow& win, double slack) {
  const Grid& g = mu.grid;
  if (b_cells.size() != g.cells) throw std::invalid_argument("jensen_check: b per cell");
  if ((b_cells.array() < 0.0).any()) throw std::invalid_argument("jensen_check: b >= 0");
  const double dx = g.dx();
  const int n = static_cast<int>(mu.ac.rows());
  double bl = 0.0;          // int b dL
  Vec bmu = Vec::Zero(n);   // int b dmu
  double bg = 0.0;          // int b dG(mu)
  for (int j = 0; j < g.cells; ++j) {
    const double ov = cell_overlap(g, j, win);
    if (ov <= 0.0) continue;
    const double wgt = ov * dx * b_cells[j];
    bl += wgt;
    bmu += wgt * mu.ac.col(j);
    bg += wgt * G.value(mu.ac.col(j));
  }
  for (const auto& a : mu.atoms) {
    if (!atom_in_window(g, a, win)) continue;
    const double m = a.jump.norm();
    if (m == 0.0) continue;
    if (!G.recession) throw SolveError("jensen_check: infinite recession on atoms");
    bmu += b_cells[a.cell] * a.jump;
    bg += b_cells[a.cell] * G.recession(a.jump / m) * m;
  }
  if (bl <= 0.0) throw std::invalid_argument("jensen_check: int b dL must be positive");
  const double lhs = G.value(bmu / bl);
  const double rhs = bg / bl;
  return lhs <= rhs + slack;
}

double l2_norm(const GridSignal& w) {
  const Mat s = w.sampled();
  double acc = 0.0;
  for (int i = 0; i < s.cols(); ++i) acc += w.grid.node_mass(i) * s.col(i).squaredNorm();
  return std::sqrt(acc);
}

double l2_distance(const GridSignal& u, const GridSignal& w) {
  if (!(u.grid == w.grid)) throw std::invalid_argument("l2_distance: grids differ");
  const Mat a = u.sampled(), b = w.sampled();
  double acc = 0.0;
  for (int i = 0; i < a.cols(); ++i)
    acc += u.grid.node_mass(i) * (a.col(i) - b.col(i)).squaredNorm();
  return std::sqrt(acc);
}

Vec channel_means(const GridSignal& w) {
  const Mat s = w.sampled();
  Vec acc = Vec::Zero(w.channels());
  double mass = 0.0;
  for (int i = 0; i < s.cols(); ++i) {
    acc += w.grid.node_mass(i) * s.col(i);
    mass += w.grid.node_mass(i);
  }
  return acc / mass;
}

std::vector<MeasureWindow> dyadic_windows(const Grid& g, int depth) {
  const int count = 1 << depth;
  std::vector<MeasureWindow> out;
  out.reserve(count);
  const double len = (g.b - g.a) / count;
  for (int k = 0; k < count; ++k) out.emplace_back(g.a + k * len, g.a + (k + 1) * len);
  return out;
}

}  // namespace rof1d
