#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace rof1d {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;

// Uniform grid on [a,b] with N cells, N+1 nodes.
struct Grid {
  double a = 0.0;
  double b = 1.0;
  int cells = 0;

  Grid() = default;
  Grid(double a_, double b_, int cells_) : a(a_), b(b_), cells(cells_) {
    if (!(a < b) || cells <= 0) throw std::invalid_argument("Grid: need a < b and cells > 0");
  }

  double dx() const { return (b - a) / cells; }
  int nodes() const { return cells + 1; }
  double node(int i) const { return a + i * dx(); }
  double midpoint(int j) const { return a + (j + 0.5) * dx(); }

  // Trapezoid node weight (relative to dx): 1/2 at both ends, 1 inside.
  double node_weight(int i) const { return (i == 0 || i == cells) ? 0.5 : 1.0; }
  double node_mass(int i) const { return node_weight(i) * dx(); }

  bool operator==(const Grid& o) const { return a == o.a && b == o.b && cells == o.cells; }
};

// Closed sub-interval of [a,b].
struct MeasureWindow {
  double lo = 0.0;
  double hi = 1.0;

  MeasureWindow() = default;
  MeasureWindow(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) throw std::invalid_argument("MeasureWindow: need lo < hi");
  }
  double length() const { return hi - lo; }
};

class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rof1d
