#pragma once

#include <functional>
#include <vector>

#include "rof1d/types.hpp"

namespace rof1d {

class Regularizer;
class Anisotropy;

// Point mass of the derivative, placed at the midpoint of a cell.
struct Atom {
  int cell = 0;
  Vec jump;
};

// Vector-valued signal on grid nodes plus explicit derivative atoms at cell
// midpoints. The function represented is the piecewise-linear interpolation
// of `values` plus a step of `jump` across each atom's midpoint; `sampled()`
// folds the steps into nodal values.
struct GridSignal {
  Grid grid;
  Mat values;  // channels x nodes
  std::vector<Atom> atoms;

  int channels() const { return static_cast<int>(values.rows()); }
  Mat sampled() const;

  static GridSignal constant(const Grid& g, const Vec& value);
  static GridSignal zero(const Grid& g, int channels);
};

struct DerivativeMeasure {
  Grid grid;
  Mat ac;  // channels x cells, density per cell
  std::vector<Atom> atoms;
};

DerivativeMeasure derivative(const GridSignal& w);

// convex integrand with recession used against derivative measures;
// a missing recession means "+infinity on every direction"
struct ConvexIntegrand {
  std::function<double(const VecRef&)> value;
  std::function<double(const VecRef&)> recession;  // evaluated at unit directions
};

ConvexIntegrand integrand(const Regularizer& R);
ConvexIntegrand norm_integrand(const Anisotropy& phi);

double variation(const DerivativeMeasure& mu, const MeasureWindow& win);
double truncated_variation(const DerivativeMeasure& mu, double k, const MeasureWindow& win);
double measure_value(const ConvexIntegrand& G, const DerivativeMeasure& mu,
                     const MeasureWindow& win);

struct ClassificationRule {
  double kappa = 1.0;
  double theta = 0.5;  // cell singular if |ac| dx > kappa dx^theta
};

double singular_mass(const DerivativeMeasure& mu, const MeasureWindow& win,
                     const ClassificationRule& rule);
// the classifier-free route: truncated variation at k = dx^{-1/2}
double sweep_singular_mass(const DerivativeMeasure& mu, const MeasureWindow& win);

// discrete convolution with the sampled bump of width eps, zero extension
// outside [a,b]; below 2 dx the signal is returned unchanged (warned = true).
GridSignal mollify(const GridSignal& w, double eps, bool* warned = nullptr);

// G( int b dmu / int b dL ) <= int b dG(mu) / int b dL within slack
bool jensen_check(const ConvexIntegrand& G, const DerivativeMeasure& mu, const Vec& b_cells,
                  const MeasureWindow& win, double slack = 1e-10);

// trapezoid L2 geometry on sampled nodal values
double l2_norm(const GridSignal& w);
double l2_distance(const GridSignal& u, const GridSignal& w);
Vec channel_means(const GridSignal& w);

std::vector<MeasureWindow> dyadic_windows(const Grid& g, int depth);

}  // namespace rof1d
