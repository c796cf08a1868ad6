#pragma once

#include <vector>

#include "rof1d/bvsignal.hpp"
#include "rof1d/solver.hpp"

namespace rof1d {

struct FlowConfig {
  int steps = 32;
  double tau = 1.0 / 32.0;
  SolveConfig solver;
  int record_every = 1;
};

struct FlowRecord {
  int j;
  double t;
  GridSignal v;
};

struct FlowTrajectory {
  std::vector<FlowRecord> records;      // always includes j = 0
  std::vector<double> energies;         // F(v_j), j = 0..steps
  std::vector<double> dissipation_gap;  // F(v_{j-1}) - F(v_j) - |v_j - v_{j-1}|^2/(2 tau)
  bool homogeneous = false;             // monotonicity guaranteed only then
  double tau = 0.0;
};

// Iterated resolvent v_j = argmin of the ROF energy with datum v_{j-1} and
// weight tau. Homogeneous regularizers carry the variation-monotonicity
// guarantee; general profiles are allowed and merely reported.
FlowTrajectory minimizing_movements(const GridSignal& v0, const FlowConfig& cfg);

struct MonotonicityRow {
  int j;
  double t;
  double window_lo, window_hi;
  double var_now, var_prev;
  double violation;  // max(var_now - var_prev, 0)
};

std::vector<MonotonicityRow> flow_monotonicity_report(const FlowTrajectory& traj,
                                                      const std::vector<MeasureWindow>& windows);

}  // namespace rof1d
