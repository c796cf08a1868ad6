#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rof1d/bvsignal.hpp"
#include "rof1d/regularizer.hpp"

namespace rof1d {

struct SlackPolicy {
  double floor = 1e-8;
  double c_s = 0.0;  // slack = max(floor, c_s * dx)
  double slack(double dx) const { return std::max(floor, c_s * dx); }
};

struct ReportRow {
  double window_lo = 0, window_hi = 0;
  double k = -1.0;  // truncation level for k-sweep rows, -1 for plain rows
  double lhs = 0, rhs = 0;
  double ratio = 0;  // lhs/rhs where rhs > 0, else 0
  double slack = 0;
  bool pass = true;
  std::string label;
};

struct EstimateReport {
  std::string theorem;
  double dx = 0;
  double slack_constant = 0;  // the c_s in force
  std::vector<ReportRow> rows;
  int failures = 0;
  bool pass = true;
  double worst_violation = 0;

  void finish();
};

// Theorem "variation of the minimizer is dominated by the variation of the
// datum" for homogeneous regularizers, window by window, plus the truncated
// k-sweep rows for k in {0, 1, 2, 4, ..., 1024}.
EstimateReport check_homogeneous(const GridSignal& h, const GridSignal& u,
                                 const std::vector<MeasureWindow>& windows,
                                 const SlackPolicy& policy);

// |u_x^s| <= (c+/c-)^2 |h_x^s| per window; the minimizer's singular mass is
// taken from the k-sweep (primary) and the threshold classifier (secondary).
EstimateReport check_singular_constant(const GridSignal& h, const GridSignal& u,
                                       const std::vector<MeasureWindow>& windows,
                                       const NormEquivalence& eq, const SlackPolicy& policy,
                                       const ClassificationRule& rule = {});

// constant-free bound |u_x^s| <= |h_x^s| for the regular case; hypothesis
// probes must have been run by the caller (see verify_regular_hypotheses).
EstimateReport check_singular_regular(const GridSignal& h, const GridSignal& u,
                                      const std::vector<MeasureWindow>& windows,
                                      const SlackPolicy& policy,
                                      const ClassificationRule& rule = {});

// throws with the failed hypothesis name if the regular-case assumptions do
// not hold for (f, phi)
void verify_regular_hypotheses(const Regularizer& R, std::uint64_t seed);

struct CertificateReport {
  double endpoint_error = 0;      // |P(b)| per channel, max
  double max_dual = 0;            // max over cells of phi^*(P)
  int argmax_cell = -1;
  double max_ac_mismatch = 0;     // max |P - DF(Du)| over ac cells (regular case)
  bool checked_ac = false;
  bool pass_endpoint = false;
  bool pass_dual = false;
  std::vector<double> dual_values;  // phi^*(P_j) per cell
};

// P(x) = (1/lambda) int_a^x (u - h): endpoint condition, dual-ball membership
// (homogeneous), and P = DF(u_x) on cells classified absolutely continuous
// (regular case).
CertificateReport limit_el_certificate(const GridSignal& h, const GridSignal& u,
                                       const Regularizer& R, double lambda,
                                       const ClassificationRule& rule = {});

struct RefinementRow {
  int cells = 0;
  double dx = 0;
  double worst_violation = 0;
  double slack = 0;
  bool pass = true;
};

struct RefinementStudy {
  std::vector<RefinementRow> rows;
  bool pass = true;  // worst violation halves (+-20%) per doubling or < floor
};

RefinementStudy refinement_study(const std::function<double(int)>& worst_violation_at,
                                 const std::vector<int>& cell_counts, double floor = 1e-8);

// Calibrates c_s as 4x the median positive violation observed at the coarsest
// grid (0 when all violations vanish).
double calibrate_slack_constant(const std::vector<double>& violations, double coarse_dx);

}  // namespace rof1d
