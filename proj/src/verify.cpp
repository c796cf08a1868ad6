#include "rof1d/verify.hpp"

#include <algorithm>
#include <cmath>

#include "rof1d/anisotropy.hpp"

namespace rof1d {

void EstimateReport::finish() {
  failures = 0;
  worst_violation = 0;
  for (auto& r : rows) {
    const double viol = std::max(r.lhs - r.rhs - r.slack, 0.0);
    if (viol > 0) ++failures;
    r.pass = viol <= 0;
    worst_violation = std::max(worst_violation, std::max(r.lhs - r.rhs, 0.0));
  }
  pass = failures == 0;
}

namespace {

ReportRow make_row(const MeasureWindow& w, double lhs, double rhs, double slack, double k = -1.0) {
  ReportRow row;
  row.window_lo = w.lo;
  row.window_hi = w.hi;
  row.k = k;
  row.lhs = lhs;
  row.rhs = rhs;
  row.ratio = rhs > 0 ? lhs / rhs : 0.0;
  row.slack = slack;
  return row;
}

}  // namespace

EstimateReport check_homogeneous(const GridSignal& h, const GridSignal& u,
                                 const std::vector<MeasureWindow>& windows,
                                 const SlackPolicy& policy) {
  if (!(h.grid == u.grid)) throw std::invalid_argument("check_homogeneous: grids differ");
  EstimateReport rep;
  rep.theorem = "homogeneous_variation";
  rep.dx = h.grid.dx();
  rep.slack_constant = policy.c_s;
  const double slack = policy.slack(rep.dx);
  const DerivativeMeasure mh = derivative(h);
  const DerivativeMeasure mu = derivative(u);
  for (const auto& w : windows) {
    auto row = make_row(w, variation(mu, w), variation(mh, w), slack);
    row.label = "variation";
    rep.rows.push_back(row);
    for (double k : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0}) {
      auto kr = make_row(w, truncated_variation(mu, k, w), truncated_variation(mh, k, w), slack, k);
      kr.label = "truncated";
      rep.rows.push_back(kr);
    }
  }
  rep.finish();
  return rep;
}

EstimateReport check_singular_constant(const GridSignal& h, const GridSignal& u,
                                       const std::vector<MeasureWindow>& windows,
                                       const NormEquivalence& eq, const SlackPolicy& policy,
                                       const ClassificationRule& rule) {
  if (!(h.grid == u.grid)) throw std::invalid_argument("check_singular_constant: grids differ");
  EstimateReport rep;
  rep.theorem = "singular_constant";
  rep.dx = h.grid.dx();
  rep.slack_constant = policy.c_s;
  const double slack = policy.slack(rep.dx);
  const double factor = (eq.upper / eq.lower) * (eq.upper / eq.lower);
  const DerivativeMeasure mu = derivative(u);
  for (const auto& w : windows) {
    double atom_mass = 0.0;
    for (const auto& a : h.atoms) {
      const double x = h.grid.midpoint(a.cell);
      if (x >= w.lo && x <= w.hi) atom_mass += a.jump.norm();
    }
    const double rhs = factor * atom_mass;
    auto sweep = make_row(w, sweep_singular_mass(mu, w), rhs, slack);
    sweep.label = "ksweep";
    rep.rows.push_back(sweep);
    auto cls = make_row(w, singular_mass(mu, w, rule), rhs, slack);
    cls.label = "classifier";
    rep.rows.push_back(cls);
  }
  rep.finish();
  return rep;
}

EstimateReport check_singular_regular(const GridSignal& h, const GridSignal& u,
                                      const std::vector<MeasureWindow>& windows,
                                      const SlackPolicy& policy, const ClassificationRule& rule) {
  if (!(h.grid == u.grid)) throw std::invalid_argument("check_singular_regular: grids differ");
  EstimateReport rep;
  rep.theorem = "singular_regular";
  rep.dx = h.grid.dx();
  rep.slack_constant = policy.c_s;
  const double slack = policy.slack(rep.dx);
  const DerivativeMeasure mu = derivative(u);
  for (const auto& w : windows) {
    double atom_mass = 0.0;
    for (const auto& a : h.atoms) {
      const double x = h.grid.midpoint(a.cell);
      if (x >= w.lo && x <= w.hi) atom_mass += a.jump.norm();
    }
    auto sweep = make_row(w, sweep_singular_mass(mu, w), atom_mass, slack);
    sweep.label = "ksweep";
    rep.rows.push_back(sweep);
    auto cls = make_row(w, singular_mass(mu, w, rule), atom_mass, slack);
    cls.label = "classifier";
    rep.rows.push_back(cls);
  }
  rep.finish();
  return rep;
}

void verify_regular_hypotheses(const Regularizer& R, std::uint64_t seed) {
  const Profile& f = R.profile();
  if (!f.strictly_convex())
    throw std::invalid_argument("regular-case hypothesis failed: profile not strictly convex");
  if (!f.differentiable())
    throw std::invalid_argument("regular-case hypothesis failed: profile not differentiable");
  if (!f.zero_slope_at_zero())
    throw std::invalid_argument("regular-case hypothesis failed: f'(0) != 0");
  if (!R.anisotropy().smooth_away_from_origin())
    throw std::invalid_argument(
        "regular-case hypothesis failed: anisotropy not C^1 away from the origin");
  const auto probe = reshetnyak_probe(R.anisotropy(), 4000, seed);
  if (!probe.strict)
    throw std::invalid_argument(
        "regular-case hypothesis failed: anisotropy not strictly convex (Reshetnyak); witness "
        "found");
}

CertificateReport limit_el_certificate(const GridSignal& h, const GridSignal& u,
                                       const Regularizer& R, double lambda,
                                       const ClassificationRule& rule) {
  if (R.variant() != RegVariant::exact)
    throw std::invalid_argument("limit_el_certificate: exact regularizer required");
  const Grid& g = h.grid;
  const int N = g.cells;
  const int n = h.channels();
  const Mat hs = h.sampled();
  const Mat us = u.sampled();
  const double dx = g.dx();

  CertificateReport rep;
  rep.dual_values.resize(N);

  // P on cell j is the cumulative trapezoid integral of (u - h)/lambda through node j
  Mat P(n, N);
  Vec acc = Vec::Zero(n);
  for (int j = 0; j < N; ++j) {
    acc += g.node_mass(j) * (us.col(j) - hs.col(j));
    P.col(j) = acc / lambda;
  }
  acc += g.node_mass(N) * (us.col(N) - hs.col(N));
  rep.endpoint_error = (acc / lambda).cwiseAbs().maxCoeff();
  rep.pass_endpoint = rep.endpoint_error <= 1e-8;

  const double threshold = rule.kappa * std::pow(dx, rule.theta - 1.0);
  const DerivativeMeasure mu = derivative(u);
  rep.checked_ac = R.regular_case();
  double max_dual = -1.0;
  for (int j = 0; j < N; ++j) {
    const double dv = R.anisotropy().dual_value(P.col(j));
    rep.dual_values[j] = dv;
    if (dv > max_dual) {
      max_dual = dv;
      rep.argmax_cell = j;
    }
    if (rep.checked_ac && mu.ac.col(j).norm() <= threshold) {
      const Vec df = R.df(mu.ac.col(j));
      rep.max_ac_mismatch = std::max(rep.max_ac_mismatch, (P.col(j) - df).norm());
    }
  }
  rep.max_dual = max_dual;
  rep.pass_dual = !R.homogeneous() || max_dual <= 1.0 + 1e-6;
  return rep;
}

RefinementStudy refinement_study(const std::function<double(int)>& worst_violation_at,
                                 const std::vector<int>& cell_counts, double floor) {
  RefinementStudy st;
  double prev = -1.0;
  for (int N : cell_counts) {
    RefinementRow row;
    row.cells = N;
    row.dx = 1.0 / N;
    row.worst_violation = worst_violation_at(N);
    row.pass = true;
    if (row.worst_violation > floor && prev >= 0.0) {
      if (prev <= floor) {
        row.pass = false;  // grew out of the floor
      } else {
        const double ratio = row.worst_violation / prev;
        row.pass = ratio >= 0.4 && ratio <= 0.6;
      }
    }
    st.pass = st.pass && row.pass;
    prev = row.worst_violation;
    st.rows.push_back(row);
  }
  return st;
}

double calibrate_slack_constant(const std::vector<double>& violations, double coarse_dx) {
  std::vector<double> positive;
  for (double v : violations)
    if (v > 0.0) positive.push_back(v);
  if (positive.empty()) return 0.0;
  std::sort(positive.begin(), positive.end());
  const double median = positive[positive.size() / 2];
  return 4.0 * median / coarse_dx;
}

}  // namespace rof1d
