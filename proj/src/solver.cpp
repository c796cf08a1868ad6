#include "rof1d/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

namespace rof1d {

std::vector<double> SolveConfig::default_eta_schedule() {
  // same geometric family as the 1e-1 -> 1e-6 ratio-1/4 ladder, extended
  // upward so the first stage is nearly quadratic (transition curvature
  // ~1/eta stays below the modeled eta) and downward so the eta*p flux bias
  // at jump cells drops beneath the cross-solver agreement tolerances
  std::vector<double> etas;
  for (double e = 6.4; e > 1e-9; e *= 0.25) etas.push_back(e);
  return etas;
}

std::vector<double> SolveConfig::default_eps_factors() { return {8.0, 4.0, 2.0, 0.0}; }

namespace {

// increasing f with f(lo) <= 0 <= f(hi): bisection to machine resolution
template <class F>
double bisect_root(F&& f, double lo, double hi) {
  if (f(lo) >= 0.0) return lo;
  if (f(hi) <= 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f(mid) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// General block-tridiagonal solve. diag[i] is modified. low[i] couples (i,i-1)
// (unused at i=0), up[i] couples (i,i+1) (unused at the last block).
Mat solve_block_tridiag(std::vector<Mat> diag, const std::vector<Mat>& low,
                        const std::vector<Mat>& up, Mat rhs) {
  const int M = static_cast<int>(diag.size());
  std::vector<Eigen::PartialPivLU<Mat>> lus;
  lus.reserve(M);
  lus.emplace_back(diag[0]);
  for (int i = 1; i < M; ++i) {
    const Mat sinv_up = lus[i - 1].solve(up[i - 1]);
    const Vec sinv_y = lus[i - 1].solve(rhs.col(i - 1));
    diag[i] -= low[i] * sinv_up;
    rhs.col(i) -= low[i] * sinv_y;
    lus.emplace_back(diag[i]);
  }
  Mat x(rhs.rows(), M);
  x.col(M - 1) = lus[M - 1].solve(rhs.col(M - 1));
  for (int i = M - 2; i >= 0; --i) x.col(i) = lus[i].solve(rhs.col(i) - up[i] * x.col(i + 1));
  return x;
}

std::vector<double> node_masses(const Grid& g) {
  std::vector<double> m(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) m[i] = g.node_mass(i);
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// taut string
// ---------------------------------------------------------------------------

GridSignal taut_string_solve(const GridSignal& h, double lambda) {
  if (h.channels() != 1) throw std::invalid_argument("taut_string_solve: scalar signals only");
  if (!(lambda >= 0.0)) throw std::invalid_argument("taut_string_solve: lambda >= 0");
  const Grid& g = h.grid;
  const int N = g.cells;
  const Mat hs = h.sampled();
  const auto m = node_masses(g);

  GridSignal out;
  out.grid = g;
  out.values.resize(1, N + 1);
  if (lambda == 0.0) {
    out.values = hs;
    return out;
  }

  // points k = 0..N+1 over the mass cumulative; tube of half-width lambda at
  // k = 1..N, pinned ends
  std::vector<double> X(N + 2), cum(N + 2);
  X[0] = 0.0;
  cum[0] = 0.0;
  for (int k = 1; k <= N + 1; ++k) {
    X[k] = X[k - 1] + m[k - 1];
    cum[k] = cum[k - 1] + m[k - 1] * hs(0, k - 1);
  }
  auto upper = [&](int k) { return k <= N ? cum[k] + lambda : cum[N + 1]; };
  auto lower = [&](int k) { return k <= N ? cum[k] - lambda : cum[N + 1]; };

  struct Knot {
    int idx;
    double x, y;
  };
  std::vector<Knot> knots;
  knots.push_back({0, 0.0, 0.0});

  int a_idx = 0;
  double ax = 0.0, ay = 0.0;
  double maxsl = std::numeric_limits<double>::infinity();
  double minsl = -std::numeric_limits<double>::infinity();
  int maxind = 1, minind = 1;
  int k = 1;
  while (k <= N + 1) {
    const double dxk = X[k] - ax;
    const double su = (upper(k) - ay) / dxk;
    const double sl = (lower(k) - ay) / dxk;
    if (sl > maxsl) {
      // forced through the upper bound at maxind
      knots.push_back({maxind, X[maxind], upper(maxind)});
      a_idx = maxind;
      ax = X[maxind];
      ay = upper(maxind);
      maxsl = std::numeric_limits<double>::infinity();
      minsl = -std::numeric_limits<double>::infinity();
      k = a_idx + 1;
      maxind = minind = k;
      continue;
    }
    if (su < minsl) {
      knots.push_back({minind, X[minind], lower(minind)});
      a_idx = minind;
      ax = X[minind];
      ay = lower(minind);
      maxsl = std::numeric_limits<double>::infinity();
      minsl = -std::numeric_limits<double>::infinity();
      k = a_idx + 1;
      maxind = minind = k;
      continue;
    }
    if (su < maxsl) {
      maxsl = su;
      maxind = k;
    }
    if (sl > minsl) {
      minsl = sl;
      minind = k;
    }
    if (k == N + 1) {
      knots.push_back({N + 1, X[N + 1], cum[N + 1]});
      break;
    }
    ++k;
  }

  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const Knot& k0 = knots[s];
    const Knot& k1 = knots[s + 1];
    const double slope = (k1.y - k0.y) / (k1.x - k0.x);
    for (int j = k0.idx; j < k1.idx; ++j) out.values(0, j) = slope;
  }
  return out;
}

// ---------------------------------------------------------------------------
// proximal maps of gamma * f(phi(.)) for the builtin analytic kinds
// ---------------------------------------------------------------------------

namespace {

Vec prox_composite(const Profile& f, const Anisotropy& phi, double gamma, const Vec& v) {
  const int n = static_cast<int>(v.size());
  switch (phi.kind()) {
    case AnisoKind::euclidean: {
      const double r0 = v.norm();
      if (r0 == 0.0) return Vec::Zero(n);
      const double r =
          bisect_root([&](double t) { return t + gamma * f.derivative(t) - r0; }, 0.0, r0);
      return (r / r0) * v;
    }
    case AnisoKind::l1: {
      const double smax = v.cwiseAbs().maxCoeff();
      if (smax == 0.0) return Vec::Zero(n);
      auto tsum = [&](double s) {
        double t = 0.0;
        for (int i = 0; i < n; ++i) t += std::max(std::abs(v[i]) - s, 0.0);
        return t;
      };
      const double s =
          bisect_root([&](double ss) { return ss - gamma * f.derivative(tsum(ss)); }, 0.0, smax);
      Vec p(n);
      for (int i = 0; i < n; ++i)
        p[i] = (v[i] > 0 ? 1.0 : -1.0) * std::max(std::abs(v[i]) - s, 0.0);
      return p;
    }
    case AnisoKind::linf: {
      const double smax = v.cwiseAbs().maxCoeff();
      if (smax == 0.0) return Vec::Zero(n);
      auto excess = [&](double t) {
        double e = 0.0;
        for (int i = 0; i < n; ++i) e += std::max(std::abs(v[i]) - t, 0.0);
        return e;
      };
      const double t =
          bisect_root([&](double tt) { return gamma * f.derivative(tt) - excess(tt); }, 0.0, smax);
      Vec p(n);
      for (int i = 0; i < n; ++i) p[i] = std::clamp(v[i], -t, t);
      return p;
    }
    case AnisoKind::weighted_l2: {
      const Vec& w = phi.weights();
      double dual = 0.0;
      for (int i = 0; i < n; ++i) dual += v[i] * v[i] / w[i];
      dual = std::sqrt(dual);
      if (dual <= gamma * f.derivative(0.0)) return Vec::Zero(n);
      auto tval = [&](double s) {
        double t = 0.0;
        for (int i = 0; i < n; ++i) {
          const double d = v[i] / (1.0 + s * w[i]);
          t += w[i] * d * d;
        }
        return std::sqrt(t);
      };
      auto psi = [&](double s) {
        const double t = tval(s);
        return s * t - gamma * f.derivative(t);
      };
      double hi = 1e-6;
      while (psi(hi) < 0.0 && hi < 1e30) hi *= 4.0;
      const double s = bisect_root(psi, 0.0, hi);
      Vec p(n);
      for (int i = 0; i < n; ++i) p[i] = v[i] / (1.0 + s * w[i]);
      return p;
    }
    default:
      throw SolveError("solve_exact_discrete: no proximal map for anisotropy kind " +
                       phi.describe());
  }
}

// ---------------------------------------------------------------------------
// projections onto the dual ball {phi^* <= lambda} and their Jacobians
// ---------------------------------------------------------------------------

Vec project_dual_ball(const Anisotropy& phi, double lambda, const Vec& y) {
  const int n = static_cast<int>(y.size());
  switch (phi.kind()) {
    case AnisoKind::euclidean: {
      const double r = y.norm();
      return r <= lambda ? y : Vec((lambda / r) * y);
    }
    case AnisoKind::l1: {  // dual ball is the box [-lambda, lambda]^n
      Vec p(n);
      for (int i = 0; i < n; ++i) p[i] = std::clamp(y[i], -lambda, lambda);
      return p;
    }
    case AnisoKind::weighted_l2: {  // ellipsoid sum q_i^2/(lambda^2 w_i) <= 1
      const Vec& w = phi.weights();
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += y[i] * y[i] / (lambda * lambda * w[i]);
      if (s <= 1.0) return y;
      auto resid = [&](double mu) {
        double r = 0.0;
        for (int i = 0; i < n; ++i) {
          const double a2 = lambda * lambda * w[i];
          const double t = a2 * y[i] / (a2 + mu);
          r += t * t / a2;
        }
        return 1.0 - r;  // increasing in mu
      };
      double hi = 1.0;
      while (resid(hi) < 0.0 && hi < 1e60) hi *= 4.0;
      const double mu = bisect_root(resid, 0.0, hi);
      Vec p(n);
      for (int i = 0; i < n; ++i) {
        const double a2 = lambda * lambda * w[i];
        p[i] = a2 * y[i] / (a2 + mu);
      }
      return p;
    }
    case AnisoKind::linf: {  // dual ball is the l1 ball of radius lambda
      double l1 = y.cwiseAbs().sum();
      if (l1 <= lambda) return y;
      const double smax = y.cwiseAbs().maxCoeff();
      auto excess = [&](double s) {
        double e = -lambda;
        for (int i = 0; i < n; ++i) e += std::max(std::abs(y[i]) - s, 0.0);
        return -e;  // increasing in s
      };
      const double s = bisect_root(excess, 0.0, smax);
      Vec p(n);
      for (int i = 0; i < n; ++i)
        p[i] = (y[i] > 0 ? 1.0 : -1.0) * std::max(std::abs(y[i]) - s, 0.0);
      return p;
    }
    default:
      throw SolveError("project_dual_ball: unsupported kind " + phi.describe());
  }
}

Mat project_dual_ball_jacobian(const Anisotropy& phi, double lambda, const Vec& y) {
  const int n = static_cast<int>(y.size());
  switch (phi.kind()) {
    case AnisoKind::euclidean: {
      const double r = y.norm();
      if (r <= lambda) return Mat::Identity(n, n);
      const Vec u = y / r;
      return (lambda / r) * (Mat::Identity(n, n) - u * u.transpose());
    }
    case AnisoKind::l1: {
      Mat J = Mat::Zero(n, n);
      for (int i = 0; i < n; ++i) J(i, i) = (std::abs(y[i]) <= lambda) ? 1.0 : 0.0;
      return J;
    }
    case AnisoKind::weighted_l2: {
      const Vec& w = phi.weights();
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += y[i] * y[i] / (lambda * lambda * w[i]);
      if (s <= 1.0) return Mat::Identity(n, n);
      auto resid = [&](double mu) {
        double r = 0.0;
        for (int i = 0; i < n; ++i) {
          const double a2 = lambda * lambda * w[i];
          const double t = a2 * y[i] / (a2 + mu);
          r += t * t / a2;
        }
        return 1.0 - r;
      };
      double hi = 1.0;
      while (resid(hi) < 0.0 && hi < 1e60) hi *= 4.0;
      const double mu = bisect_root(resid, 0.0, hi);
      Vec A(n), b(n);
      double s3 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double a2 = lambda * lambda * w[i];
        A[i] = a2 / (a2 + mu);
        b[i] = a2 * y[i] / ((a2 + mu) * (a2 + mu));
        s3 += a2 * y[i] * y[i] / std::pow(a2 + mu, 3);
      }
      Mat J = A.asDiagonal();
      if (s3 > 0.0) J -= (b * b.transpose()) / s3;
      return J;
    }
    case AnisoKind::linf: {
      const double l1 = y.cwiseAbs().sum();
      if (l1 <= lambda) return Mat::Identity(n, n);
      const double smax = y.cwiseAbs().maxCoeff();
      auto excess = [&](double s) {
        double e = -lambda;
        for (int i = 0; i < n; ++i) e += std::max(std::abs(y[i]) - s, 0.0);
        return -e;
      };
      const double s = bisect_root(excess, 0.0, smax);
      std::vector<int> act;
      for (int i = 0; i < n; ++i)
        if (std::abs(y[i]) > s) act.push_back(i);
      Mat J = Mat::Zero(n, n);
      for (int i : act) J(i, i) = 1.0;
      if (!act.empty()) {
        Vec sg = Vec::Zero(n);
        for (int i : act) sg[i] = y[i] > 0 ? 1.0 : -1.0;
        J -= (sg * sg.transpose()) / static_cast<double>(act.size());
      }
      return J;
    }
    default:
      throw SolveError("project_dual_ball_jacobian: unsupported kind");
  }
}

// ---------------------------------------------------------------------------
// accelerated Chambolle-Pock on the discrete functional
// ---------------------------------------------------------------------------

struct CpResult {
  Mat u;
  Mat q;  // cell duals, phi^*(q_j) <= lambda dx f_inf at optimum
  double gap = 0.0;
  long iters = 0;
  bool converged = false;
};

double primal_energy(const Mat& u, const Mat& h, const std::vector<double>& m, double c,
                     const Profile& f, const Anisotropy& phi, double dx) {
  const int N = static_cast<int>(u.cols()) - 1;
  double e = 0.0;
  Vec d(u.rows());
  for (int j = 0; j < N; ++j) {
    d = (u.col(j + 1) - u.col(j)) / dx;
    e += c * f.value(phi.value_raw(d.data()));
  }
  for (int i = 0; i <= N; ++i) e += 0.5 * m[i] * (u.col(i) - h.col(i)).squaredNorm();
  return e;
}

CpResult chambolle_pock(const Mat& h, const Grid& grid, const Profile& f, const Anisotropy& phi,
                        double lambda, long max_iter, double tol_gap) {
  const int N = grid.cells;
  const int n = static_cast<int>(h.rows());
  const double dx = grid.dx();
  const double c = lambda * dx;
  const double finf = f.recession();
  const auto m = node_masses(grid);

  Mat u = h, ubar = h, q = Mat::Zero(n, N);
  double tau = 0.5 * dx, sigma = 0.5 * dx;
  const double gamma_acc = 0.5 * dx;

  CpResult res;
  Vec y(n), tmp(n);
  Mat unew(n, N + 1);

  for (long it = 1; it <= max_iter; ++it) {
    // dual ascent with prox of sigma * Phi^*
    for (int j = 0; j < N; ++j) {
      y = q.col(j) + (sigma / dx) * (ubar.col(j + 1) - ubar.col(j));
      q.col(j) = y - sigma * prox_composite(f, phi, c / sigma, y / sigma);
    }
    // primal descent
    for (int i = 0; i <= N; ++i) {
      tmp.setZero();
      if (i > 0) tmp += q.col(i - 1);
      if (i < N) tmp -= q.col(i);
      const Vec v = u.col(i) - (tau / dx) * tmp;
      unew.col(i) = (v + tau * m[i] * h.col(i)) / (1.0 + tau * m[i]);
    }
    const double theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma_acc * tau);
    tau *= theta;
    sigma /= theta;
    ubar = unew + theta * (unew - u);
    u.swap(unew);
    res.iters = it;

    if (it % 64 == 0 || it == max_iter) {
      // duality gap at a feasible dual point
      Mat qf = q;
      for (int j = 0; j < N; ++j) {
        const double s = phi.dual_value(qf.col(j));
        const double cap = c * finf * (1.0 - 1e-14);
        if (s > cap) qf.col(j) *= cap / s;
      }
      double dual_val = 0.0;
      for (int i = 0; i <= N; ++i) {
        tmp.setZero();
        if (i > 0) tmp += qf.col(i - 1);
        if (i < N) tmp -= qf.col(i);
        tmp /= dx;  // (K^T q)_i
        dual_val += tmp.dot(h.col(i)) - tmp.squaredNorm() / (2.0 * m[i]);
      }
      for (int j = 0; j < N; ++j) dual_val -= c * f.conjugate(phi.dual_value(qf.col(j)) / c);
      const double ep = primal_energy(u, h, m, c, f, phi, dx);
      res.gap = ep - dual_val;
      if (res.gap <= tol_gap * (1.0 + std::abs(ep))) {
        res.converged = true;
        break;
      }
    }
  }
  res.u = u;
  res.q = q;
  return res;
}

// ---------------------------------------------------------------------------
// semismooth Newton finish on the dual ball-constrained QP (homogeneous F)
// ---------------------------------------------------------------------------

struct SsnResult {
  bool ok = false;
  int iters = 0;
  double residual = 0.0;
  Mat g;  // channels x cells, phi^*(g_j) <= lambda
};

SsnResult ssn_homogeneous(const Mat& h, const Grid& grid, const Anisotropy& phi, double lambda,
                          Mat g) {
  const int N = grid.cells;
  const int n = static_cast<int>(h.rows());
  const auto m = node_masses(grid);
  const double rho = grid.dx() / 8.0;

  auto residual_map = [&](const Mat& gg, Mat& F, Mat* Y = nullptr) {
    // u_i = h_i + (g_i - g_{i-1})/m_i, T_j = u_{j+1} - u_j
    Mat u(n, N + 1);
    for (int i = 0; i <= N; ++i) {
      Vec d = Vec::Zero(n);
      if (i < N) d += gg.col(i);
      if (i > 0) d -= gg.col(i - 1);
      u.col(i) = h.col(i) + d / m[i];
    }
    double worst = 0.0;
    for (int j = 0; j < N; ++j) {
      const Vec y = gg.col(j) + rho * (u.col(j + 1) - u.col(j));
      if (Y) Y->col(j) = y;
      F.col(j) = gg.col(j) - project_dual_ball(phi, lambda, y);
      worst = std::max(worst, F.col(j).cwiseAbs().maxCoeff());
    }
    return worst;
  };

  SsnResult out;
  Mat F(n, N), Y(n, N), Fnew(n, N);
  double res = residual_map(g, F, &Y);
  const double tol = 1e-13 * (1.0 + lambda);

  for (int it = 0; it < 40; ++it) {
    if (res <= tol) {
      out.ok = true;
      break;
    }
    std::vector<Mat> diag(N), low(N), up(N);
    for (int j = 0; j < N; ++j) {
      const Mat P = project_dual_ball_jacobian(phi, lambda, Y.col(j));
      const double kappa = 1.0 / m[j] + 1.0 / m[j + 1];
      diag[j] = Mat::Identity(n, n) - P * (1.0 - rho * kappa);
      diag[j] += 1e-14 * Mat::Identity(n, n);
      low[j] = -P * (rho / m[j]);      // couples (j, j-1)
      up[j] = -P * (rho / m[j + 1]);   // couples (j, j+1)
    }
    Mat rhs = -F;
    Mat delta = solve_block_tridiag(diag, low, up, rhs);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Mat gtrial = g + alpha * delta;
      const double rnew = residual_map(gtrial, Fnew, nullptr);
      if (rnew <= (1.0 - 1e-4 * alpha) * res) {
        g = gtrial;
        res = rnew;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    out.iters = it + 1;
    if (!accepted) break;
    residual_map(g, F, &Y);  // refresh Y for the next Jacobian
  }
  if (res <= tol) out.ok = true;
  out.residual = res;
  if (out.ok) {
    for (int j = 0; j < N; ++j) g.col(j) = project_dual_ball(phi, lambda, g.col(j));
  }
  out.g = std::move(g);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// exact discrete solver
// ---------------------------------------------------------------------------

std::pair<GridSignal, SolveDiagnostics> solve_exact_discrete(const GridSignal& h,
                                                             const SolveConfig& cfg) {
  const Grid& grid = h.grid;
  const int N = grid.cells;
  const int n = h.channels();
  const Mat hs = h.sampled();
  const auto m = node_masses(grid);
  const double dx = grid.dx();

  SolveDiagnostics diag;
  diag.solver = "pd";

  const bool homogeneous = cfg.profile.kind() == ProfileKind::identity;
  const bool projectable =
      cfg.phi.kind() == AnisoKind::euclidean || cfg.phi.kind() == AnisoKind::l1 ||
      cfg.phi.kind() == AnisoKind::weighted_l2 || cfg.phi.kind() == AnisoKind::linf;

  Mat u;
  if (homogeneous && projectable && cfg.pd.ssn_finish) {
    // warm start from a moderate CP phase, then Newton to machine precision
    CpResult warm = chambolle_pock(hs, grid, cfg.profile, cfg.phi, cfg.lambda,
                                   std::min<long>(cfg.pd.max_iter, 20000),
                                   std::max(cfg.pd.tol_gap, 1e-7));
    diag.pd_iters = warm.iters;
    SsnResult ssn = ssn_homogeneous(hs, grid, cfg.phi, cfg.lambda, warm.q / dx);
    if (ssn.ok) {
      diag.ssn_used = true;
      diag.ssn_iters = ssn.iters;
      diag.kkt_residual = ssn.residual;
      diag.dual = ssn.g;
      diag.has_dual = true;
      diag.pd_converged = true;
      u.resize(n, N + 1);
      for (int i = 0; i <= N; ++i) {
        Vec d = Vec::Zero(n);
        if (i < N) d += ssn.g.col(i);
        if (i > 0) d -= ssn.g.col(i - 1);
        u.col(i) = hs.col(i) + d / m[i];
      }
      // gap at the certified point
      double ep = primal_energy(u, hs, m, cfg.lambda * dx, cfg.profile, cfg.phi, dx);
      double dv = 0.0;
      Vec tmp(n);
      for (int i = 0; i <= N; ++i) {
        tmp.setZero();
        if (i > 0) tmp += ssn.g.col(i - 1);
        if (i < N) tmp -= ssn.g.col(i);
        dv += tmp.dot(hs.col(i)) - tmp.squaredNorm() / (2.0 * m[i]);
      }
      diag.pd_gap = ep - dv;
    }
  }
  if (u.size() == 0) {
    CpResult full = chambolle_pock(hs, grid, cfg.profile, cfg.phi, cfg.lambda, cfg.pd.max_iter,
                                   cfg.pd.tol_gap);
    diag.pd_gap = full.gap;
    diag.pd_iters = full.iters;
    diag.pd_converged = full.converged;
    u = full.u;
    // exact per-channel mass conservation (TV term is shift-invariant)
    double mass = 0.0;
    for (int i = 0; i <= N; ++i) mass += m[i];
    for (int ch = 0; ch < n; ++ch) {
      double def = 0.0;
      for (int i = 0; i <= N; ++i) def += m[i] * (hs(ch, i) - u(ch, i));
      u.row(ch).array() += def / mass;
    }
    diag.dual = full.q / dx;
    diag.has_dual = homogeneous;
  }

  GridSignal out;
  out.grid = grid;
  out.values = u;
  double mc = 0.0;
  for (int ch = 0; ch < n; ++ch) {
    double def = 0.0;
    for (int i = 0; i <= N; ++i) def += m[i] * (u(ch, i) - hs(ch, i));
    mc = std::max(mc, std::abs(def));
  }
  diag.mass_conservation_error = mc;
  return {out, diag};
}

// ---------------------------------------------------------------------------
// smoothed Newton solve and continuation
// ---------------------------------------------------------------------------

SmoothedSolveResult solve_smoothed(const GridSignal& h_eps, const SolveConfig& cfg, double eta,
                                   const Mat* warm_start) {
  const Grid& grid = h_eps.grid;
  const int N = grid.cells;
  const int n = h_eps.channels();
  const double dx = grid.dx();
  const double lambda = cfg.lambda;
  const auto m = node_masses(grid);

  const Regularizer R = (cfg.variant == RegVariant::eta_spliced)
                            ? Regularizer::smoothed_spliced(cfg.profile, cfg.phi, eta)
                            : Regularizer::smoothed_quad(cfg.profile, cfg.phi, eta);
  const double hess_step = (eta < 8e-5) ? eta / 8.0 : 1e-5;

  const Mat H = h_eps.sampled();
  Mat U = warm_start ? *warm_start : H;

  auto smoothed_energy = [&](const Mat& UU) {
    double e = 0.0;
    Vec d(n);
    for (int j = 0; j < N; ++j) {
      d = (UU.col(j + 1) - UU.col(j)) / dx;
      e += R.value_raw(d.data()) * dx;
    }
    e *= lambda;
    for (int i = 0; i <= N; ++i) e += 0.5 * m[i] * (UU.col(i) - H.col(i)).squaredNorm();
    return e;
  };

  Mat Du(n, N), G(n, N), grad(n, N + 1);
  auto compute_grad = [&](const Mat& UU) {
    for (int j = 0; j < N; ++j) {
      Du.col(j) = (UU.col(j + 1) - UU.col(j)) / dx;
      G.col(j).setZero();
      R.df_raw(Du.col(j).data(), G.col(j).data());
    }
    double el_res = 0.0;
    for (int i = 0; i <= N; ++i) {
      Vec flux = Vec::Zero(n);
      if (i < N) flux += G.col(i);
      if (i > 0) flux -= G.col(i - 1);
      grad.col(i) = m[i] * (UU.col(i) - H.col(i)) - lambda * flux;
      el_res = std::max(el_res, grad.col(i).cwiseAbs().maxCoeff() / m[i]);
    }
    return el_res;
  };

  double el_res = compute_grad(U);
  int iters = 0;
  std::vector<Mat> Hc(N), diagb(N + 1), low(N + 1), up(N + 1);
  Vec basis = Vec::Zero(n);
  double lm = 0.0;  // Levenberg damping, scaled by the node masses

  while (el_res > cfg.newton.tol_residual && iters < cfg.newton.max_iter) {
    // Hessian blocks per cell from HVPs, symmetrized
    for (int j = 0; j < N; ++j) {
      Mat Hj(n, n);
      for (int k = 0; k < n; ++k) {
        basis.setZero();
        basis[k] = 1.0;
        Hj.col(k) = R.d2f_apply(Du.col(j), basis, hess_step);
      }
      Hc[j] = 0.5 * (Hj + Hj.transpose());
    }
    const double s = lambda / dx;
    for (int i = 0; i <= N; ++i) {
      diagb[i] = (1.0 + lm) * m[i] * Mat::Identity(n, n);
      if (i < N) diagb[i] += s * Hc[i];
      if (i > 0) diagb[i] += s * Hc[i - 1];
      low[i] = (i > 0) ? Mat(-s * Hc[i - 1]) : Mat::Zero(n, n);
      up[i] = (i < N) ? Mat(-s * Hc[i]) : Mat::Zero(n, n);
    }
    Mat delta = solve_block_tridiag(diagb, low, up, -grad);

    const double e0 = smoothed_energy(U);
    double slope = 0.0;
    for (int i = 0; i <= N; ++i) slope += grad.col(i).dot(delta.col(i));
    // cap the move of each cell gradient: the quadratic model cannot see the
    // f_eta transition-zone curvature (~1/eta) from outside it, so grade any
    // crossing instead of letting the line search crawl
    double acap = 1.0;
    for (int j = 0; j < N; ++j) {
      const double move = (delta.col(j + 1) - delta.col(j)).norm() / dx;
      const double allowed = 0.6 * Du.col(j).norm() + 2.0 * eta;
      if (move > allowed) acap = std::min(acap, allowed / move);
    }
    // decreases below floating resolution of the energy count as accepted
    const double e_floor = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(e0));
    double alpha = acap;
    bool accepted = false;
    while (alpha >= cfg.newton.min_step) {
      const Mat Utrial = U + alpha * delta;
      if (smoothed_energy(Utrial) <= e0 + 1e-4 * alpha * slope + e_floor) {
        U = Utrial;
        accepted = true;
        break;
      }
      alpha *= cfg.newton.ls_factor;
    }
    if (!accepted)
      throw SolveError("solve_smoothed: Newton line search stagnated at eta=" +
                       std::to_string(eta) + ", residual=" + std::to_string(el_res));
    if (alpha < 0.125)
      lm = std::max(8.0 * lm, 1.0);
    else if (alpha > 0.5)
      lm *= 0.25;
    if (lm < 1e-3) lm = 0.0;
    el_res = compute_grad(U);
    ++iters;
  }
  if (el_res > cfg.newton.tol_residual)
    throw SolveError("solve_smoothed: Newton did not reach tolerance at eta=" +
                     std::to_string(eta) + ", residual=" + std::to_string(el_res));

  SmoothedSolveResult out;
  out.u.grid = grid;
  out.u.values = U;
  out.residual = el_res;
  out.iters = iters;
  out.energy = smoothed_energy(U);

  // discrete |u_x|^2 + 2 lambda eta |u_xx|^2 <= |h^eps_x|^2
  double lhs = 0.0;
  for (int j = 0; j < N; ++j) lhs += Du.col(j).squaredNorm() * dx;
  double uxx = 0.0;
  for (int i = 0; i <= N; ++i) {
    Vec z = Vec::Zero(n);
    if (i < N) z += Du.col(i);
    if (i > 0) z -= Du.col(i - 1);
    uxx += z.squaredNorm() / m[i];
  }
  lhs += 2.0 * lambda * eta * uxx;
  double rhs = 0.0;
  for (int j = 0; j < N; ++j) rhs += ((H.col(j + 1) - H.col(j)) / dx).squaredNorm() * dx;
  out.unif_lhs = lhs;
  out.unif_rhs = rhs;
  return out;
}

std::pair<GridSignal, SolveDiagnostics> continuation_solve(const GridSignal& h,
                                                           const SolveConfig& cfg) {
  const Grid& grid = h.grid;
  const double dx = grid.dx();
  std::vector<double> etas = cfg.eta_schedule.empty() ? SolveConfig::default_eta_schedule()
                                                      : cfg.eta_schedule;
  std::vector<double> eps_f = cfg.eps_factors.empty() ? SolveConfig::default_eps_factors()
                                                      : cfg.eps_factors;

  SolveDiagnostics diag;
  diag.solver = "continuation";

  Mat U;
  GridSignal u_final;
  std::vector<double> step_norms;
  double mass_err = 0.0;

  for (double ef : eps_f) {
    const double eps = ef * dx;
    const GridSignal h_eps = mollify(h, eps);
    double prev_energy = std::numeric_limits<double>::infinity();
    for (double eta : etas) {
      SmoothedSolveResult r =
          solve_smoothed(h_eps, cfg, eta, U.size() ? &U : nullptr);
      if (U.size()) {
        GridSignal prev;
        prev.grid = grid;
        prev.values = U;
        step_norms.push_back(l2_distance(r.u, prev));
      }
      U = r.u.values;
      diag.stages.push_back({eta, eps, r.energy, r.residual, r.iters, r.unif_lhs, r.unif_rhs});
      if (r.energy > prev_energy + 1e-8) diag.energy_monotone_ok = false;
      prev_energy = r.energy;
      u_final = r.u;
      // mass conservation against this stage's datum
      const Mat hsamp = h_eps.sampled();
      for (int ch = 0; ch < h.channels(); ++ch) {
        double def = 0.0;
        for (int i = 0; i < grid.nodes(); ++i)
          def += grid.node_mass(i) * (U(ch, i) - hsamp(ch, i));
        mass_err = std::max(mass_err, std::abs(def));
      }
    }
  }
  diag.mass_conservation_error = mass_err;
  if (step_norms.size() >= 3) {
    const std::size_t k = step_norms.size();
    diag.stage_contraction_ok =
        step_norms[k - 1] <= step_norms[k - 2] && step_norms[k - 2] <= step_norms[k - 3];
  }
  // adopted boundary form: u_x = 0 ghosts; check DF_eta vanishes there
  {
    const Regularizer R = (cfg.variant == RegVariant::eta_spliced)
                              ? Regularizer::smoothed_spliced(cfg.profile, cfg.phi, etas.back())
                              : Regularizer::smoothed_quad(cfg.profile, cfg.phi, etas.back());
    diag.boundary_flux_norm = R.df(Vec::Zero(h.channels())).norm();
  }
  return {u_final, diag};
}

double energy(const GridSignal& w, const GridSignal& h, const Regularizer& R, double lambda) {
  if (!(w.grid == h.grid)) throw std::invalid_argument("energy: grids differ");
  const MeasureWindow full(w.grid.a, w.grid.b);
  const double fid = l2_distance(w, h);
  return lambda * measure_value(integrand(R), derivative(w), full) + 0.5 * fid * fid;
}

}  // namespace rof1d
