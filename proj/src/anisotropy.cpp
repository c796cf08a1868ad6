#include "rof1d/anisotropy.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "rof1d/quadrature.hpp"
#include "rof1d/rng.hpp"

namespace rof1d {

namespace {

constexpr double kGolden = 1.6180339887498948482;

double norm2_raw(const double* p, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// ---- 1D marginal of the normalized shell bump, per dimension ----------------
//
// rho1_d(s) = integral over the orthogonal directions of shell_bump(|(s,y)|, d).
// C-infinity with support [-1,1]; tabulated once on a dense uniform grid.

class MarginalTable {
 public:
  explicit MarginalTable(int dim) : dim_(dim) {
    const int M = 4097;
    vals_.resize(M);
    const double h = 2.0 / (M - 1);
    for (int i = 0; i < M; ++i) {
      vals_[i] = compute(-1.0 + i * h);
    }
    // renormalize to unit mass under the same composite rule the integrals
    // use, so linear integrands are reproduced exactly
    double mass = 0.0;
    const GaussLegendre& rule = gl_rule(24);
    const int panels = 8;
    for (int p = 0; p < panels; ++p) {
      const double lo = -1.0 + 2.0 * p / panels, hi = -1.0 + 2.0 * (p + 1) / panels;
      mass += gl_integrate(rule, lo, hi, [&](double s) { return eval(s); });
    }
    for (double& v : vals_) v /= mass;
  }

  double eval(double s) const {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    const int M = static_cast<int>(vals_.size());
    const double t = (s + 1.0) * 0.5 * (M - 1);
    int i = static_cast<int>(t);
    if (i >= M - 1) i = M - 2;
    const double u = t - i;
    // Catmull-Rom with clamped ends
    const double y0 = vals_[std::max(i - 1, 0)];
    const double y1 = vals_[i];
    const double y2 = vals_[i + 1];
    const double y3 = vals_[std::min(i + 2, M - 1)];
    const double a = -0.5 * y0 + 1.5 * y1 - 1.5 * y2 + 0.5 * y3;
    const double b = y0 - 2.5 * y1 + 2.0 * y2 - 0.5 * y3;
    const double c = -0.5 * y0 + 0.5 * y2;
    return ((a * u + b) * u + c) * u + y1;
  }

 private:
  double compute(double s) const {
    const double lim = 1.0 - s * s;
    if (lim <= 0.0) return 0.0;
    const double tmax = std::sqrt(lim);
    // the shell bump vanishes identically below |y| = 1/2
    const double tmin = std::sqrt(std::max(0.0, 0.25 - s * s));
    const int d = dim_;
    if (d == 1) return shell_bump(std::abs(s), 1);
    if (d == 2) {
      return 2.0 * gl_integrate(gl_rule(64), tmin, tmax,
                                [&](double t) { return shell_bump(std::hypot(s, t), 2); });
    }
    // d == 3
    return 2.0 * M_PI * gl_integrate(gl_rule(64), tmin, tmax, [&](double u) {
             return shell_bump(std::hypot(s, u), 3) * u;
           });
  }

  int dim_;
  std::vector<double> vals_;
};

const MarginalTable& marginal(int dim) {
  static std::mutex mu;
  static std::unique_ptr<MarginalTable> tables[4];
  std::lock_guard<std::mutex> lock(mu);
  if (!tables[dim]) tables[dim] = std::make_unique<MarginalTable>(dim);
  return *tables[dim];
}

// Integrals against the marginal with a kink of |a + R s| at s = -a/R.
// Returns (M, S, T) = int of (|a+Rs|, sign(a+Rs), s*sign(a+Rs)) rho1 ds.
struct MstResult {
  double m = 0, s = 0, t = 0;
};

MstResult mst_integrals(double a, double R, int dim, int quad_scale) {
  const MarginalTable& tab = marginal(dim);
  const GaussLegendre& rule = gl_rule(24 * quad_scale);
  MstResult out;
  double cut = -2.0;
  if (R > 0.0) {
    const double c = -a / R;
    if (c > -1.0 && c < 1.0) cut = c;
  }
  // composite panels: the marginal has bump-scale features, so keep each
  // quadrature panel at most 1/4 wide
  auto panel = [&](double lo, double hi) {
    if (hi - lo <= 0.0) return;
    const int sub = std::max(1, static_cast<int>(std::ceil((hi - lo) / 0.25)));
    for (int ps = 0; ps < sub; ++ps) {
      const double plo = lo + (hi - lo) * ps / sub;
      const double phi_ = lo + (hi - lo) * (ps + 1) / sub;
      const double cc = 0.5 * (phi_ - plo), mm = 0.5 * (phi_ + plo);
      for (std::size_t k = 0; k < rule.x.size(); ++k) {
        const double s = mm + cc * rule.x[k];
        const double w = cc * rule.w[k] * tab.eval(s);
        const double v = a + R * s;
        out.m += w * std::abs(v);
        const double sg = sgn(v);
        out.s += w * sg;
        out.t += w * s * sg;
      }
    }
  };
  if (cut > -1.5) {
    panel(-1.0, cut);
    panel(cut, 1.0);
  } else {
    panel(-1.0, 1.0);
  }
  return out;
}

}  // namespace

// ---- factories --------------------------------------------------------------

Anisotropy Anisotropy::euclidean(int dim) {
  Anisotropy a;
  a.kind_ = AnisoKind::euclidean;
  a.dim_ = dim;
  return a;
}

Anisotropy Anisotropy::l1(int dim) {
  Anisotropy a;
  a.kind_ = AnisoKind::l1;
  a.dim_ = dim;
  return a;
}

Anisotropy Anisotropy::linf(int dim) {
  Anisotropy a;
  a.kind_ = AnisoKind::linf;
  a.dim_ = dim;
  return a;
}

Anisotropy Anisotropy::lp(int dim, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("lp anisotropy needs p > 1");
  Anisotropy a;
  a.kind_ = AnisoKind::lp;
  a.dim_ = dim;
  a.p_ = p;
  return a;
}

Anisotropy Anisotropy::weighted_l2(const Vec& weights) {
  if (weights.size() == 0 || (weights.array() <= 0.0).any())
    throw std::invalid_argument("weighted_l2 needs positive weights");
  Anisotropy a;
  a.kind_ = AnisoKind::weighted_l2;
  a.dim_ = static_cast<int>(weights.size());
  a.weights_ = weights;
  return a;
}

Anisotropy Anisotropy::sphere_mollified(const Anisotropy& base, double eta, int quad_scale) {
  if (!(eta > 0.0)) throw std::invalid_argument("sphere_mollified needs eta > 0");
  if (base.dim() > 3) throw std::invalid_argument("smoothed anisotropies support dim <= 3");
  Anisotropy a;
  a.kind_ = AnisoKind::smoothed;
  a.stage_ = SmoothStage::sphere_mollified;
  a.dim_ = base.dim();
  a.eta_ = eta;
  a.quad_scale_ = quad_scale;
  a.base_ = std::make_shared<Anisotropy>(base);
  if (base.kind() == AnisoKind::euclidean) {
    // rotationally symmetric: phi_bar = k_eta |p|
    double w[3] = {1.0, 0.0, 0.0};
    a.euclid_factor_ = a.tensor_unit_value(w);
  }
  return a;
}

Anisotropy Anisotropy::regularized(const Anisotropy& base, double eta, int quad_scale) {
  Anisotropy inner = sphere_mollified(base, eta, quad_scale);
  Anisotropy a;
  a.kind_ = AnisoKind::smoothed;
  a.stage_ = SmoothStage::regularized;
  a.dim_ = base.dim();
  a.eta_ = eta;
  a.quad_scale_ = quad_scale;
  a.base_ = std::make_shared<Anisotropy>(std::move(inner));
  return a;
}

const Anisotropy& Anisotropy::base() const {
  if (!base_) throw std::logic_error("base() on a non-smoothed anisotropy");
  return *base_;
}

// ---- analytic values ----------------------------------------------------------

double Anisotropy::value_raw(const double* p) const {
  const int n = dim_;
  switch (kind_) {
    case AnisoKind::euclidean:
      return norm2_raw(p, n);
    case AnisoKind::l1: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += std::abs(p[i]);
      return s;
    }
    case AnisoKind::linf: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s = std::max(s, std::abs(p[i]));
      return s;
    }
    case AnisoKind::lp: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += std::pow(std::abs(p[i]), p_);
      return std::pow(s, 1.0 / p_);
    }
    case AnisoKind::weighted_l2: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += weights_[i] * p[i] * p[i];
      return std::sqrt(s);
    }
    case AnisoKind::smoothed:
      return mollified_value_raw(p);
  }
  return 0.0;
}

void Anisotropy::gradient_raw(const double* p, double* g) const {
  const int n = dim_;
  switch (kind_) {
    case AnisoKind::euclidean: {
      const double r = norm2_raw(p, n);
      for (int i = 0; i < n; ++i) g[i] = p[i] / r;
      return;
    }
    case AnisoKind::l1: {
      for (int i = 0; i < n; ++i) g[i] = sgn(p[i]);
      return;
    }
    case AnisoKind::linf: {
      int jmax = 0;
      double best = std::abs(p[0]);
      for (int i = 1; i < n; ++i) {
        if (std::abs(p[i]) > best) {
          best = std::abs(p[i]);
          jmax = i;
        }
      }
      for (int i = 0; i < n; ++i) g[i] = 0.0;
      g[jmax] = sgn(p[jmax]);
      return;
    }
    case AnisoKind::lp: {
      const double v = value_raw(p);
      for (int i = 0; i < n; ++i)
        g[i] = std::pow(std::abs(p[i]) / v, p_ - 1.0) * sgn(p[i]);
      return;
    }
    case AnisoKind::weighted_l2: {
      const double v = value_raw(p);
      for (int i = 0; i < n; ++i) g[i] = weights_[i] * p[i] / v;
      return;
    }
    case AnisoKind::smoothed:
      mollified_gradient_raw(p, g);
      return;
  }
}

// ---- smoothed evaluation ------------------------------------------------------

double Anisotropy::mollified_value_raw(const double* p) const {
  const int n = dim_;
  const double r = norm2_raw(p, n);
  if (r == 0.0) return 0.0;

  if (stage_ == SmoothStage::regularized) {
    const double bar = base_->value_raw(p);
    return std::sqrt(bar * bar + eta_ * r * r);
  }

  const Anisotropy& b = *base_;
  if (b.kind() == AnisoKind::euclidean) return euclid_factor_ * r;
  if (b.kind() == AnisoKind::l1) {
    const double R = eta_ * r;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += mst_integrals(p[k], R, n, quad_scale_).m;
    return s;
  }
  double w[3];
  for (int i = 0; i < n; ++i) w[i] = p[i] / r;
  return r * tensor_unit_value(w);
}

void Anisotropy::mollified_gradient_raw(const double* p, double* g) const {
  const int n = dim_;
  const double r = norm2_raw(p, n);
  if (r == 0.0) throw std::domain_error("anisotropy gradient undefined at the origin");

  if (stage_ == SmoothStage::regularized) {
    const double bar = base_->value_raw(p);
    double gb[3];
    base_->gradient_raw(p, gb);
    const double v = std::sqrt(bar * bar + eta_ * r * r);
    for (int i = 0; i < n; ++i) g[i] = (bar * gb[i] + eta_ * p[i]) / v;
    return;
  }

  const Anisotropy& b = *base_;
  if (b.kind() == AnisoKind::euclidean) {
    for (int i = 0; i < n; ++i) g[i] = euclid_factor_ * p[i] / r;
    return;
  }
  if (b.kind() == AnisoKind::l1) {
    const double R = eta_ * r;
    double tsum = 0.0;
    double svals[3];
    for (int k = 0; k < n; ++k) {
      MstResult ms = mst_integrals(p[k], R, n, quad_scale_);
      svals[k] = ms.s;
      tsum += ms.t;
    }
    for (int j = 0; j < n; ++j) g[j] = svals[j] + eta_ * (p[j] / r) * tsum;
    return;
  }
  double w[3];
  for (int i = 0; i < n; ++i) w[i] = p[i] / r;
  tensor_unit_gradient(w, g);
}

namespace {

// Angles where a linear functional alpha . (c + rho e(theta)) vanishes.
void add_crossings(const double* c, double rho, double a1, double a2,
                   std::vector<double>& out) {
  const double A = rho * a1, B = rho * a2;
  const double amp = std::hypot(A, B);
  const double rhs = -(a1 * c[0] + a2 * c[1]);
  if (amp <= 0.0 || std::abs(rhs) > amp) return;
  const double base = std::atan2(B, A);
  const double d = std::acos(std::clamp(rhs / amp, -1.0, 1.0));
  for (double th : {base + d, base - d}) {
    th = std::fmod(th, 2.0 * M_PI);
    if (th < 0) th += 2.0 * M_PI;
    out.push_back(th);
  }
}

}  // namespace

double Anisotropy::tensor_unit_value(const double* w) const {
  const Anisotropy& b = *base_;
  const int n = dim_;
  const int qs = quad_scale_;
  const double eta = eta_;

  if (n == 1) {
    const GaussLegendre& rule = gl_rule(32 * qs);
    double acc = 0.0;
    for (double side : {-1.0, 1.0}) {
      acc += gl_integrate(rule, side < 0 ? -1.0 : 0.5, side < 0 ? -0.5 : 1.0, [&](double y) {
        double v = w[0] + eta * y;
        return b.value_raw(&v) * shell_bump(std::abs(y), 1);
      });
    }
    return acc;
  }

  if (n == 2) {
    const GaussLegendre& rad = gl_rule(32 * qs);
    const bool kinked = (b.kind() == AnisoKind::l1 || b.kind() == AnisoKind::linf ||
                         b.kind() == AnisoKind::lp);
    double acc = 0.0;
    const double rc = 0.25, rm = 0.75;  // map [-1,1] -> [1/2,1]
    for (std::size_t ir = 0; ir < rad.x.size(); ++ir) {
      const double r = rm + rc * rad.x[ir];
      const double wr = rc * rad.w[ir] * shell_bump(r, 2) * r;
      const double rho = eta * r;
      double inner = 0.0;
      if (!kinked) {
        const int na = 64 * qs;
        const double dth = 2.0 * M_PI / na;
        for (int k = 0; k < na; ++k) {
          const double th = (k + 0.5) * dth;
          double v[2] = {w[0] + rho * std::cos(th), w[1] + rho * std::sin(th)};
          inner += b.value_raw(v);
        }
        inner *= dth;
      } else {
        std::vector<double> cuts;
        add_crossings(w, rho, 1.0, 0.0, cuts);
        add_crossings(w, rho, 0.0, 1.0, cuts);
        if (b.kind() == AnisoKind::linf) {
          add_crossings(w, rho, 1.0, -1.0, cuts);
          add_crossings(w, rho, 1.0, 1.0, cuts);
        }
        cuts.push_back(0.0);
        cuts.push_back(2.0 * M_PI);
        std::sort(cuts.begin(), cuts.end());
        const GaussLegendre& ang = gl_rule(16 * qs);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
          inner += gl_integrate(ang, cuts[i], cuts[i + 1], [&](double th) {
            double v[2] = {w[0] + rho * std::cos(th), w[1] + rho * std::sin(th)};
            return b.value_raw(v);
          });
        }
      }
      acc += wr * inner;
    }
    return acc;
  }

  // n == 3: Gauss-Legendre radial x polar, uniform azimuthal.
  const GaussLegendre& rad = gl_rule(32 * qs);
  const GaussLegendre& pol = gl_rule(32 * qs);
  const int na = 64 * qs;
  const double dphi = 2.0 * M_PI / na;
  double acc = 0.0;
  for (std::size_t ir = 0; ir < rad.x.size(); ++ir) {
    const double r = 0.75 + 0.25 * rad.x[ir];
    const double wr = 0.25 * rad.w[ir] * shell_bump(r, 3) * r * r;
    const double rho = eta * r;
    for (std::size_t iu = 0; iu < pol.x.size(); ++iu) {
      const double u = pol.x[iu];
      const double su = std::sqrt(std::max(0.0, 1.0 - u * u));
      const double wu = pol.w[iu];
      for (int k = 0; k < na; ++k) {
        const double ph = (k + 0.5) * dphi;
        double v[3] = {w[0] + rho * su * std::cos(ph), w[1] + rho * su * std::sin(ph),
                       w[2] + rho * u};
        acc += wr * wu * dphi * b.value_raw(v);
      }
    }
  }
  return acc;
}

void Anisotropy::tensor_unit_gradient(const double* w, double* g) const {
  const Anisotropy& b = *base_;
  const int n = dim_;
  const int qs = quad_scale_;
  const double eta = eta_;
  for (int i = 0; i < n; ++i) g[i] = 0.0;

  auto accumulate = [&](const double* y, double weight) {
    double v[3], gb[3];
    for (int i = 0; i < n; ++i) v[i] = w[i] + eta * y[i];
    b.gradient_raw(v, gb);
    double ydg = 0.0;
    for (int i = 0; i < n; ++i) ydg += y[i] * gb[i];
    // d/dp of phi(p + |p| eta y) at |p|=1: Dphi(v) + eta (y . Dphi(v)) p-hat
    for (int i = 0; i < n; ++i) g[i] += weight * (gb[i] + eta * w[i] * ydg);
  };

  if (n == 1) {
    const GaussLegendre& rule = gl_rule(32 * qs);
    for (double side : {-1.0, 1.0}) {
      const double lo = side < 0 ? -1.0 : 0.5, hi = side < 0 ? -0.5 : 1.0;
      const double c = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
      for (std::size_t k = 0; k < rule.x.size(); ++k) {
        const double y = m + c * rule.x[k];
        accumulate(&y, c * rule.w[k] * shell_bump(std::abs(y), 1));
      }
    }
    return;
  }

  if (n == 2) {
    const GaussLegendre& rad = gl_rule(32 * qs);
    const bool kinked = (b.kind() == AnisoKind::l1 || b.kind() == AnisoKind::linf ||
                         b.kind() == AnisoKind::lp);
    for (std::size_t ir = 0; ir < rad.x.size(); ++ir) {
      const double r = 0.75 + 0.25 * rad.x[ir];
      const double wr = 0.25 * rad.w[ir] * shell_bump(r, 2) * r;
      const double rho = eta * r;
      if (!kinked) {
        const int na = 64 * qs;
        const double dth = 2.0 * M_PI / na;
        for (int k = 0; k < na; ++k) {
          const double th = (k + 0.5) * dth;
          double y[2] = {r * std::cos(th), r * std::sin(th)};
          accumulate(y, wr * dth);
        }
      } else {
        std::vector<double> cuts;
        add_crossings(w, rho, 1.0, 0.0, cuts);
        add_crossings(w, rho, 0.0, 1.0, cuts);
        if (b.kind() == AnisoKind::linf) {
          add_crossings(w, rho, 1.0, -1.0, cuts);
          add_crossings(w, rho, 1.0, 1.0, cuts);
        }
        cuts.push_back(0.0);
        cuts.push_back(2.0 * M_PI);
        std::sort(cuts.begin(), cuts.end());
        const GaussLegendre& ang = gl_rule(16 * qs);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
          const double lo = cuts[i], hi = cuts[i + 1];
          const double c = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
          for (std::size_t k = 0; k < ang.x.size(); ++k) {
            const double th = m + c * ang.x[k];
            double y[2] = {r * std::cos(th), r * std::sin(th)};
            accumulate(y, wr * c * ang.w[k]);
          }
        }
      }
    }
    return;
  }

  const GaussLegendre& rad = gl_rule(32 * qs);
  const GaussLegendre& pol = gl_rule(32 * qs);
  const int na = 64 * qs;
  const double dphi = 2.0 * M_PI / na;
  for (std::size_t ir = 0; ir < rad.x.size(); ++ir) {
    const double r = 0.75 + 0.25 * rad.x[ir];
    const double wr = 0.25 * rad.w[ir] * shell_bump(r, 3) * r * r;
    for (std::size_t iu = 0; iu < pol.x.size(); ++iu) {
      const double u = pol.x[iu];
      const double su = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int k = 0; k < na; ++k) {
        const double ph = (k + 0.5) * dphi;
        double y[3] = {r * su * std::cos(ph), r * su * std::sin(ph), r * u};
        accumulate(y, wr * pol.w[iu] * dphi);
      }
    }
  }
}

// ---- public wrappers ----------------------------------------------------------

double Anisotropy::value(const VecRef& p) const {
  if (p.size() != dim_) throw std::invalid_argument("anisotropy value: dimension mismatch");
  return value_raw(p.data());
}

Vec Anisotropy::gradient(const VecRef& p) const {
  if (p.size() != dim_) throw std::invalid_argument("anisotropy gradient: dimension mismatch");
  if (p.norm() == 0.0) throw std::domain_error("anisotropy gradient undefined at the origin");
  Vec g(dim_);
  gradient_raw(p.data(), g.data());
  return g;
}

double Anisotropy::dual_value(const VecRef& q) const {
  if (q.size() != dim_) throw std::invalid_argument("dual_value: dimension mismatch");
  const int n = dim_;
  switch (kind_) {
    case AnisoKind::euclidean:
      return q.norm();
    case AnisoKind::l1:
      return q.cwiseAbs().maxCoeff();
    case AnisoKind::linf:
      return q.cwiseAbs().sum();
    case AnisoKind::lp: {
      const double qq = p_ / (p_ - 1.0);
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += std::pow(std::abs(q[i]), qq);
      return std::pow(s, 1.0 / qq);
    }
    case AnisoKind::weighted_l2: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += q[i] * q[i] / weights_[i];
      return std::sqrt(s);
    }
    case AnisoKind::smoothed:
      break;
  }
  // sampled ascent of q.w / phi(w) over the unit sphere, then local polish
  if (q.norm() == 0.0) return 0.0;
  if (n == 1) {
    double plus = 1.0, minus = -1.0;
    return std::max(q[0] / value_raw(&plus), -q[0] / value_raw(&minus));
  }
  auto score = [&](const Vec& w) { return q.dot(w) / value_raw(w.data()); };
  const auto dirs = direction_table(n, n == 2 ? 4096 : 16384);
  double best = -1e300;
  Vec wbest;
  for (const auto& w : dirs) {
    const double s = score(w);
    if (s > best) {
      best = s;
      wbest = w;
    }
  }
  if (n == 2) {
    double th = std::atan2(wbest[1], wbest[0]);
    double lo = th - 2.0 * M_PI / 4096, hi = th + 2.0 * M_PI / 4096;
    auto fth = [&](double t) {
      Vec w(2);
      w << std::cos(t), std::sin(t);
      return score(w);
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = fth(x1), f2 = fth(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = fth(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = fth(x1);
      }
    }
    return std::max(best, std::max(f1, f2));
  }
  // n == 3: projected gradient ascent with backtracking
  Vec w = wbest;
  double fw = best;
  double step = 2.0 * M_PI / std::sqrt(16384.0);
  for (int it = 0; it < 120; ++it) {
    const double phi_w = value_raw(w.data());
    Vec dphi(3);
    gradient_raw(w.data(), dphi.data());
    Vec grad = q / phi_w - (q.dot(w) / (phi_w * phi_w)) * dphi;
    grad -= grad.dot(w) * w;
    if (grad.norm() < 1e-15) break;
    Vec wn = (w + step * grad).normalized();
    const double fn = score(wn);
    if (fn > fw) {
      w = wn;
      fw = fn;
      step *= 1.3;
    } else {
      step *= 0.5;
      if (step < 1e-14) break;
    }
  }
  return std::max(best, fw);
}

NormEquivalence Anisotropy::equivalence() const {
  NormEquivalence eq;
  const int n = dim_;
  switch (kind_) {
    case AnisoKind::euclidean:
      eq.lower = eq.upper = 1.0;
      return eq;
    case AnisoKind::l1:
      eq.lower = 1.0;
      eq.upper = std::sqrt(static_cast<double>(n));
      return eq;
    case AnisoKind::linf:
      eq.lower = 1.0 / std::sqrt(static_cast<double>(n));
      eq.upper = 1.0;
      return eq;
    case AnisoKind::lp: {
      const double f = std::pow(static_cast<double>(n), 1.0 / p_ - 0.5);
      if (p_ >= 2.0) {
        eq.lower = f;
        eq.upper = 1.0;
      } else {
        eq.lower = 1.0;
        eq.upper = f;
      }
      return eq;
    }
    case AnisoKind::weighted_l2:
      eq.lower = std::sqrt(weights_.minCoeff());
      eq.upper = std::sqrt(weights_.maxCoeff());
      return eq;
    case AnisoKind::smoothed:
      break;
  }
  const int count = (n == 1) ? 2 : (n == 2 ? 4096 : 16384);
  const auto dirs = direction_table(n, count);
  double lo = 1e300, hi = -1e300;
  for (const auto& w : dirs) {
    const double v = value_raw(w.data());
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  eq.lower = lo;
  eq.upper = hi;
  eq.sampled = true;
  eq.sample_size = count;
  return eq;
}

bool Anisotropy::smooth_away_from_origin() const {
  switch (kind_) {
    case AnisoKind::euclidean:
    case AnisoKind::weighted_l2:
    case AnisoKind::lp:
    case AnisoKind::smoothed:
      return true;
    default:
      return false;
  }
}

std::string Anisotropy::describe() const {
  switch (kind_) {
    case AnisoKind::euclidean: return "euclidean(" + std::to_string(dim_) + ")";
    case AnisoKind::l1: return "l1(" + std::to_string(dim_) + ")";
    case AnisoKind::linf: return "linf(" + std::to_string(dim_) + ")";
    case AnisoKind::lp: return "lp(" + std::to_string(dim_) + ",p=" + std::to_string(p_) + ")";
    case AnisoKind::weighted_l2: return "weighted_l2(" + std::to_string(dim_) + ")";
    case AnisoKind::smoothed:
      return std::string(stage_ == SmoothStage::sphere_mollified ? "mollified[" : "regularized[") +
             base().describe() + ",eta=" + std::to_string(eta_) + "]";
  }
  return "?";
}

std::vector<Vec> Anisotropy::direction_table(int dim, int count) {
  std::vector<Vec> out;
  if (dim == 1) {
    Vec a(1), b(1);
    a << 1.0;
    b << -1.0;
    out = {a, b};
    return out;
  }
  out.reserve(count);
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * M_PI * (k + 0.5) / count;
      Vec w(2);
      w << std::cos(th), std::sin(th);
      out.push_back(w);
    }
    return out;
  }
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double ph = 2.0 * M_PI * k / kGolden;
    Vec w(3);
    w << r * std::cos(ph), r * std::sin(ph), z;
    out.push_back(w);
  }
  return out;
}

// ---- spliced square -----------------------------------------------------------

SplicedSquare::SplicedSquare(const Anisotropy& phi_tilde, double eta)
    : phi_(phi_tilde), eta_(eta) {
  if (phi_tilde.kind() != AnisoKind::smoothed ||
      phi_tilde.stage() != SmoothStage::regularized)
    throw std::invalid_argument("SplicedSquare needs a regularized anisotropy");
  // lower bound on the original base's c-: walk to the analytic root
  const Anisotropy* root = &phi_tilde;
  while (root->kind() == AnisoKind::smoothed) root = &root->base();
  const double clo = root->equivalence().lower;
  t0_ = eta * std::sqrt(clo * clo + eta);
  t1_ = 0.5 * t0_;
  const double d = t0_ - t1_;
  // psi' ramps from 0 to 2t over [t1,t0] through a smoothstep; integrate it
  // so psi is continuous with psi(t) = t^2 beyond t0.
  const double a1 = d * (t1_ + 0.7 * d);
  c0_ = t0_ * t0_ - a1;
}

double SplicedSquare::psi(double t) const {
  if (t >= t0_) return t * t;
  if (t <= t1_) return c0_;
  const double d = t0_ - t1_;
  const double x = (t - t1_) / d;
  const double x3 = x * x * x, x4 = x3 * x, x5 = x4 * x;
  const double a = d * (2.0 * t1_ * (x3 - 0.5 * x4) + 2.0 * d * (0.75 * x4 - 0.4 * x5));
  return c0_ + a;
}

double SplicedSquare::dpsi(double t) const {
  if (t >= t0_) return 2.0 * t;
  if (t <= t1_) return 0.0;
  const double x = (t - t1_) / (t0_ - t1_);
  return 2.0 * t * (3.0 * x * x - 2.0 * x * x * x);
}

double SplicedSquare::value_raw(const double* p) const { return psi(phi_.value_raw(p)); }

void SplicedSquare::gradient_raw(const double* p, double* g) const {
  const double t = phi_.value_raw(p);
  if (t <= t1_) {
    for (int i = 0; i < phi_.dim(); ++i) g[i] = 0.0;
    return;
  }
  phi_.gradient_raw(p, g);
  const double s = dpsi(t);
  for (int i = 0; i < phi_.dim(); ++i) g[i] *= s;
}

double SplicedSquare::value(const VecRef& p) const {
  if (p.size() != phi_.dim()) throw std::invalid_argument("SplicedSquare: dimension mismatch");
  return value_raw(p.data());
}

Vec SplicedSquare::gradient(const VecRef& p) const {
  if (p.size() != phi_.dim()) throw std::invalid_argument("SplicedSquare: dimension mismatch");
  Vec g(phi_.dim());
  gradient_raw(p.data(), g.data());
  return g;
}

// ---- Reshetnyak probe -----------------------------------------------------------

ReshetnyakReport reshetnyak_probe(const Anisotropy& phi, int trials, std::uint64_t seed) {
  const int n = phi.dim();
  ReshetnyakReport rep;
  rep.min_relative_gap = 1e300;
  Rng rng(seed);

  auto test_pair = [&](const Vec& p, const Vec& q) {
    const double sp = phi.value(p), sq = phi.value(q);
    if (sp <= 0 || sq <= 0) return;
    const double gap = (sp + sq - phi.value(p + q)) / (sp + sq);
    rep.min_relative_gap = std::min(rep.min_relative_gap, gap);
    if (gap <= 1e-9 && !rep.witness_found) {
      rep.witness_found = true;
      rep.witness_p = p;
      rep.witness_q = q;
    }
  };

  // deterministic axis pairs first: they expose l1/linf immediately
  for (int i = 0; i < n && rep.trials < trials; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (double s : {1.0, -1.0}) {
        Vec p = Vec::Zero(n), q = Vec::Zero(n);
        p[i] = 1.0;
        q[j] = s;
        test_pair(p, q);
        ++rep.trials;
      }
    }
  }
  while (rep.trials < trials) {
    Vec p(n), q(n);
    for (int i = 0; i < n; ++i) {
      p[i] = rng.uniform(-1.0, 1.0);
      q[i] = rng.uniform(-1.0, 1.0);
    }
    if (p.norm() < 1e-6 || q.norm() < 1e-6) continue;
    const double cosang = p.dot(q) / (p.norm() * q.norm());
    if (cosang > 1.0 - 1e-12) continue;  // non-negative multiple of p
    test_pair(p, q);
    ++rep.trials;
  }
  rep.strict = !rep.witness_found;
  return rep;
}

}  // namespace rof1d
