#include "rof1d/regularizer.hpp"

#include <cmath>

#include "rof1d/rng.hpp"

namespace rof1d {

Regularizer::Regularizer(Profile f, Anisotropy phi) : f_(std::move(f)), phi_(std::move(phi)) {}

Regularizer Regularizer::smoothed_quad(Profile f, Anisotropy phi, double eta) {
  Regularizer r(std::move(f), std::move(phi));
  r.variant_ = RegVariant::eta_quad;
  r.eta_ = eta;
  r.f_eta_ = std::make_shared<MollifiedProfile>(r.f_, eta);
  r.phi_smooth_ = std::make_shared<Anisotropy>(Anisotropy::sphere_mollified(r.phi_, eta));
  return r;
}

Regularizer Regularizer::smoothed_spliced(Profile f, Anisotropy phi, double eta) {
  Regularizer r(std::move(f), std::move(phi));
  r.variant_ = RegVariant::eta_spliced;
  r.eta_ = eta;
  r.f_eta_ = std::make_shared<MollifiedProfile>(r.f_, eta);
  r.phi_smooth_ = std::make_shared<Anisotropy>(Anisotropy::regularized(r.phi_, eta));
  r.spliced_ = std::make_shared<SplicedSquare>(*r.phi_smooth_, eta);
  return r;
}

const Anisotropy& Regularizer::smoothed_anisotropy() const {
  if (!phi_smooth_) throw std::logic_error("smoothed_anisotropy() on exact variant");
  return *phi_smooth_;
}

bool Regularizer::regular_case() const {
  return f_.regular_case() && phi_.smooth_away_from_origin();
}

bool Regularizer::homogeneous() const {
  return variant_ == RegVariant::exact && f_.kind() == ProfileKind::identity;
}

double Regularizer::value_raw(const double* p) const {
  switch (variant_) {
    case RegVariant::exact:
      return f_.value(phi_.value_raw(p));
    case RegVariant::eta_quad: {
      double n2 = 0.0;
      for (int i = 0; i < dim(); ++i) n2 += p[i] * p[i];
      return f_eta_->value(phi_smooth_->value_raw(p)) + 0.5 * eta_ * n2;
    }
    case RegVariant::eta_spliced:
      return f_eta_->value(phi_smooth_->value_raw(p)) + 0.5 * eta_ * spliced_->value_raw(p);
  }
  return 0.0;
}

double Regularizer::value(const VecRef& p) const {
  if (p.size() != dim()) throw std::invalid_argument("Regularizer value: dimension mismatch");
  return value_raw(p.data());
}

bool Regularizer::at_kink(const double* p) const {
  const int n = dim();
  double norm = 0.0;
  for (int i = 0; i < n; ++i) norm += p[i] * p[i];
  norm = std::sqrt(norm);
  if (norm == 0.0) return true;
  switch (phi_.kind()) {
    case AnisoKind::l1:
      for (int i = 0; i < n; ++i)
        if (std::abs(p[i]) <= 1e-14 * norm) return true;
      return false;
    case AnisoKind::linf: {
      double best = 0.0;
      int count = 0;
      for (int i = 0; i < n; ++i) best = std::max(best, std::abs(p[i]));
      for (int i = 0; i < n; ++i)
        if (std::abs(p[i]) >= best * (1.0 - 1e-12)) ++count;
      return count > 1;
    }
    default:
      return false;
  }
}

void Regularizer::df_raw(const double* p, double* g) const {
  const int n = dim();
  double norm = 0.0;
  for (int i = 0; i < n; ++i) norm += p[i] * p[i];
  norm = std::sqrt(norm);

  switch (variant_) {
    case RegVariant::exact: {
      if (norm == 0.0) {
        if (f_.zero_slope_at_zero() && f_.differentiable()) {
          for (int i = 0; i < n; ++i) g[i] = 0.0;
          return;
        }
        throw std::domain_error("DF: nonsmooth point (origin)");
      }
      if (!regular_case() && at_kink(p)) throw std::domain_error("DF: nonsmooth point");
      const double fp = f_.derivative(phi_.value_raw(p));
      phi_.gradient_raw(p, g);
      for (int i = 0; i < n; ++i) g[i] *= fp;
      return;
    }
    case RegVariant::eta_quad: {
      if (norm == 0.0) {
        for (int i = 0; i < n; ++i) g[i] = 0.0;
        return;
      }
      const double s = phi_smooth_->value_raw(p);
      const double fp = f_eta_->derivative(s);
      if (fp == 0.0) {
        for (int i = 0; i < n; ++i) g[i] = eta_ * p[i];
        return;
      }
      phi_smooth_->gradient_raw(p, g);
      for (int i = 0; i < n; ++i) g[i] = fp * g[i] + eta_ * p[i];
      return;
    }
    case RegVariant::eta_spliced: {
      if (norm == 0.0) {
        for (int i = 0; i < n; ++i) g[i] = 0.0;
        return;
      }
      const double s = phi_smooth_->value_raw(p);
      const double fp = f_eta_->derivative(s);
      double gs[3];
      spliced_->gradient_raw(p, gs);
      if (fp == 0.0) {
        for (int i = 0; i < n; ++i) g[i] = 0.5 * eta_ * gs[i];
        return;
      }
      phi_smooth_->gradient_raw(p, g);
      for (int i = 0; i < n; ++i) g[i] = fp * g[i] + 0.5 * eta_ * gs[i];
      return;
    }
  }
}

Vec Regularizer::df(const VecRef& p) const {
  if (p.size() != dim()) throw std::invalid_argument("Regularizer df: dimension mismatch");
  Vec g(dim());
  df_raw(p.data(), g.data());
  return g;
}

Vec Regularizer::d2f_apply(const VecRef& p, const VecRef& v, double step) const {
  if (variant_ == RegVariant::exact)
    throw std::logic_error("d2f_apply is provided for the smoothed variants only");
  const int n = dim();
  const double vn = v.norm();
  if (vn == 0.0) return Vec::Zero(n);
  const double h = (step > 0.0 ? step : 1e-5) * (1.0 + p.norm());
  Vec u = v / vn;
  Vec pp = p + h * u, pm = p - h * u;
  Vec gp(n), gm(n);
  df_raw(pp.data(), gp.data());
  df_raw(pm.data(), gm.data());
  return (vn / (2.0 * h)) * (gp - gm);
}

double Regularizer::recession_value_raw(const double* p) const {
  const double finf = f_.recession();
  if (variant_ == RegVariant::exact) return finf * phi_.value_raw(p);
  return finf * phi_smooth_->value_raw(p);
}

double Regularizer::recession_value(const VecRef& p) const {
  if (p.size() != dim()) throw std::invalid_argument("recession: dimension mismatch");
  return recession_value_raw(p.data());
}

Regularizer::GrowthBounds Regularizer::growth_bounds() const {
  const auto eq = phi_.equivalence();
  const double finf = f_.recession();
  GrowthBounds gb;
  gb.c_plus = finf * eq.upper;
  gb.b_plus = f_.value(0.0);
  gb.c_minus = finf * eq.lower;
  // f(t) >= f_inf t + B with B = lim (f(t) - f_inf t); evaluate far out
  const double t_far = 1e9;
  gb.b_minus = f_.value(t_far) - finf * t_far;
  return gb;
}

InjectivityReport df_injectivity_probe(const Regularizer& R, int trials, std::uint64_t seed) {
  if (R.variant() != RegVariant::exact || !R.regular_case())
    throw std::invalid_argument("df_injectivity_probe needs a regular-case exact regularizer");
  const int n = R.dim();
  const double finf = R.profile().recession();
  Rng rng(seed);
  InjectivityReport rep;
  rep.min_margin_to_limit_image = 1e300;
  rep.min_monotonicity_gap = 1e300;
  const auto dirs = Anisotropy::direction_table(n, n == 1 ? 2 : 256);
  for (int t = 0; t < trials; ++t) {
    Vec p(n), q(n);
    for (int i = 0; i < n; ++i) {
      p[i] = rng.uniform(-10.0, 10.0);
      q[i] = rng.uniform(-10.0, 10.0);
    }
    const Vec dfp = R.df(p);
    for (const auto& w : dirs) {
      const double margin = (dfp - finf * R.anisotropy().gradient(w)).norm();
      rep.min_margin_to_limit_image = std::min(rep.min_margin_to_limit_image, margin);
    }
    if ((p - q).norm() > 1e-9) {
      const double gap = (dfp - R.df(q)).dot(p - q) / (p - q).squaredNorm();
      rep.min_monotonicity_gap = std::min(rep.min_monotonicity_gap, gap);
    }
    ++rep.trials;
  }
  rep.ok = rep.min_margin_to_limit_image > 0.0 && rep.min_monotonicity_gap > 0.0;
  return rep;
}

}  // namespace rof1d
