#include "rof1d/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rof1d/quadrature.hpp"

namespace rof1d {

Profile::Profile() : kind_(ProfileKind::identity) {}

Profile Profile::identity() { return Profile(); }

Profile Profile::sqrt1p() {
  Profile p;
  p.kind_ = ProfileKind::sqrt1p;
  return p;
}

Profile Profile::softplus_linear(double a, double b, double c) {
  if (!(a > 0 && b > 0 && c > 0))
    throw std::invalid_argument("softplus_linear: a, b, c must be positive");
  if (a < 0.5 * b * c - 1e-12)
    throw std::invalid_argument("softplus_linear: need a >= b c / 2 (nondecreasing on [0,inf))");
  Profile p;
  p.kind_ = ProfileKind::softplus_linear;
  p.a_ = a;
  p.b_ = b;
  p.c_ = c;
  return p;
}

Profile Profile::table(std::vector<double> t, std::vector<double> f) {
  if (t.size() != f.size() || t.size() < 2)
    throw std::invalid_argument("table profile: need >= 2 samples");
  if (t.front() != 0.0) throw std::invalid_argument("table profile: first knot must be t = 0");
  if (f.front() < 0.0) throw std::invalid_argument("table profile: f(0) >= 0 required");
  Profile p;
  p.kind_ = ProfileKind::table;
  p.tt_ = std::move(t);
  p.tf_ = std::move(f);
  p.slopes_.resize(p.tt_.size() - 1);
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < p.tt_.size(); ++i) {
    const double dt = p.tt_[i + 1] - p.tt_[i];
    if (dt <= 0) throw std::invalid_argument("table profile: knots must increase");
    p.slopes_[i] = (p.tf_[i + 1] - p.tf_[i]) / dt;
    if (p.slopes_[i] < -1e-15) throw std::invalid_argument("table profile: must be nondecreasing");
    if (p.slopes_[i] < prev - 1e-12 * (1.0 + std::abs(prev)))
      throw std::invalid_argument("table profile: slopes must be nondecreasing (convexity)");
    prev = p.slopes_[i];
  }
  return p;
}

double Profile::value(double t) const {
  if (t < 0.0) throw std::domain_error("profile value: t < 0");
  switch (kind_) {
    case ProfileKind::identity:
      return t;
    case ProfileKind::sqrt1p:
      return std::sqrt(1.0 + t * t) - 1.0;
    case ProfileKind::softplus_linear:
      return a_ * t + b_ * std::log1p(std::exp(-c_ * t)) - b_ * std::log(2.0);
    case ProfileKind::table: {
      auto it = std::upper_bound(tt_.begin(), tt_.end(), t);
      std::size_t i = (it == tt_.begin()) ? 0 : (it - tt_.begin() - 1);
      if (i >= slopes_.size()) i = slopes_.size() - 1;
      return tf_[i] + slopes_[i] * (t - tt_[i]);
    }
  }
  return 0.0;
}

double Profile::derivative(double t) const {
  if (t < 0.0) throw std::domain_error("profile derivative: t < 0");
  switch (kind_) {
    case ProfileKind::identity:
      return 1.0;
    case ProfileKind::sqrt1p:
      return t / std::sqrt(1.0 + t * t);
    case ProfileKind::softplus_linear:
      return a_ - b_ * c_ / (1.0 + std::exp(c_ * t));
    case ProfileKind::table: {
      auto it = std::upper_bound(tt_.begin(), tt_.end(), t);
      std::size_t i = (it == tt_.begin()) ? 0 : (it - tt_.begin() - 1);
      if (i >= slopes_.size()) i = slopes_.size() - 1;
      return slopes_[i];
    }
  }
  return 0.0;
}

double Profile::recession() const {
  switch (kind_) {
    case ProfileKind::identity:
    case ProfileKind::sqrt1p:
      return 1.0;
    case ProfileKind::softplus_linear:
      return a_;
    case ProfileKind::table:
      return slopes_.back();
  }
  return 0.0;
}

ProfileEval Profile::eval(double t) const { return {value(t), derivative(t), recession()}; }

double Profile::conjugate(double s) const {
  const double finf = recession();
  if (s <= 0.0) return 0.0;
  if (s > finf) return std::numeric_limits<double>::infinity();
  switch (kind_) {
    case ProfileKind::identity:
      return 0.0;  // s in [0,1]
    case ProfileKind::sqrt1p:
      return 1.0 - std::sqrt(std::max(0.0, 1.0 - s * s));
    case ProfileKind::softplus_linear: {
      const double s0 = a_ - 0.5 * b_ * c_;  // f'(0)
      if (s <= s0) return 0.0;
      if (s >= a_) return b_ * std::log(2.0);
      const double t = std::log(b_ * c_ / (a_ - s) - 1.0) / c_;
      return s * t - value(t);
    }
    case ProfileKind::table: {
      double best = 0.0;
      for (std::size_t i = 0; i < tt_.size(); ++i) best = std::max(best, s * tt_[i] - tf_[i]);
      return best;
    }
  }
  return 0.0;
}

bool Profile::strictly_convex() const {
  return kind_ == ProfileKind::sqrt1p || kind_ == ProfileKind::softplus_linear;
}

bool Profile::differentiable() const { return kind_ != ProfileKind::table; }

bool Profile::zero_slope_at_zero() const {
  return std::abs(derivative(0.0)) <= 1e-14;
}

std::string Profile::describe() const {
  switch (kind_) {
    case ProfileKind::identity: return "identity";
    case ProfileKind::sqrt1p: return "sqrt1p";
    case ProfileKind::softplus_linear:
      return "softplus_linear(a=" + std::to_string(a_) + ",b=" + std::to_string(b_) +
             ",c=" + std::to_string(c_) + ")";
    case ProfileKind::table: return "table[" + std::to_string(tt_.size()) + "]";
  }
  return "?";
}

// ---- mollified profile ----------------------------------------------------

MollifiedProfile::MollifiedProfile(Profile f, double eta) : f_(std::move(f)), eta_(eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("MollifiedProfile: eta > 0");
}

double MollifiedProfile::truncated(double tau) const {
  return tau > eta_ ? f_.value(tau) : f_.value(eta_);
}

double MollifiedProfile::truncated_deriv(double tau) const {
  return tau > eta_ ? f_.derivative(tau) : 0.0;
}

namespace {

// integration of g(t - (eta/2) s) * bump(s) over s in [-1,1] with panel cuts
template <class G>
double convolve(double t, double eta, const std::vector<double>& feature_taus, G&& g) {
  std::vector<double> cuts;
  cuts.push_back(-1.0);
  for (double tau : feature_taus) {
    const double s = 2.0 * (t - tau) / eta;
    if (s > -1.0 && s < 1.0) cuts.push_back(s);
  }
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  const GaussLegendre& rule = gl_rule(32);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    acc += gl_integrate(rule, cuts[i], cuts[i + 1],
                        [&](double s) { return g(t - 0.5 * eta * s) * bump1d(s); });
  }
  return acc;
}

}  // namespace

double MollifiedProfile::value(double t) const {
  if (t < 0.0) throw std::domain_error("mollified profile: t < 0");
  if (t <= 0.5 * eta_) return f_.value(eta_);  // full window inside the plateau
  std::vector<double> feats = {eta_};
  if (f_.kind() == ProfileKind::table)
    for (double k : f_.table_t())
      if (k > eta_) feats.push_back(k);
  return convolve(t, eta_, feats, [&](double tau) { return truncated(tau); });
}

double MollifiedProfile::derivative(double t) const {
  if (t < 0.0) throw std::domain_error("mollified profile: t < 0");
  if (t <= 0.5 * eta_) return 0.0;
  std::vector<double> feats = {eta_};
  if (f_.kind() == ProfileKind::table)
    for (double k : f_.table_t())
      if (k > eta_) feats.push_back(k);
  return convolve(t, eta_, feats, [&](double tau) { return truncated_deriv(tau); });
}

}  // namespace rof1d
