#pragma once

#include <string>
#include <vector>

#include "rof1d/types.hpp"

namespace rof1d {

enum class ProfileKind { identity, sqrt1p, softplus_linear, table };

struct ProfileEval {
  double value;
  double derivative;
  double recession;  // f_infinity
};

// Convex, nondecreasing, linear-growth profile f on [0,inf) with f(0) = 0
// (table profiles may have f(0) >= 0).
class Profile {
 public:
  Profile();  // identity
  static Profile identity();
  static Profile sqrt1p();
  // f(t) = a t + b log(1 + e^{-c t}) - b log 2; needs a >= b c / 2 for monotonicity
  static Profile softplus_linear(double a, double b, double c);
  // piecewise-linear convex nondecreasing samples; first knot must be t = 0
  static Profile table(std::vector<double> t, std::vector<double> f);

  ProfileKind kind() const { return kind_; }
  double value(double t) const;       // domain error for t < 0
  double derivative(double t) const;  // one-sided at 0 and at table knots
  double recession() const;           // f_infinity = lim f(t)/t
  ProfileEval eval(double t) const;

  // monotone conjugate sup_{t>=0} (s t - f(t)); +inf for s > recession()
  double conjugate(double s) const;

  bool strictly_convex() const;
  bool differentiable() const;
  bool zero_slope_at_zero() const;  // f'(0) = 0
  bool regular_case() const { return strictly_convex() && differentiable() && zero_slope_at_zero(); }

  double param_a() const { return a_; }
  double param_b() const { return b_; }
  double param_c() const { return c_; }
  const std::vector<double>& table_t() const { return tt_; }
  const std::vector<double>& table_f() const { return tf_; }

  std::string describe() const;

 private:
  ProfileKind kind_ = ProfileKind::identity;
  double a_ = 0, b_ = 0, c_ = 0;
  std::vector<double> tt_, tf_, slopes_;
};

// f_eta: the profile truncated to a plateau below eta and convolved with the
// standard bump of width eta/2. Evaluated by split-panel Gauss-Legendre so the
// plateau kink (and table knots) never cross a quadrature panel.
class MollifiedProfile {
 public:
  MollifiedProfile(Profile f, double eta);

  double value(double t) const;
  double derivative(double t) const;
  double recession() const { return f_.recession(); }
  double eta() const { return eta_; }
  const Profile& profile() const { return f_; }

 private:
  Profile f_;
  double eta_;
  double truncated(double tau) const;       // f(tau) above eta, f(eta) below
  double truncated_deriv(double tau) const; // 0 on the plateau
};

}  // namespace rof1d
