#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rof1d/types.hpp"

namespace rof1d {

enum class AnisoKind { euclidean, l1, linf, lp, weighted_l2, smoothed };
enum class SmoothStage { sphere_mollified, regularized };

struct NormEquivalence {
  double lower = 0.0;  // c-
  double upper = 0.0;  // c+
  bool sampled = false;
  int sample_size = 0;
};

// Convex, positively 1-homogeneous, coercive function on R^n together with
// its calculus: value, (sub)gradient, dual norm, norm-equivalence constants.
// Smoothed variants keep exact 1-homogeneity; their values come from
// deterministic quadrature of the sphere-mollification integral, specialized
// per base kind (scalar factor for euclidean, 1D marginal convolutions for
// l1, tensor Gauss-Legendre with kink-split angular panels otherwise).
class Anisotropy {
 public:
  static Anisotropy euclidean(int dim);
  static Anisotropy l1(int dim);
  static Anisotropy linf(int dim);
  static Anisotropy lp(int dim, double p);
  static Anisotropy weighted_l2(const Vec& weights);

  // phi-bar: value at p equals the shell-bump average of phi(p + |p| z).
  // quad_scale multiplies all quadrature node counts (self-check knob).
  static Anisotropy sphere_mollified(const Anisotropy& base, double eta, int quad_scale = 1);
  // phi-tilde = sqrt(phi-bar^2 + eta |p|^2), built on top of sphere_mollified.
  static Anisotropy regularized(const Anisotropy& base, double eta, int quad_scale = 1);

  AnisoKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double eta() const { return eta_; }
  SmoothStage stage() const { return stage_; }
  double lp_exponent() const { return p_; }
  const Vec& weights() const { return weights_; }
  const Anisotropy& base() const;

  double value(const VecRef& p) const;
  Vec gradient(const VecRef& p) const;  // domain error at p = 0
  double dual_value(const VecRef& q) const;
  NormEquivalence equivalence() const;

  bool smooth_away_from_origin() const;  // C^1 on R^n \ {0}
  std::string describe() const;

  // raw-pointer interface used by quadrature/solver hot loops (length dim)
  double value_raw(const double* p) const;
  void gradient_raw(const double* p, double* g) const;

  // Deterministic unit directions: uniform half-offset angles in 2D,
  // Fibonacci sphere in 3D, {+1,-1} in 1D.
  static std::vector<Vec> direction_table(int dim, int count);

 private:
  Anisotropy() = default;

  AnisoKind kind_ = AnisoKind::euclidean;
  int dim_ = 1;
  double p_ = 2.0;
  Vec weights_;
  std::shared_ptr<const Anisotropy> base_;
  double eta_ = 0.0;
  SmoothStage stage_ = SmoothStage::sphere_mollified;
  int quad_scale_ = 1;
  double euclid_factor_ = 1.0;  // k_eta when base is euclidean

  double mollified_value_raw(const double* p) const;
  void mollified_gradient_raw(const double* p, double* g) const;
  double tensor_unit_value(const double* w) const;
  void tensor_unit_gradient(const double* w, double* g) const;
};

// C^2 convex field equal to phi_tilde^2 outside the euclidean ball B_eta(0):
// psi(phi_tilde(p)) with a scalar convex C^2 profile psi that is constant
// near zero and equals t^2 for t >= t0 <= eta * c^-(phi_tilde).
class SplicedSquare {
 public:
  SplicedSquare(const Anisotropy& phi_tilde, double eta);

  double value(const VecRef& p) const;
  Vec gradient(const VecRef& p) const;
  double value_raw(const double* p) const;
  void gradient_raw(const double* p, double* g) const;

  double eta() const { return eta_; }
  double plateau_value() const { return c0_; }
  double splice_threshold() const { return t0_; }
  const Anisotropy& anisotropy() const { return phi_; }

 private:
  Anisotropy phi_;
  double eta_, t0_, t1_, c0_;
  double psi(double t) const;
  double dpsi(double t) const;
};

struct ReshetnyakReport {
  bool strict = false;
  bool witness_found = false;
  Vec witness_p, witness_q;
  double min_relative_gap = 0.0;  // min over samples of (phi(p)+phi(q)-phi(p+q))/(phi(p)+phi(q))
  int trials = 0;
};

// Samples pairs (p,q), p != 0, q not a non-negative multiple of p, and looks
// for additivity phi(p+q) = phi(p) + phi(q) within 1e-9 relative. A found
// witness disproves strict convexity in the sense of Reshetnyak; none found
// is a probabilistic certificate only.
ReshetnyakReport reshetnyak_probe(const Anisotropy& phi, int trials, std::uint64_t seed);

}  // namespace rof1d
