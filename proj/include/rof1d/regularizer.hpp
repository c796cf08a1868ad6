#pragma once

#include <memory>
#include <optional>

#include "rof1d/anisotropy.hpp"
#include "rof1d/profile.hpp"
#include "rof1d/types.hpp"

namespace rof1d {

enum class RegVariant { exact, eta_quad, eta_spliced };

// F = f(phi(.)) together with the two smoothed families used by the
// continuation solver:
//   eta_quad:    f_eta(phi_bar_eta(p)) + (eta/2) |p|^2
//   eta_spliced: f_eta(phi_tilde_eta(p)) + (eta/2) spliced_square(p)
class Regularizer {
 public:
  Regularizer(Profile f, Anisotropy phi);  // exact
  static Regularizer smoothed_quad(Profile f, Anisotropy phi, double eta);
  static Regularizer smoothed_spliced(Profile f, Anisotropy phi, double eta);

  RegVariant variant() const { return variant_; }
  double eta() const { return eta_; }
  int dim() const { return phi_.dim(); }
  const Profile& profile() const { return f_; }
  const Anisotropy& anisotropy() const { return phi_; }
  const Anisotropy& smoothed_anisotropy() const;  // phi_bar or phi_tilde
  bool regular_case() const;
  bool homogeneous() const;  // exact variant with identity profile

  double value(const VecRef& p) const;
  double value_raw(const double* p) const;

  // gradient; "nonsmooth point" error on kinks of non-regular exact variants
  Vec df(const VecRef& p) const;
  void df_raw(const double* p, double* g) const;

  // Hessian-vector product by centered differences of df (eta variants only).
  // step < 0 uses the contract default 1e-5 (1+|p|).
  Vec d2f_apply(const VecRef& p, const VecRef& v, double step = -1.0) const;

  // recession function F_inf(p) = f_inf * phi-or-smoothed-phi(p); for eta
  // variants the eta-quadratic tail has infinite recession and is excluded,
  // flagged by recession_warning().
  double recession_value(const VecRef& p) const;
  double recession_value_raw(const double* p) const;
  bool recession_warning() const { return variant_ != RegVariant::exact; }

  // linear growth constants: C- |p| + B- <= F(p) <= C+ |p| + B+ (exact variant)
  struct GrowthBounds { double c_minus, b_minus, c_plus, b_plus; };
  GrowthBounds growth_bounds() const;

 private:
  Profile f_;
  Anisotropy phi_;
  RegVariant variant_ = RegVariant::exact;
  double eta_ = 0.0;
  std::shared_ptr<MollifiedProfile> f_eta_;
  std::shared_ptr<Anisotropy> phi_smooth_;  // phi_bar (quad) or phi_tilde (spliced)
  std::shared_ptr<SplicedSquare> spliced_;

  bool at_kink(const double* p) const;
};

struct InjectivityReport {
  bool ok = false;
  double min_margin_to_limit_image = 0.0;  // min |DF(p) - f_inf Dphi(w)|
  double min_monotonicity_gap = 0.0;       // min (DF(p)-DF(q)).(p-q) / |p-q|^2
  int trials = 0;
};

// Samples the homeomorphism property of DF-bar for regular-case exact
// regularizers: DF(p) stays away from the recession image f_inf Dphi(S^{n-1})
// and DF is strictly monotone on sampled pairs.
InjectivityReport df_injectivity_probe(const Regularizer& R, int trials, std::uint64_t seed);

}  // namespace rof1d
