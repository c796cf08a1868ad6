#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rof1d/bvsignal.hpp"
#include "rof1d/regularizer.hpp"
#include "rof1d/types.hpp"

namespace rof1d {

struct NewtonOpts {
  double tol_residual = 1e-10;
  int max_iter = 50;
  double ls_factor = 0.5;
  double min_step = 1e-12;
};

struct PdOpts {
  long max_iter = 200000;
  double tol_gap = 1e-8;
  bool ssn_finish = true;  // semismooth-Newton finish for homogeneous kinds
};

struct SolveConfig {
  double lambda = 0.1;
  Profile profile;  // identity by default
  Anisotropy phi = Anisotropy::euclidean(1);
  RegVariant variant = RegVariant::eta_quad;
  std::vector<double> eta_schedule;  // empty -> default_eta_schedule()
  std::vector<double> eps_factors;   // in dx units; empty -> {8,4,2,0}
  NewtonOpts newton;
  PdOpts pd;

  static std::vector<double> default_eta_schedule();
  static std::vector<double> default_eps_factors();
};

struct StageDiag {
  double eta, eps;
  double energy;    // smoothed-stage energy E_{eps,eta}(u)
  double residual;  // sup-norm Euler-Lagrange residual
  int iters;
  double unif_lhs, unif_rhs;  // discrete |u_x|^2 + 2*lambda*eta*|u_xx|^2 vs |h^eps_x|^2
};

struct SolveDiagnostics {
  std::string solver;  // "continuation" | "pd"
  std::vector<StageDiag> stages;
  bool stage_contraction_ok = true;
  bool energy_monotone_ok = true;
  double mass_conservation_error = 0.0;
  double boundary_flux_norm = 0.0;  // |DF_eta(0)|, the adopted boundary-form check
  // pd path
  double pd_gap = 0.0;
  long pd_iters = 0;
  bool pd_converged = true;
  bool ssn_used = false;
  int ssn_iters = 0;
  double kkt_residual = 0.0;
  Mat dual;  // channels x cells flux g, phi^*(g_j) <= lambda (homogeneous path)
  bool has_dual = false;
};

struct SmoothedSolveResult {
  GridSignal u;
  double residual;
  int iters;
  double energy;
  double unif_lhs, unif_rhs;
};

// One Newton solve of the smoothed Euler-Lagrange system at fixed (eta, eps);
// h_eps must already be mollified. warm_start, when given, is a channels x
// nodes iterate.
SmoothedSolveResult solve_smoothed(const GridSignal& h_eps, const SolveConfig& cfg, double eta,
                                   const Mat* warm_start = nullptr);

std::pair<GridSignal, SolveDiagnostics> continuation_solve(const GridSignal& h,
                                                           const SolveConfig& cfg);

std::pair<GridSignal, SolveDiagnostics> solve_exact_discrete(const GridSignal& h,
                                                             const SolveConfig& cfg);

// Exact scalar euclidean TV denoiser (taut string over the mass cumulative).
GridSignal taut_string_solve(const GridSignal& h, double lambda);

double energy(const GridSignal& w, const GridSignal& h, const Regularizer& R, double lambda);

}  // namespace rof1d
