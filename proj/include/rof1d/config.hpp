#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rof1d/datum.hpp"
#include "rof1d/solver.hpp"

namespace rof1d {

// Datum template: either a fully specified descriptor or a seeded random
// family realized per instance.
struct DatumTemplate {
  std::string kind = "piecewise_constant";
  DatumDescriptor fixed;
  int pieces = 4;
  double vmax = 1.0;
  int modes = 4;
  double amplitude = 0.25;
};

struct ExperimentConfig {
  double a = 0.0, b = 1.0;
  int grid_cells = 1024;
  int channels = 1;
  double lambda = 0.1;

  std::string aniso_kind = "euclidean";
  double lp_exponent = 3.0;
  std::vector<double> weights;

  std::string profile_kind = "identity";
  double sp_a = 1.0, sp_b = 1.0, sp_c = 1.0;
  std::vector<double> table_t, table_f;

  DatumTemplate datum;

  bool windows_dyadic = true;
  int dyadic_depth = 4;
  std::vector<std::array<double, 2>> window_list;

  std::uint64_t seed = 1;

  // solver overrides
  double pd_tol_gap = -1.0;
  long pd_max_iter = -1;
  double newton_tol = -1.0;
  std::string solver_choice = "pd";  // "pd" | "continuation"

  // verify battery
  std::string check;
  int instances = 1;
  std::vector<int> refine;

  // flow
  int flow_steps = 32;
  double flow_tau = 1.0 / 32.0;
  int flow_record_every = 1;

  // sweep
  std::vector<double> sweep_lambdas;
  std::vector<std::uint64_t> sweep_seeds;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_file(const std::string& path);
nlohmann::json resolved_config_json(const ExperimentConfig& cfg);

Grid build_grid(const ExperimentConfig& cfg);
Anisotropy build_anisotropy(const ExperimentConfig& cfg);
Profile build_profile(const ExperimentConfig& cfg);
SolveConfig build_solve_config(const ExperimentConfig& cfg);
std::vector<MeasureWindow> build_windows(const ExperimentConfig& cfg, const Grid& g);
DatumDescriptor realize_datum(const DatumTemplate& t, const Grid& g, int channels, Rng& rng);

}  // namespace rof1d
