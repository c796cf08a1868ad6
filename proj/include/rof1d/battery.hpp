#pragma once

#include "rof1d/config.hpp"
#include "rof1d/verify.hpp"

namespace rof1d {

struct BatteryInstance {
  int index = 0;
  std::uint64_t seed = 0;
  EstimateReport report;
  CertificateReport certificate;
  bool has_certificate = false;
  GridSignal datum;
  GridSignal minimizer;
};

struct BatteryResult {
  std::string check;
  SlackPolicy policy;
  std::vector<BatteryInstance> instances;
  double worst_violation = 0.0;
  int failures = 0;
  bool pass = true;
};

// Runs cfg.instances seeded instances of the configured theorem check at
// cfg.grid_cells, calibrating the slack constant from the observed violations
// (4x the median positive violation, divided by dx).
BatteryResult run_battery(const ExperimentConfig& cfg);

// Worst raw violation (no slack) of the battery re-run at `cells`.
double battery_worst_violation(ExperimentConfig cfg, int cells);

void apply_policy(EstimateReport& rep, const SlackPolicy& policy);

}  // namespace rof1d
