#include "rof1d/battery.hpp"

namespace rof1d {

void apply_policy(EstimateReport& rep, const SlackPolicy& policy) {
  rep.slack_constant = policy.c_s;
  const double slack = policy.slack(rep.dx);
  for (auto& r : rep.rows) r.slack = slack;
  rep.finish();
}

namespace {

EstimateReport run_check(const ExperimentConfig& cfg, const GridSignal& h, const GridSignal& u,
                         const std::vector<MeasureWindow>& windows, const SlackPolicy& policy,
                         std::uint64_t seed) {
  const Anisotropy phi = build_anisotropy(cfg);
  if (cfg.check == "homogeneous") {
    if (cfg.profile_kind != "identity")
      throw ConfigError("homogeneous check requires the identity profile");
    return check_homogeneous(h, u, windows, policy);
  }
  if (cfg.check == "singular_constant") {
    return check_singular_constant(h, u, windows, phi.equivalence(), policy);
  }
  if (cfg.check == "singular_regular") {
    const Regularizer R(build_profile(cfg), phi);
    verify_regular_hypotheses(R, seed);
    return check_singular_regular(h, u, windows, policy);
  }
  throw ConfigError("config: no check selected");
}

}  // namespace

BatteryResult run_battery(const ExperimentConfig& cfg) {
  BatteryResult out;
  out.check = cfg.check;
  const Grid grid = build_grid(cfg);
  const auto windows = build_windows(cfg, grid);
  const SolveConfig scfg = build_solve_config(cfg);
  const Rng root(cfg.seed);
  const SlackPolicy zero_policy{1e-8, 0.0};

  std::vector<double> violations;
  for (int i = 0; i < cfg.instances; ++i) {
    BatteryInstance inst;
    inst.index = i;
    Rng irng = root.split("instance", static_cast<std::uint64_t>(i));
    inst.seed = irng.next_u64();
    Rng drng(inst.seed);
    const DatumDescriptor desc = realize_datum(cfg.datum, grid, cfg.channels, drng);
    inst.datum = generate_datum(desc, grid, cfg.channels);

    if (cfg.solver_choice == "continuation") {
      auto [u, diag] = continuation_solve(inst.datum, scfg);
      (void)diag;
      inst.minimizer = u;
    } else {
      auto [u, diag] = solve_exact_discrete(inst.datum, scfg);
      (void)diag;
      inst.minimizer = u;
    }

    inst.report = run_check(cfg, inst.datum, inst.minimizer, windows, zero_policy, inst.seed);
    for (const auto& r : inst.report.rows) violations.push_back(std::max(r.lhs - r.rhs, 0.0));

    if (cfg.check == "homogeneous") {
      const Regularizer R(build_profile(cfg), build_anisotropy(cfg));
      inst.certificate = limit_el_certificate(inst.datum, inst.minimizer, R, cfg.lambda);
      inst.has_certificate = true;
    }
    out.instances.push_back(std::move(inst));
  }

  out.policy = SlackPolicy{1e-8, calibrate_slack_constant(violations, grid.dx())};
  for (auto& inst : out.instances) {
    apply_policy(inst.report, out.policy);
    out.failures += inst.report.failures;
    out.worst_violation = std::max(out.worst_violation, inst.report.worst_violation);
  }
  out.pass = out.failures == 0;
  return out;
}

double battery_worst_violation(ExperimentConfig cfg, int cells) {
  cfg.grid_cells = cells;
  BatteryResult r = run_battery(cfg);
  return r.worst_violation;
}

}  // namespace rof1d
