// Command line front end: solve / flow / verify / sweep / probe over a JSON
// experiment config. Exit codes: 0 ok, 1 config or solver error, 2 a theorem
// check failed above slack.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rof1d/battery.hpp"
#include "rof1d/config.hpp"
#include "rof1d/flow.hpp"
#include "rof1d/io.hpp"

using namespace rof1d;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  int jobs = 1;
  int grid_override = 0;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = parse_config_file(args.config_path);
  if (args.grid_override > 0) cfg.grid_cells = args.grid_override;
  if (args.has_seed_override) cfg.seed = args.seed_override;
  return cfg;
}

void dump_resolved(const ExperimentConfig& cfg, const std::string& dir) {
  std::ofstream out(dir + "/resolved_config.json");
  out << resolved_config_json(cfg).dump(2) << "\n";
}

json stage_diag_json(const SolveDiagnostics& diag) {
  json st = json::array();
  for (const auto& s : diag.stages) {
    st.push_back({{"eta", s.eta},
                  {"eps", s.eps},
                  {"energy", s.energy},
                  {"residual", s.residual},
                  {"iters", s.iters},
                  {"unif_bound", {{"lhs", s.unif_lhs}, {"rhs", s.unif_rhs}}}});
  }
  json j;
  j["stages"] = st;
  j["solver"] = diag.solver;
  if (diag.solver == "pd") {
    j["gap"] = diag.pd_gap;
    j["iters"] = diag.pd_iters;
    j["converged"] = diag.pd_converged;
    j["ssn_used"] = diag.ssn_used;
    j["ssn_iters"] = diag.ssn_iters;
    j["kkt_residual"] = diag.kkt_residual;
  } else {
    j["stage_contraction_ok"] = diag.stage_contraction_ok;
    j["energy_monotone_ok"] = diag.energy_monotone_ok;
    j["boundary_flux_norm"] = diag.boundary_flux_norm;
  }
  j["mass_conservation_error"] = diag.mass_conservation_error;
  return j;
}

int cmd_solve(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  ensure_directory(args.out_dir);
  dump_resolved(cfg, args.out_dir);
  const Grid grid = build_grid(cfg);
  Rng rng(cfg.seed);
  const DatumDescriptor desc = realize_datum(cfg.datum, grid, cfg.channels, rng);
  const GridSignal h = generate_datum(desc, grid, cfg.channels);
  write_signal_csv(args.out_dir + "/datum.csv", h);
  write_atoms_json(args.out_dir + "/atoms.json", h);

  const SolveConfig scfg = build_solve_config(cfg);
  GridSignal u;
  SolveDiagnostics diag;
  if (cfg.solver_choice == "continuation")
    std::tie(u, diag) = continuation_solve(h, scfg);
  else
    std::tie(u, diag) = solve_exact_discrete(h, scfg);
  write_signal_csv(args.out_dir + "/solution.csv", u);

  const Regularizer R(build_profile(cfg), build_anisotropy(cfg));
  json dj = stage_diag_json(diag);
  dj["energy"] = energy(u, h, R, cfg.lambda);
  std::ofstream(args.out_dir + "/diagnostics.json") << dj.dump(2) << "\n";
  return 0;
}

int cmd_flow(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  ensure_directory(args.out_dir);
  dump_resolved(cfg, args.out_dir);
  const Grid grid = build_grid(cfg);
  Rng rng(cfg.seed);
  const DatumDescriptor desc = realize_datum(cfg.datum, grid, cfg.channels, rng);
  const GridSignal v0 = generate_datum(desc, grid, cfg.channels);
  write_signal_csv(args.out_dir + "/datum.csv", v0);
  write_atoms_json(args.out_dir + "/atoms.json", v0);

  FlowConfig fcfg;
  fcfg.steps = cfg.flow_steps;
  fcfg.tau = cfg.flow_tau;
  fcfg.record_every = cfg.flow_record_every;
  fcfg.solver = build_solve_config(cfg);
  const FlowTrajectory traj = minimizing_movements(v0, fcfg);
  const auto windows = build_windows(cfg, grid);

  std::ofstream out(args.out_dir + "/trajectory.csv");
  out << "t,window_id,var,singular_mass\n";
  for (const auto& rec : traj.records) {
    const DerivativeMeasure mu = derivative(rec.v);
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
      out << format_double(rec.t) << "," << wi << ","
          << format_double(variation(mu, windows[wi])) << ","
          << format_double(sweep_singular_mass(mu, windows[wi])) << "\n";
    }
  }
  const auto rows = flow_monotonicity_report(traj, windows);
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.violation);
  json j;
  j["monotonicity_worst_violation"] = worst;
  j["homogeneous"] = traj.homogeneous;
  double min_dissipation = 1e300;
  for (double d : traj.dissipation_gap) min_dissipation = std::min(min_dissipation, d);
  j["min_dissipation_gap"] = min_dissipation;
  std::ofstream(args.out_dir + "/diagnostics.json") << j.dump(2) << "\n";

  const double slack = std::max(1e-8, 0.1 * grid.dx());
  if (traj.homogeneous && worst > slack) {
    std::cerr << "flow: variation monotonicity violated above slack: " << worst << "\n";
    return 2;
  }
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  if (cfg.check.empty()) throw ConfigError("verify: config must set \"check\"");
  ensure_directory(args.out_dir);
  dump_resolved(cfg, args.out_dir);

  BatteryResult battery = run_battery(cfg);
  std::vector<ReportRow> all_rows;
  for (const auto& inst : battery.instances)
    for (const auto& r : inst.report.rows) {
      ReportRow row = r;
      row.label = "i" + std::to_string(inst.index) + ":" + row.label;
      all_rows.push_back(row);
    }
  write_report_csv(args.out_dir + "/report.csv", battery.check, all_rows);

  json j;
  j["check"] = battery.check;
  j["instances"] = static_cast<int>(battery.instances.size());
  j["slack_constant"] = battery.policy.c_s;
  j["slack_floor"] = battery.policy.floor;
  j["failures"] = battery.failures;
  j["worst_violation"] = battery.worst_violation;
  j["pass"] = battery.pass;
  if (!cfg.refine.empty()) {
    RefinementStudy st = refinement_study(
        [&](int N) { return battery_worst_violation(cfg, N); }, cfg.refine);
    json rows = json::array();
    for (const auto& r : st.rows)
      rows.push_back({{"cells", r.cells},
                      {"worst_violation", r.worst_violation},
                      {"pass", r.pass}});
    j["refinement"] = rows;
    j["refinement_pass"] = st.pass;
    if (!st.pass) battery.pass = false;
  }
  std::ofstream(args.out_dir + "/summary.json") << j.dump(2) << "\n";
  std::cout << "verify " << battery.check << ": "
            << (battery.pass ? "pass" : "FAIL") << ", worst violation "
            << battery.worst_violation << "\n";
  return battery.pass ? 0 : 2;
}

int cmd_sweep(const CommonArgs& args) {
  ExperimentConfig base = load_config(args);
  ensure_directory(args.out_dir);
  std::vector<double> lambdas = base.sweep_lambdas.empty()
                                    ? std::vector<double>{base.lambda}
                                    : base.sweep_lambdas;
  std::vector<std::uint64_t> seeds =
      base.sweep_seeds.empty() ? std::vector<std::uint64_t>{base.seed} : base.sweep_seeds;

  struct Task {
    double lambda;
    std::uint64_t seed;
    std::string dir;
  };
  std::vector<Task> tasks;
  for (double l : lambdas)
    for (auto s : seeds)
      tasks.push_back({l, s,
                       args.out_dir + "/lambda_" + format_double(l) + "_seed_" +
                           std::to_string(s)});

  std::mutex fail_mu;
  int failures = 0;
  std::size_t next = 0;
  std::mutex next_mu;
  auto worker = [&]() {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(next_mu);
        if (next >= tasks.size()) return;
        idx = next++;
      }
      const Task& t = tasks[idx];
      try {
        ExperimentConfig cfg = base;
        cfg.lambda = t.lambda;
        cfg.seed = t.seed;
        ensure_directory(t.dir);
        dump_resolved(cfg, t.dir);
        const Grid grid = build_grid(cfg);
        Rng rng(cfg.seed);
        const DatumDescriptor desc = realize_datum(cfg.datum, grid, cfg.channels, rng);
        const GridSignal h = generate_datum(desc, grid, cfg.channels);
        write_signal_csv(t.dir + "/datum.csv", h);
        write_atoms_json(t.dir + "/atoms.json", h);
        SolveConfig scfg = build_solve_config(cfg);
        scfg.lambda = t.lambda;
        auto [u, diag] = solve_exact_discrete(h, scfg);
        write_signal_csv(t.dir + "/solution.csv", u);
        std::ofstream(t.dir + "/diagnostics.json") << stage_diag_json(diag).dump(2) << "\n";
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fail_mu);
        ++failures;
        std::cerr << "sweep task failed (" << t.dir << "): " << e.what() << "\n";
      }
    }
  };
  const int jobs = std::max(1, args.jobs);
  std::vector<std::thread> pool;
  for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return failures == 0 ? 0 : 1;
}

int cmd_probe(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  ensure_directory(args.out_dir);
  dump_resolved(cfg, args.out_dir);
  const Anisotropy phi = build_anisotropy(cfg);
  const Profile f = build_profile(cfg);
  json j;
  bool ok = true;

  const auto eq = phi.equivalence();
  j["equivalence"] = {{"lower", eq.lower}, {"upper", eq.upper}, {"sampled", eq.sampled}};
  ok = ok && eq.lower > 0;

  const auto resh = reshetnyak_probe(phi, 4000, cfg.seed);
  j["reshetnyak"] = {{"strict", resh.strict},
                     {"witness_found", resh.witness_found},
                     {"min_relative_gap", resh.min_relative_gap}};

  // smoothing audit: gap to the base anisotropy decays under eta halving
  json decay = json::array();
  double prev_gap = -1.0;
  bool monotone = true;
  const auto dirs = Anisotropy::direction_table(cfg.channels, cfg.channels == 1 ? 2 : 256);
  for (double eta : {0.2, 0.1, 0.05, 0.025}) {
    const Anisotropy reg = Anisotropy::regularized(phi, eta);
    double gap = 0.0;
    bool dominates = true;
    for (const auto& w : dirs) {
      const double r = reg.value(w), b = phi.value(w);
      gap = std::max(gap, std::abs(r - b));
      dominates = dominates && r >= b - 1e-9;
    }
    if (prev_gap >= 0 && gap > prev_gap + 1e-9) monotone = false;
    ok = ok && dominates;
    prev_gap = gap;
    decay.push_back({{"eta", eta}, {"sup_gap", gap}, {"dominates", dominates}});
  }
  j["regularized_decay"] = decay;
  j["regularized_decay_monotone"] = monotone;
  ok = ok && monotone;

  const Regularizer R(f, phi);
  if (R.regular_case()) {
    const auto inj = df_injectivity_probe(R, 2000, cfg.seed);
    j["df_injectivity"] = {{"ok", inj.ok},
                           {"min_margin", inj.min_margin_to_limit_image},
                           {"min_monotonicity_gap", inj.min_monotonicity_gap}};
    ok = ok && inj.ok;
  }

  j["pass"] = ok;
  std::ofstream(args.out_dir + "/probes.json") << j.dump(2) << "\n";
  std::cout << "probe: " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D vector-valued anisotropic ROF solver and estimate harness"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "experiment config JSON")->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--jobs", args.jobs, "parallel jobs (sweep)");
    sub->add_option("--grid-override", args.grid_override, "override grid_cells");
    sub->add_option("--seed", args.seed_override, "override seed")
        ->each([&](const std::string&) { args.has_seed_override = true; });
  };

  CLI::App* solve = app.add_subcommand("solve", "minimize the denoising functional");
  CLI::App* flow = app.add_subcommand("flow", "minimizing-movements trajectory");
  CLI::App* verify = app.add_subcommand("verify", "run a theorem-check battery");
  CLI::App* sweep = app.add_subcommand("sweep", "parallel parameter sweep");
  CLI::App* probe = app.add_subcommand("probe", "construction and hypothesis audits");
  for (auto* sub : {solve, flow, verify, sweep, probe}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(args);
    if (flow->parsed()) return cmd_flow(args);
    if (verify->parsed()) return cmd_verify(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (probe->parsed()) return cmd_probe(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
