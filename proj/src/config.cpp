#include "rof1d/config.hpp"

#include <fstream>
#include <set>

namespace rof1d {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: expected object at " + where);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown field \"" + it.key() + "\" in " + where);
}

Vec to_vec(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError("config: expected array at " + where);
  Vec v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

DatumTemplate parse_datum(const json& j) {
  check_keys(j, {"kind", "pieces", "modes", "amplitude", "path", "atoms", "vmax"}, "datum");
  DatumTemplate t;
  t.kind = j.at("kind").get<std::string>();
  const std::set<std::string> kinds = {"piecewise_constant", "smooth_fourier", "mixed",
                                       "file",               "random_piecewise", "random_mixed"};
  if (!kinds.count(t.kind)) throw ConfigError("config: unknown datum kind \"" + t.kind + "\"");
  if (t.kind == "piecewise_constant" || t.kind == "mixed") {
    if (!j.contains("pieces") || !j.at("pieces").is_array())
      throw ConfigError("config: datum.pieces must be a list of {x, value}");
    for (const auto& p : j.at("pieces")) {
      check_keys(p, {"x", "value"}, "datum.pieces[]");
      PiecewisePiece piece;
      piece.x_break = p.at("x").get<double>();
      piece.value = to_vec(p.at("value"), "datum.pieces[].value");
      t.fixed.pieces.push_back(piece);
    }
  }
  if (t.kind == "random_piecewise" || t.kind == "random_mixed") {
    if (j.contains("pieces")) t.pieces = j.at("pieces").get<int>();
    if (j.contains("vmax")) t.vmax = j.at("vmax").get<double>();
  }
  if (t.kind == "smooth_fourier" || t.kind == "mixed" || t.kind == "random_mixed") {
    if (j.contains("modes")) t.modes = j.at("modes").get<int>();
    if (j.contains("amplitude")) t.amplitude = j.at("amplitude").get<double>();
  }
  if (t.kind == "file") {
    t.fixed.kind = DatumKind::file;
    t.fixed.path = j.at("path").get<std::string>();
    if (j.contains("atoms")) t.fixed.atoms_path = j.at("atoms").get<std::string>();
  }
  return t;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  check_keys(j,
             {"interval", "grid_cells", "channels", "lambda", "anisotropy", "profile", "datum",
              "windows", "seed", "solver", "check", "instances", "refine", "flow", "sweep"},
             "<root>");
  ExperimentConfig cfg;
  if (j.contains("interval")) {
    check_keys(j.at("interval"), {"a", "b"}, "interval");
    cfg.a = j.at("interval").at("a").get<double>();
    cfg.b = j.at("interval").at("b").get<double>();
    if (!(cfg.a < cfg.b)) throw ConfigError("config: interval needs a < b");
  }
  if (j.contains("grid_cells")) cfg.grid_cells = j.at("grid_cells").get<int>();
  if (cfg.grid_cells <= 0) throw ConfigError("config: grid_cells must be positive");
  if (j.contains("channels")) cfg.channels = j.at("channels").get<int>();
  if (cfg.channels <= 0) throw ConfigError("config: channels must be positive");
  if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
  if (!(cfg.lambda > 0)) throw ConfigError("config: lambda must be positive");

  if (j.contains("anisotropy")) {
    const auto& a = j.at("anisotropy");
    check_keys(a, {"kind", "weights", "p"}, "anisotropy");
    cfg.aniso_kind = a.at("kind").get<std::string>();
    const std::set<std::string> kinds = {"euclidean", "l1", "linf", "lp", "weighted_l2"};
    if (!kinds.count(cfg.aniso_kind))
      throw ConfigError("config: unknown anisotropy kind \"" + cfg.aniso_kind + "\"");
    if (cfg.aniso_kind == "weighted_l2") {
      if (!a.contains("weights")) throw ConfigError("config: weighted_l2 needs weights");
      for (const auto& w : a.at("weights")) cfg.weights.push_back(w.get<double>());
    }
    if (cfg.aniso_kind == "lp") {
      if (!a.contains("p")) throw ConfigError("config: lp needs p");
      cfg.lp_exponent = a.at("p").get<double>();
    }
  }
  if (j.contains("profile")) {
    const auto& p = j.at("profile");
    check_keys(p, {"kind", "a", "b", "c", "t", "f"}, "profile");
    cfg.profile_kind = p.at("kind").get<std::string>();
    const std::set<std::string> kinds = {"identity", "sqrt1p", "softplus_linear", "table"};
    if (!kinds.count(cfg.profile_kind))
      throw ConfigError("config: unknown profile kind \"" + cfg.profile_kind + "\"");
    if (cfg.profile_kind == "softplus_linear") {
      cfg.sp_a = p.at("a").get<double>();
      cfg.sp_b = p.at("b").get<double>();
      cfg.sp_c = p.at("c").get<double>();
    }
    if (cfg.profile_kind == "table") {
      for (const auto& v : p.at("t")) cfg.table_t.push_back(v.get<double>());
      for (const auto& v : p.at("f")) cfg.table_f.push_back(v.get<double>());
    }
  }
  if (j.contains("datum")) cfg.datum = parse_datum(j.at("datum"));
  if (j.contains("windows")) {
    const auto& w = j.at("windows");
    check_keys(w, {"dyadic_depth", "list"}, "windows");
    if (w.contains("list")) {
      cfg.windows_dyadic = false;
      for (const auto& pair : w.at("list"))
        cfg.window_list.push_back({pair[0].get<double>(), pair[1].get<double>()});
    } else if (w.contains("dyadic_depth")) {
      cfg.dyadic_depth = w.at("dyadic_depth").get<int>();
    }
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    check_keys(s, {"pd_tol_gap", "pd_max_iter", "newton_tol", "solver"}, "solver");
    if (s.contains("pd_tol_gap")) cfg.pd_tol_gap = s.at("pd_tol_gap").get<double>();
    if (s.contains("pd_max_iter")) cfg.pd_max_iter = s.at("pd_max_iter").get<long>();
    if (s.contains("newton_tol")) cfg.newton_tol = s.at("newton_tol").get<double>();
    if (s.contains("solver")) {
      cfg.solver_choice = s.at("solver").get<std::string>();
      if (cfg.solver_choice != "pd" && cfg.solver_choice != "continuation")
        throw ConfigError("config: solver must be \"pd\" or \"continuation\"");
    }
  }
  if (j.contains("check")) {
    cfg.check = j.at("check").get<std::string>();
    const std::set<std::string> checks = {"homogeneous", "singular_constant", "singular_regular"};
    if (!checks.count(cfg.check))
      throw ConfigError("config: unknown check \"" + cfg.check + "\"");
  }
  if (j.contains("instances")) cfg.instances = j.at("instances").get<int>();
  if (j.contains("refine"))
    for (const auto& n : j.at("refine")) cfg.refine.push_back(n.get<int>());
  if (j.contains("flow")) {
    const auto& f = j.at("flow");
    check_keys(f, {"steps", "tau", "record_every"}, "flow");
    if (f.contains("steps")) cfg.flow_steps = f.at("steps").get<int>();
    if (f.contains("tau")) cfg.flow_tau = f.at("tau").get<double>();
    if (f.contains("record_every")) cfg.flow_record_every = f.at("record_every").get<int>();
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, {"lambdas", "seeds"}, "sweep");
    if (s.contains("lambdas"))
      for (const auto& v : s.at("lambdas")) cfg.sweep_lambdas.push_back(v.get<double>());
    if (s.contains("seeds"))
      for (const auto& v : s.at("seeds")) cfg.sweep_seeds.push_back(v.get<std::uint64_t>());
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json resolved_config_json(const ExperimentConfig& cfg) {
  json j;
  j["interval"] = {{"a", cfg.a}, {"b", cfg.b}};
  j["grid_cells"] = cfg.grid_cells;
  j["channels"] = cfg.channels;
  j["lambda"] = cfg.lambda;
  json a;
  a["kind"] = cfg.aniso_kind;
  if (cfg.aniso_kind == "weighted_l2") a["weights"] = cfg.weights;
  if (cfg.aniso_kind == "lp") a["p"] = cfg.lp_exponent;
  j["anisotropy"] = a;
  json p;
  p["kind"] = cfg.profile_kind;
  if (cfg.profile_kind == "softplus_linear") {
    p["a"] = cfg.sp_a;
    p["b"] = cfg.sp_b;
    p["c"] = cfg.sp_c;
  }
  if (cfg.profile_kind == "table") {
    p["t"] = cfg.table_t;
    p["f"] = cfg.table_f;
  }
  j["profile"] = p;
  json d;
  d["kind"] = cfg.datum.kind;
  if (cfg.datum.kind == "piecewise_constant" || cfg.datum.kind == "mixed") {
    json pieces = json::array();
    for (const auto& piece : cfg.datum.fixed.pieces) {
      json pj;
      pj["x"] = piece.x_break;
      pj["value"] = std::vector<double>(piece.value.data(), piece.value.data() + piece.value.size());
      pieces.push_back(pj);
    }
    d["pieces"] = pieces;
  }
  if (cfg.datum.kind == "random_piecewise" || cfg.datum.kind == "random_mixed") {
    d["pieces"] = cfg.datum.pieces;
    d["vmax"] = cfg.datum.vmax;
  }
  if (cfg.datum.kind == "smooth_fourier" || cfg.datum.kind == "mixed" ||
      cfg.datum.kind == "random_mixed") {
    d["modes"] = cfg.datum.modes;
    d["amplitude"] = cfg.datum.amplitude;
  }
  if (cfg.datum.kind == "file") {
    d["path"] = cfg.datum.fixed.path;
    d["atoms"] = cfg.datum.fixed.atoms_path;
  }
  j["datum"] = d;
  if (cfg.windows_dyadic)
    j["windows"] = {{"dyadic_depth", cfg.dyadic_depth}};
  else {
    json list = json::array();
    for (const auto& w : cfg.window_list) list.push_back({w[0], w[1]});
    j["windows"] = {{"list", list}};
  }
  j["seed"] = cfg.seed;
  json s;
  s["solver"] = cfg.solver_choice;
  if (cfg.pd_tol_gap > 0) s["pd_tol_gap"] = cfg.pd_tol_gap;
  if (cfg.pd_max_iter > 0) s["pd_max_iter"] = cfg.pd_max_iter;
  if (cfg.newton_tol > 0) s["newton_tol"] = cfg.newton_tol;
  j["solver"] = s;
  if (!cfg.check.empty()) j["check"] = cfg.check;
  j["instances"] = cfg.instances;
  if (!cfg.refine.empty()) j["refine"] = cfg.refine;
  j["flow"] = {{"steps", cfg.flow_steps}, {"tau", cfg.flow_tau},
               {"record_every", cfg.flow_record_every}};
  return j;
}

Grid build_grid(const ExperimentConfig& cfg) { return Grid(cfg.a, cfg.b, cfg.grid_cells); }

Anisotropy build_anisotropy(const ExperimentConfig& cfg) {
  const int n = cfg.channels;
  if (cfg.aniso_kind == "euclidean") return Anisotropy::euclidean(n);
  if (cfg.aniso_kind == "l1") return Anisotropy::l1(n);
  if (cfg.aniso_kind == "linf") return Anisotropy::linf(n);
  if (cfg.aniso_kind == "lp") return Anisotropy::lp(n, cfg.lp_exponent);
  if (cfg.aniso_kind == "weighted_l2") {
    if (static_cast<int>(cfg.weights.size()) != n)
      throw ConfigError("config: weighted_l2 weights must match channels");
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = cfg.weights[i];
    return Anisotropy::weighted_l2(w);
  }
  throw ConfigError("config: unknown anisotropy kind");
}

Profile build_profile(const ExperimentConfig& cfg) {
  if (cfg.profile_kind == "identity") return Profile::identity();
  if (cfg.profile_kind == "sqrt1p") return Profile::sqrt1p();
  if (cfg.profile_kind == "softplus_linear")
    return Profile::softplus_linear(cfg.sp_a, cfg.sp_b, cfg.sp_c);
  if (cfg.profile_kind == "table") return Profile::table(cfg.table_t, cfg.table_f);
  throw ConfigError("config: unknown profile kind");
}

SolveConfig build_solve_config(const ExperimentConfig& cfg) {
  SolveConfig s;
  s.lambda = cfg.lambda;
  s.profile = build_profile(cfg);
  s.phi = build_anisotropy(cfg);
  if (cfg.pd_tol_gap > 0) s.pd.tol_gap = cfg.pd_tol_gap;
  if (cfg.pd_max_iter > 0) s.pd.max_iter = cfg.pd_max_iter;
  if (cfg.newton_tol > 0) s.newton.tol_residual = cfg.newton_tol;
  return s;
}

std::vector<MeasureWindow> build_windows(const ExperimentConfig& cfg, const Grid& g) {
  if (cfg.windows_dyadic) return dyadic_windows(g, cfg.dyadic_depth);
  std::vector<MeasureWindow> out;
  for (const auto& w : cfg.window_list) out.emplace_back(w[0], w[1]);
  return out;
}

DatumDescriptor realize_datum(const DatumTemplate& t, const Grid& g, int channels, Rng& rng) {
  if (t.kind == "random_piecewise") {
    Rng local = rng.split("datum");
    return random_piecewise(g, channels, t.pieces, t.vmax, local);
  }
  if (t.kind == "random_mixed") {
    Rng local = rng.split("datum");
    return random_mixed(g, channels, t.pieces, t.vmax, t.modes, t.amplitude, local);
  }
  DatumDescriptor d = t.fixed;
  if (t.kind == "piecewise_constant") d.kind = DatumKind::piecewise_constant;
  if (t.kind == "smooth_fourier") d.kind = DatumKind::smooth_fourier;
  if (t.kind == "mixed") d.kind = DatumKind::mixed;
  if (t.kind == "file") d.kind = DatumKind::file;
  d.modes = t.modes;
  d.amplitude = t.amplitude;
  d.fourier_seed = rng.split("fourier").next_u64();
  return d;
}

}  // namespace rof1d
