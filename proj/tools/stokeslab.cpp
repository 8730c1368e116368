// stokeslab command-line front end.
//
//   stokeslab mesh         --n 4 --layout pipe --out dir
//   stokeslab solve        --problem s1 --case ms1 --n 4 --vtk out/
//   stokeslab convergence  --problem s1 --case ms2 --n 4 --levels 4
//   stokeslab verify-s1    --case ms1 --n 8 --eps 1e-3,1e-2,1e-1
//   stokeslab verify-s2    --case ms1 --n 8 --eps 0,1e-2 --perturb traction
//   stokeslab constants    --n 2 --levels 3
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "stokeslab.hpp"

namespace fs = std::filesystem;
using namespace stokeslab;

namespace {

struct RunConfig {
  std::string command;
  std::string case_name = "ms1";
  std::string problem = "s1";
  int n = 8;
  int levels = 1;
  std::vector<double> eps{0.0, 1e-3, 1e-2, 1e-1};
  std::string layout;  // empty: the case's own layout
  std::string out = ".";
  std::string vtk;
  std::string perturb = "both";
  int refine = 0;
};

// Acceptance-style thresholds reported in the summary JSON.
constexpr double kZeroMismatchTol = 1e-7;
constexpr double kFitTol = 0.01;
constexpr double kSpreadTol = 2.0;
constexpr double kMeshStabilityTol = 2.0;
constexpr double kConstantFloor = 0.05;
constexpr double kConstantDrift = 0.10;

void validate(const RunConfig& c) {
  if (c.n < 1) throw ConfigError("--n must be >= 1");
  if (c.levels < 1) throw ConfigError("--levels must be >= 1");
  if (c.refine < 0) throw ConfigError("--refine must be >= 0");
  for (double e : c.eps)
    if (!std::isfinite(e) || e < 0.0) throw ConfigError("--eps values must be finite and non-negative");
  if (c.eps.empty()) throw ConfigError("--eps needs at least one value");
  parse_problem(c.problem);
  parse_perturbation(c.perturb);
  manufactured(c.case_name);
  if (!c.layout.empty()) BcLayout::parse(c.layout).validate();
}

ManufacturedCase selected_case(const RunConfig& c) {
  ManufacturedCase mc = manufactured(c.case_name);
  if (!c.layout.empty()) mc.layout = BcLayout::parse(c.layout);
  mc.layout.validate();
  return mc;
}

fs::path out_dir(const RunConfig& c) { return fs::path(c.out); }

int run_mesh(const RunConfig& c) {
  const BcLayout layout = c.layout.empty() ? BcLayout::pipe() : BcLayout::parse(c.layout);
  Mesh m = generate_unit_square(c.n, layout);
  for (int r = 0; r < c.refine; ++r) m = refine_uniform(m);
  const fs::path dir = out_dir(c);
  write_atomic_with(dir / "mesh.txt", [&](std::ostream& os) { write_mesh(os, m); });
  write_atomic_with(dir / "mesh.vtk", [&](std::ostream& os) { write_vtk(os, m, {}); });
  std::cout << "mesh: " << m.num_vertices() << " vertices, " << m.num_cells() << " cells, "
            << m.boundary_edges().size() << " boundary edges -> " << (dir / "mesh.txt").string() << "\n";
  return 0;
}

int run_solve(const RunConfig& c) {
  const ManufacturedCase mc = selected_case(c);
  const Problem p = parse_problem(c.problem);
  const TaylorHood th = taylor_hood_for(mc, c.n);
  const FieldSolution s = solve(p, th, mc.data());
  const SolutionErrors e = solution_errors(s, mc);

  Json j;
  j["command"] = "solve";
  j["case"] = mc.name;
  j["problem"] = to_string(p);
  j["n"] = c.n;
  j["h"] = th.mesh->mesh_size();
  j["velocity_dofs"] = th.velocity->num_dofs();
  j["pressure_dofs"] = th.pressure->num_dofs();
  j["errors"] = {{"u_l2", json_number(e.velocity.l2)},
                 {"u_h1", json_number(e.velocity.h1())},
                 {"p_l2", json_number(e.pressure.l2)},
                 {"p_h1", json_number(e.pressure.h1())}};
  j["diagnostics"] = to_json(s.diagnostics);

  const fs::path dir = c.vtk.empty() ? out_dir(c) : (c.out == "." ? fs::path(c.vtk) : out_dir(c));
  if (!c.vtk.empty()) {
    const fs::path vtk = fs::path(c.vtk) / ("solution_" + mc.name + "_" + to_string(p) + ".vtk");
    write_atomic_with(vtk, [&](std::ostream& os) { write_vtk(os, *th.mesh, sample_solution(s), "stokeslab " + to_string(p)); });
    j["vtk"] = vtk.filename().string();
  }
  const fs::path json = dir / ("solve_" + mc.name + "_" + to_string(p) + ".json");
  write_file_atomic(json, dump_json(j));
  std::cout << to_string(p) << " " << mc.name << " n=" << c.n << ": |u-u*|_H1=" << e.velocity.h1()
            << " |p-p*|_L2=" << e.pressure.l2 << " -> " << json.string() << "\n";
  return 0;
}

int run_convergence_cmd(const RunConfig& c) {
  const ManufacturedCase mc = selected_case(c);
  const Problem p = parse_problem(c.problem);
  const ConvergenceTable t = run_convergence(mc, p, c.levels, c.n);
  const std::string stem = "convergence_" + mc.name + "_" + to_string(p);
  write_atomic_with(out_dir(c) / (stem + ".csv"), [&](std::ostream& os) { write_convergence_csv(os, t); });
  write_file_atomic(out_dir(c) / (stem + ".json"), dump_json(to_json(t)));
  for (const auto& r : t.rows)
    std::cout << "n=" << r.n << " u_h1=" << r.u_h1 << " p_l2=" << r.p_l2 << " rate_u=" << r.rate_u_h1
              << " rate_p=" << r.rate_p_l2 << "\n";
  return 0;
}

int run_verify(const RunConfig& c, Problem which) {
  const ManufacturedCase mc = selected_case(c);
  const Perturbation mode = parse_perturbation(c.perturb);
  EstimateReport all{mc.name, which, {}};
  Json levels = Json::array();
  std::optional<double> prev_ratio;
  double worst_change = 1.0;
  bool fit_ok = true, spread_ok = true, zero_ok = true, decoupled_ok = true;
  bool have_zero = false, have_positive = false;

  for (int l = 0; l < c.levels; ++l) {
    const int n = c.n << l;
    const EstimateReport r = which == Problem::s1 ? verify_estimate_s1(mc, c.eps, n)
                                                  : verify_estimate_s2(mc, c.eps, n, mode);
    const EstimateSummary s = summarize(r);
    all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
    Json lj = Json{{"n", n}};
    lj.update(to_json(s));
    levels.push_back(lj);
    if (!std::isnan(s.zero_mismatch_lhs)) {
      have_zero = true;
      zero_ok = zero_ok && s.zero_mismatch_lhs <= kZeroMismatchTol;
    }
    if (!std::isnan(s.ratio_max)) {
      have_positive = true;
      fit_ok = fit_ok && s.lhs_fit.relative_residual <= kFitTol;
      spread_ok = spread_ok && s.ratio_spread <= kSpreadTol;
      decoupled_ok = decoupled_ok && s.lhs_p_max <= kZeroMismatchTol;
      if (prev_ratio && *prev_ratio > 0.0 && s.ratio_max > 0.0)
        worst_change = std::max(worst_change, std::max(s.ratio_max / *prev_ratio, *prev_ratio / s.ratio_max));
      prev_ratio = s.ratio_max;
    }
  }

  Json checks = Json::object();
  if (have_zero) checks["zero_mismatch"] = zero_ok;
  if (have_positive) {
    checks["linear_fit"] = fit_ok;
    checks["ratio_spread"] = spread_ok;
    if (c.levels >= 2) checks["mesh_stability"] = worst_change <= kMeshStabilityTol;
    if (which == Problem::s2 && mode == Perturbation::traction) checks["pressure_decoupled"] = decoupled_ok;
  }

  const std::string stem = std::string(which == Problem::s1 ? "verify_s1_" : "verify_s2_") + mc.name;
  Json j;
  j["command"] = which == Problem::s1 ? "verify-s1" : "verify-s2";
  j["case"] = mc.name;
  if (which == Problem::s2) j["perturb"] = c.perturb;
  j["eps"] = c.eps;
  j["levels"] = levels;
  if (c.levels >= 2) j["ratio_change"] = json_number(worst_change);
  j["checks"] = checks;
  write_atomic_with(out_dir(c) / (stem + ".csv"), [&](std::ostream& os) { write_estimate_csv(os, all); });
  write_file_atomic(out_dir(c) / (stem + ".json"), dump_json(j));

  for (const auto& r : all.rows)
    std::cout << "n=" << r.n << " eps=" << r.eps << " lhs=" << r.lhs() << " rhs=" << r.rhs() << " ratio=" << r.ratio
              << "\n";
  return 0;
}

int run_constants(const RunConfig& c) {
  const BcLayout layout = c.layout.empty() ? BcLayout::pipe() : BcLayout::parse(c.layout);
  layout.validate();
  Json rows = Json::array();
  std::vector<DiscreteConstants> all;
  for (int l = 0; l < c.levels; ++l) {
    const int n = c.n << l;
    auto mesh = std::make_shared<const Mesh>(generate_unit_square(n, layout));
    const DiscreteConstants k = discrete_constants(mesh);
    all.push_back(k);
    Json r = Json{{"n", n}};
    r.update(to_json(k));
    r["c_poincare_full"] = json_number(poincare_constant(mesh, {Marker::gamma1, Marker::gamma2}));
    rows.push_back(r);
    std::cout << "n=" << n << " beta=" << k.beta_infsup << " korn=" << k.c_korn << " poincare1=" << k.c_poincare_gamma1
              << " poincare2=" << k.c_poincare_gamma2 << " curl=" << k.c_curl << " curl_div=" << k.c_curl_div << "\n";
  }
  auto field = [](const DiscreteConstants& k, int i) {
    const double v[] = {k.beta_infsup, k.c_korn, k.c_poincare_gamma1, k.c_poincare_gamma2, k.c_curl};
    return v[i];
  };
  const char* names[] = {"beta_infsup", "c_korn", "c_poincare_gamma1", "c_poincare_gamma2", "c_curl"};
  Json checks = Json::object();
  for (int i = 0; i < 5; ++i) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& k : all) lo = std::min(lo, field(k, i)), hi = std::max(hi, field(k, i));
    const bool ok = lo >= kConstantFloor && (hi - lo) <= kConstantDrift * hi;
    checks[names[i]] = ok;
  }
  Json j{{"command", "constants"}, {"layout", c.layout.empty() ? "pipe" : c.layout}, {"rows", rows}, {"checks", checks}};
  write_file_atomic(out_dir(c) / "constants.json", dump_json(j));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"stokeslab: Taylor-Hood Stokes and pressure-Poisson solvers with an estimate-verification harness"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with any of the long flags below");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.option_defaults()->always_capture_default();

  app.add_option("--case", cfg.case_name, "manufactured case: ms1 (Poiseuille) or ms2 (trigonometric)");
  app.add_option("--problem", cfg.problem, "s1, s2 or pp");
  app.add_option("--n", cfg.n, "cells per side of the unit square (base level)");
  app.add_option("--levels", cfg.levels, "number of levels n, 2n, 4n, ...");
  app.add_option("--eps", cfg.eps, "perturbation sizes, comma separated")->delimiter(',');
  app.add_option("--layout", cfg.layout, "boundary layout: pipe, all-gamma1, all-gamma2 or 4 digits (bottom,right,top,left)");
  app.add_option("--out", cfg.out, "output directory for JSON/CSV/mesh files");
  app.add_option("--vtk", cfg.vtk, "directory for VTK output (solve)");
  app.add_option("--perturb", cfg.perturb, "verify-s2 perturbation: both, flux or traction");
  app.add_option("--refine", cfg.refine, "uniform refinements after generation (mesh)");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"mesh", "generate a unit-square mesh and write it as text and VTK"},
      {"solve", "solve one problem on one mesh and report errors"},
      {"convergence", "errors and observed rates over refinement levels"},
      {"verify-s1", "Stokes (traction data) vs pressure-Poisson estimate report"},
      {"verify-s2", "Stokes (curl form) vs pressure-Poisson estimate report"},
      {"constants", "discrete inf-sup, Korn, Poincare and curl constants"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->callback([&cfg, name = name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    validate(cfg);
    if (cfg.command == "mesh") return run_mesh(cfg);
    if (cfg.command == "solve") return run_solve(cfg);
    if (cfg.command == "convergence") return run_convergence_cmd(cfg);
    if (cfg.command == "verify-s1") return run_verify(cfg, Problem::s1);
    if (cfg.command == "verify-s2") return run_verify(cfg, Problem::s2);
    if (cfg.command == "constants") return run_constants(cfg);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}
