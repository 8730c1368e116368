#pragma once

// Convergence studies, numerical checks of the Stokes/pressure-Poisson
// estimates, and discrete functional-analytic constants.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "stokeslab/manufactured.hpp"
#include "stokeslab/norms.hpp"
#include "stokeslab/parallel.hpp"

namespace stokeslab {

inline TaylorHood taylor_hood_for(const ManufacturedCase& c, int n) {
  return TaylorHood::build(std::make_shared<const Mesh>(generate_unit_square(n, c.layout)));
}

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceRow {
  int n;
  double h;
  double u_h1;  // ‖u_h - u*‖_H¹
  double p_l2;  // ‖p_h - p*‖_L²
  double p_h1;  // ‖p_h - p*‖_H¹
  double rate_u_h1 = std::numeric_limits<double>::quiet_NaN();
  double rate_p_l2 = std::numeric_limits<double>::quiet_NaN();
  double rate_p_h1 = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable {
  std::string case_name;
  Problem problem;
  std::vector<ConvergenceRow> rows;
};

struct SolutionErrors {
  ErrorNorms velocity;
  ErrorNorms pressure;
};

inline SolutionErrors solution_errors(const FieldSolution& s, const ManufacturedCase& c) {
  return {error_norms(*s.spaces.velocity, s.velocity, c.velocity, c.velocity_gradient),
          error_norms(*s.spaces.pressure, s.pressure, c.pressure, c.pressure_gradient)};
}

inline double observed_rate(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

/// Solves on n = n0·2^l, l < levels, and reports errors and observed rates.
inline ConvergenceTable run_convergence(const ManufacturedCase& c, Problem problem, int levels, int n0 = 4) {
  if (levels < 2) throw ConfigError("convergence study needs at least 2 levels");
  if (n0 < 1) throw ConfigError("base resolution must be >= 1");
  ConvergenceTable table{c.name, problem, std::vector<ConvergenceRow>(levels)};
  const ProblemData data = c.data();
  parallel_for(levels, [&](int l) {
    const int n = n0 << l;
    const TaylorHood th = taylor_hood_for(c, n);
    const FieldSolution s = solve(problem, th, data);
    const SolutionErrors e = solution_errors(s, c);
    table.rows[l] = {n, th.mesh->mesh_size(), e.velocity.h1(), e.pressure.l2, e.pressure.h1()};
  });
  for (int l = 1; l < levels; ++l) {
    auto& r = table.rows[l];
    const auto& p = table.rows[l - 1];
    r.rate_u_h1 = observed_rate(p.u_h1, r.u_h1);
    r.rate_p_l2 = observed_rate(p.p_l2, r.p_l2);
    r.rate_p_h1 = observed_rate(p.p_h1, r.p_h1);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Estimate verification

struct EstimateRow {
  int n;
  double h;
  double eps;
  double lhs_u = 0.0;
  double lhs_p = 0.0;
  double rhs_flux = 0.0;
  double rhs_trace = 0.0;
  double ratio = 0.0;

  double lhs() const { return lhs_u + lhs_p; }
  double rhs() const { return rhs_flux + rhs_trace; }
};

struct EstimateReport {
  std::string case_name;
  Problem problem;  // s1 or s2
  std::vector<EstimateRow> rows;
};

/// Gram matrices for H¹ norms of coefficient differences.
struct H1Gram {
  SparseMatrix gram;
  explicit H1Gram(const FeSpace& s)
      : gram(assemble_matrix({Form::mass}, s, s) + assemble_matrix({Form::grad_grad}, s, s)) {}
  double norm(const CoeffVec& v) const { return std::sqrt(std::max(0.0, v.dot(gram * v))); }
};

inline double safe_ratio(double lhs, double rhs) { return rhs > 0.0 ? lhs / rhs : 0.0; }

/// Profiles used to perturb boundary data: η(x) = sin(πx) on Γ1,
/// ζ(y) = y(1-y) on Γ2, and the tangential traction (0, ζ(y)) on Γ2.
inline double flux_profile(const Point& x) { return std::sin(std::numbers::pi * x.x()); }
inline double trace_profile(const Point& x) { return x.y() * (1 - x.y()); }
inline Vec2 traction_profile(const Point& x) { return Vec2(0.0, trace_profile(x)); }

/// Compares S1 (exact data) with PP driven by g̃ = g^b + εη and p̃^b = p^b + εζ.
inline EstimateReport verify_estimate_s1(const ManufacturedCase& c, const std::vector<double>& eps_list, int n) {
  const TaylorHood th = taylor_hood_for(c, n);
  const FeSpace& v = *th.velocity;
  const FeSpace& q = *th.pressure;
  const ProblemData data = c.data();
  const FieldSolution s1 = solve_s1(th, data);
  const BoundaryFunctional flux_s1 = pressure_flux_functional(q, s1.pressure, data.force_divergence);
  const TraceSpectrum spec1 = trace_spectrum(q, Marker::gamma1);
  const TraceSpectrum spec2 = trace_spectrum(q, Marker::gamma2);
  const Eigen::VectorXd p_trace = trace_values(q, s1.pressure, Marker::gamma2);
  const H1Gram gv(v), gq(q);

  EstimateReport report{c.name, Problem::s1, std::vector<EstimateRow>(eps_list.size())};
  parallel_for(static_cast<int>(eps_list.size()), [&](int i) {
    const double eps = eps_list[i];
    ProblemData d = data;
    d.flux = [g = data.flux, eps](const Point& x, const Vec2& nu) { return g(x, nu) + eps * flux_profile(x); };
    d.pressure = [p = data.pressure, eps](const Point& x) { return p(x) + eps * trace_profile(x); };
    const FieldSolution pp = solve_pp(th, d);

    EstimateRow r{n, th.mesh->mesh_size(), eps};
    r.lhs_u = gv.norm(s1.velocity - pp.velocity);
    r.lhs_p = gq.norm(s1.pressure - pp.pressure);
    r.rhs_flux = h_minus_half_norm(spec1, flux_s1 - neumann_functional(q, d.flux));
    Eigen::VectorXd pb(spec2.size());
    for (int k = 0; k < spec2.size(); ++k) pb[k] = d.pressure(q.node_point(spec2.nodes[k]));
    r.rhs_trace = h_half_norm(spec2, p_trace - pb);
    r.ratio = safe_ratio(r.lhs(), r.rhs());
    report.rows[i] = r;
  });
  return report;
}

enum class Perturbation { both, flux, traction };

inline Perturbation parse_perturbation(const std::string& s) {
  if (s == "both") return Perturbation::both;
  if (s == "flux") return Perturbation::flux;
  if (s == "traction") return Perturbation::traction;
  throw ConfigError("unknown perturbation '" + s + "' (expected both, flux or traction)");
}

/// Compares S2 (exact data) with PP driven by g̃ = g^b + εη, exact p^b and
/// the discrete S2 traction plus ε times the tangential profile.
inline EstimateReport verify_estimate_s2(const ManufacturedCase& c, const std::vector<double>& eps_list, int n,
                                         Perturbation mode = Perturbation::both) {
  const TaylorHood th = taylor_hood_for(c, n);
  const FeSpace& v = *th.velocity;
  const FeSpace& q = *th.pressure;
  const ProblemData data = c.data();
  const FieldSolution s2 = solve_s2(th, data);
  const BoundaryFunctional flux_s2 = pressure_flux_functional(q, s2.pressure, data.force_divergence);
  const BoundaryFunctional t_s2 = traction_functional(th, s2.velocity, s2.pressure, data.force);
  const BoundaryFunctional tau =
      traction_pair_functional(v, [](const Point& x, const Vec2&) { return traction_profile(x); });
  const TraceSpectrum spec1 = trace_spectrum(q, Marker::gamma1);
  const TraceSpectrum spec2 = trace_spectrum(v, Marker::gamma2);
  const H1Gram gv(v), gq(q);
  const bool perturb_flux = mode != Perturbation::traction;
  const bool perturb_traction = mode != Perturbation::flux;

  EstimateReport report{c.name, Problem::s2, std::vector<EstimateRow>(eps_list.size())};
  parallel_for(static_cast<int>(eps_list.size()), [&](int i) {
    const double eps = eps_list[i];
    ProblemData d = data;
    if (perturb_flux)
      d.flux = [g = data.flux, eps](const Point& x, const Vec2& nu) { return g(x, nu) + eps * flux_profile(x); };
    const BoundaryFunctional t_pp = perturb_traction ? t_s2 + eps * tau : t_s2;
    const FieldSolution pp = solve_pp(th, d, t_pp);

    EstimateRow r{n, th.mesh->mesh_size(), eps};
    r.lhs_u = gv.norm(s2.velocity - pp.velocity);
    r.lhs_p = gq.norm(s2.pressure - pp.pressure);
    r.rhs_flux = h_minus_half_norm(spec1, flux_s2 - neumann_functional(q, d.flux));
    r.rhs_trace = h_minus_half_norm(spec2, t_s2 - t_pp);
    r.ratio = safe_ratio(r.lhs(), r.rhs());
    report.rows[i] = r;
  });
  return report;
}

/// Least-squares line through the origin y ≈ s·x.
struct OriginFit {
  double slope = 0.0;
  double relative_residual = 0.0;  // ‖y - s x‖ / ‖y‖
};

inline OriginFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) xx += x[i] * x[i], xy += x[i] * y[i], yy += y[i] * y[i];
  OriginFit f;
  if (xx == 0.0 || yy == 0.0) return f;
  f.slope = xy / xx;
  double rr = 0.0;
  for (size_t i = 0; i < x.size(); ++i) rr += (y[i] - f.slope * x[i]) * (y[i] - f.slope * x[i]);
  f.relative_residual = std::sqrt(rr / yy);
  return f;
}

/// Summary statistics of a report over its rows with ε > 0.
struct EstimateSummary {
  double zero_mismatch_lhs = std::numeric_limits<double>::quiet_NaN();  // LHS at ε = 0 if present
  double zero_mismatch_lhs_p = std::numeric_limits<double>::quiet_NaN();
  double zero_mismatch_rhs = std::numeric_limits<double>::quiet_NaN();
  OriginFit lhs_fit;
  OriginFit lhs_u_fit;
  double ratio_spread = std::numeric_limits<double>::quiet_NaN();  // max/min of LHS/RHS
  double ratio_max = std::numeric_limits<double>::quiet_NaN();
  double lhs_p_max = 0.0;
};

inline EstimateSummary summarize(const EstimateReport& r) {
  EstimateSummary s;
  std::vector<double> e, l, lu;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& row : r.rows) {
    if (row.eps == 0.0) {
      s.zero_mismatch_lhs = row.lhs();
      s.zero_mismatch_lhs_p = row.lhs_p;
      s.zero_mismatch_rhs = row.rhs();
      continue;
    }
    e.push_back(row.eps);
    l.push_back(row.lhs());
    lu.push_back(row.lhs_u);
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    s.lhs_p_max = std::max(s.lhs_p_max, row.lhs_p);
  }
  if (!e.empty()) {
    s.lhs_fit = fit_through_origin(e, l);
    s.lhs_u_fit = fit_through_origin(e, lu);
    s.ratio_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    s.ratio_max = hi;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Discrete constants

struct DiscreteConstants {
  double beta_infsup;
  double c_korn;
  double c_poincare_gamma1;
  double c_poincare_gamma2;
  double c_curl;
  double c_curl_div;  // with the grad-div term used by the S2 solver
};

inline constexpr int kConstantsDofCap = 5000;

namespace detail {

inline std::vector<int> free_dofs(int n, const ConstraintSet& cs) {
  std::vector<int> f;
  for (int i = 0; i < n; ++i)
    if (!cs.contains(i)) f.push_back(i);
  if (static_cast<int>(f.size()) > kConstantsDofCap)
    throw ConfigError("discrete constants: " + std::to_string(f.size()) + " free dofs exceed the dense cap of " +
                      std::to_string(kConstantsDofCap));
  return f;
}

inline Eigen::MatrixXd dense_block(const SparseMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  const Eigen::MatrixXd full = Eigen::MatrixXd(m);
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, j) = full(rows[i], cols[j]);
  return out;
}

inline std::vector<int> all_dofs(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

/// Smallest λ of A x = λ B x, B symmetric positive definite.
inline double smallest_generalized_eigenvalue(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("generalized eigensolver failed");
  return es.eigenvalues()[0];
}

inline double root(double lambda) { return std::sqrt(std::max(0.0, lambda)); }

}  // namespace detail

/// sqrt of min ‖∇φ‖²/‖φ‖² over scalar P2 functions vanishing on the given parts.
inline double poincare_constant(MeshPtr mesh, const std::vector<Marker>& pinned) {
  const FeSpace s(std::move(mesh), 2, 1);
  const auto free = detail::free_dofs(s.num_dofs(), essential_constraints(s, ScalarZero{pinned}));
  const auto k = detail::dense_block(assemble_matrix({Form::grad_grad}, s, s), free, free);
  const auto m = detail::dense_block(assemble_matrix({Form::mass}, s, s), free, free);
  return detail::root(detail::smallest_generalized_eigenvalue(k, m));
}

/// sqrt of min ∫D:D / ‖φ‖²_H¹ over P2 velocities vanishing on Γ1.
inline double korn_constant(const TaylorHood& th) {
  const FeSpace& v = *th.velocity;
  const auto free = detail::free_dofs(v.num_dofs(), essential_constraints(v, VelocityNoSlip{}));
  const auto dd = detail::dense_block(SparseMatrix(0.5 * assemble_matrix({Form::sym_grad_half}, v, v)), free, free);
  const auto g = detail::dense_block(H1Gram(v).gram, free, free);
  return detail::root(detail::smallest_generalized_eigenvalue(dd, g));
}

/// sqrt of the smallest eigenvalue of B G⁻¹ Bᵀ against the pressure mass
/// matrix, G the H¹ Gram matrix on P2 velocities vanishing on Γ1.
inline double infsup_constant(const TaylorHood& th) {
  const FeSpace& v = *th.velocity;
  const FeSpace& q = *th.pressure;
  const auto free = detail::free_dofs(v.num_dofs(), essential_constraints(v, VelocityNoSlip{}));
  const auto pdofs = detail::all_dofs(q.num_dofs());
  const auto g = detail::dense_block(H1Gram(v).gram, free, free);
  const auto b = detail::dense_block(assemble_matrix({Form::div_couple}, v, q), pdofs, free);
  const auto mp = detail::dense_block(assemble_matrix({Form::mass}, q, q), pdofs, pdofs);
  const Eigen::MatrixXd s = b * Eigen::LLT<Eigen::MatrixXd>(g).solve(b.transpose());
  return detail::root(detail::smallest_generalized_eigenvalue(0.5 * (s + s.transpose()), mp));
}

/// sqrt of min (‖curl v‖² + γ‖div v‖²)/‖v‖²_H¹ over discretely
/// divergence-free v in H_h. γ = 0 is the bare curl constant.
inline double curl_constant(const TaylorHood& th, double grad_div = 0.0) {
  const FeSpace& v = *th.velocity;
  const FeSpace& q = *th.pressure;
  const auto free = detail::free_dofs(v.num_dofs(), essential_constraints(v, HSpace{}));
  const auto pdofs = detail::all_dofs(q.num_dofs());
  const auto b = detail::dense_block(assemble_matrix({Form::div_couple}, v, q), pdofs, free);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b.transpose());
  const Eigen::Index rank = qr.rank();
  const Eigen::MatrixXd qfull = qr.householderQ();
  const Eigen::MatrixXd z = qfull.rightCols(static_cast<Eigen::Index>(free.size()) - rank);
  SparseMatrix cc = assemble_matrix({Form::curl_curl}, v, v);
  if (grad_div > 0.0) cc += grad_div * assemble_matrix({Form::div_div}, v, v);
  const auto c = detail::dense_block(cc, free, free);
  const auto g = detail::dense_block(H1Gram(v).gram, free, free);
  const Eigen::MatrixXd cz = z.transpose() * c * z, gz = z.transpose() * g * z;
  return detail::root(
      detail::smallest_generalized_eigenvalue(0.5 * (cz + cz.transpose()), 0.5 * (gz + gz.transpose())));
}

inline DiscreteConstants discrete_constants(MeshPtr mesh) {
  const TaylorHood th = TaylorHood::build(mesh);
  return {infsup_constant(th), korn_constant(th), poincare_constant(mesh, {Marker::gamma1}),
          poincare_constant(mesh, {Marker::gamma2}), curl_constant(th), curl_constant(th, S2Options{}.grad_div)};
}

}  // namespace stokeslab
