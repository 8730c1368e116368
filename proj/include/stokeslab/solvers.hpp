#pragma once

// Discrete Stokes (traction data), Stokes (pressure + tangential data) and
// pressure-Poisson problems on Taylor–Hood P2/P1 spaces.

#include <memory>
#include <optional>
#include <string>

#include "stokeslab/assembly.hpp"
#include "stokeslab/boundary_functional.hpp"
#include "stokeslab/linalg.hpp"

namespace stokeslab {

enum class Problem { s1, s2, pp };

inline std::string to_string(Problem p) {
  switch (p) {
    case Problem::s1: return "s1";
    case Problem::s2: return "s2";
    default: return "pp";
  }
}

inline Problem parse_problem(const std::string& s) {
  if (s == "s1") return Problem::s1;
  if (s == "s2") return Problem::s2;
  if (s == "pp") return Problem::pp;
  throw ConfigError("unknown problem '" + s + "' (expected s1, s2 or pp)");
}

/// Problem data. An empty std::function means "not provided".
struct ProblemData {
  VectorField force;                 // F
  ScalarField force_divergence;      // div F
  BoundaryVectorField traction;      // t^b on Γ2
  BoundaryScalarField flux;          // g^b on Γ1
  ScalarField pressure;              // p^b on closure(Γ2)
};

/// P2 vector velocity and P1 pressure on one mesh.
struct TaylorHood {
  MeshPtr mesh;
  SpacePtr velocity;
  SpacePtr pressure;

  static TaylorHood build(MeshPtr mesh) {
    return {mesh, build_space(mesh, 2, 2), build_space(mesh, 1, 1)};
  }
};

struct FieldSolution {
  Problem problem;
  TaylorHood spaces;
  CoeffVec velocity;
  CoeffVec pressure;
  SolveDiagnostics diagnostics;
};

namespace detail {

inline void require(bool present, Problem p, const char* field) {
  if (!present) throw ConfigError("problem " + to_string(p) + " requires " + field);
}

/// Saddle system [A Bᵀ; B 0] with B = -DIV_COUPLE and velocity constraints.
inline FieldSolution solve_saddle(Problem tag, const TaylorHood& th, const SparseMatrix& a, const CoeffVec& load,
                                  const ConstraintSet& velocity_constraints) {
  const FeSpace& v = *th.velocity;
  const FeSpace& q = *th.pressure;
  const int nv = v.num_dofs(), np = q.num_dofs();
  const SparseMatrix d = assemble_matrix({Form::div_couple}, v, q);

  Triplets t;
  for (int r = 0; r < nv; ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) t.emplace_back(r, it.col(), it.value());
  for (int r = 0; r < np; ++r) {
    for (SparseMatrix::InnerIterator it(d, r); it; ++it) {
      t.emplace_back(nv + r, it.col(), -it.value());
      t.emplace_back(it.col(), nv + r, -it.value());
    }
  }
  const SparseMatrix k = from_triplets(nv + np, nv + np, t);
  CoeffVec f = CoeffVec::Zero(nv + np);
  f.head(nv) = load;

  std::vector<char> fixed(nv + np, 0);
  CoeffVec fixed_values = CoeffVec::Zero(nv + np);
  for (const auto& [dof, e] : velocity_constraints.entries()) {
    fixed[dof] = 1;
    fixed_values[dof] = e.value;
  }
  const ReducedSystem rs = reduce(k, f, fixed, fixed_values);
  FieldSolution sol{tag, th, {}, {}, {}};
  CoeffVec x;
  try {
    x = expand(rs, factor_solve(rs.matrix, rs.rhs, &sol.diagnostics), fixed_values);
  } catch (const NumericalError& e) {
    throw NumericalError("problem " + to_string(tag) + " is ill-posed on this mesh/layout: " + e.what());
  }
  sol.velocity = x.head(nv);
  sol.pressure = x.tail(np);
  return sol;
}

}  // namespace detail

/// Stokes problem with traction data on Γ2 and no-slip on Γ1:
///   a(u,φ) - ∫p div φ = ∫F·φ + ⟨t^b,φ⟩_Γ2,   -∫q div u = 0,
/// a = SYM_GRAD_HALF. No pressure gauge: Γ2 fixes the constant.
inline FieldSolution solve_s1(const TaylorHood& th, const ProblemData& data) {
  detail::require(bool(data.force), Problem::s1, "F");
  detail::require(bool(data.traction), Problem::s1, "t^b");
  const FeSpace& v = *th.velocity;
  const SparseMatrix a = assemble_matrix({Form::sym_grad_half}, v, v);
  const CoeffVec load = assemble_functional(DomainLoad{data.force}, v) +
                        assemble_functional(TractionPair{Marker::gamma2, data.traction}, v);
  return detail::solve_saddle(Problem::s1, th, a, load, essential_constraints(v, VelocityNoSlip{}));
}

/// Weight γ of the consistent term γ∫div u div v added to the curl form.
/// γ = 0 gives the bare curl form, which loses coercivity on discretely
/// divergence-free Taylor–Hood fields once the mesh admits discrete
/// gradients with zero curl (n >= 6 on the structured square).
struct S2Options {
  double grad_div = 1.0;
};

/// Stokes problem in curl form with u = 0 on Γ1, u·τ = 0 and p = p^b on Γ2:
///   ∫curl u curl v + γ∫div u div v - ∫p div v = ∫F·v - ∫_Γ2 p^b v·ν,
///   -∫q div u = 0.
inline FieldSolution solve_s2(const TaylorHood& th, const ProblemData& data, S2Options opt = {}) {
  detail::require(bool(data.force), Problem::s2, "F");
  detail::require(bool(data.pressure), Problem::s2, "p^b");
  if (!(opt.grad_div >= 0.0)) throw ConfigError("grad-div weight must be non-negative");
  const FeSpace& v = *th.velocity;
  const ConstraintSet cs = essential_constraints(v, HSpace{});
  SparseMatrix a = assemble_matrix({Form::curl_curl}, v, v);
  if (opt.grad_div > 0.0) a += opt.grad_div * assemble_matrix({Form::div_div}, v, v);
  const CoeffVec load = assemble_functional(DomainLoad{data.force}, v) -
                        assemble_functional(PressureFlux{Marker::gamma2, data.pressure}, v);
  return detail::solve_saddle(Problem::s2, th, a, load, cs);
}

/// Pressure-Poisson problem, solved in two stages:
///   (i)  ∫∇p·∇ψ = -∫(div F)ψ + ⟨g^b,ψ⟩_Γ1 for ψ ∈ H¹_Γ2, p = p^b on Γ2;
///   (ii) a(u,φ) = ∫F·φ + ⟨t,φ⟩_Γ2 + ∫p div φ for φ ∈ H¹_Γ1.
/// If `traction` is given it replaces the assembled t^b pairing in (ii).
inline FieldSolution solve_pp(const TaylorHood& th, const ProblemData& data,
                              const std::optional<BoundaryFunctional>& traction = std::nullopt) {
  detail::require(bool(data.force), Problem::pp, "F");
  detail::require(bool(data.force_divergence), Problem::pp, "div F");
  detail::require(bool(data.flux), Problem::pp, "g^b");
  detail::require(bool(data.pressure), Problem::pp, "p^b");
  detail::require(bool(data.traction) || traction.has_value(), Problem::pp, "t^b");
  const FeSpace& v = *th.velocity;
  const FeSpace& q = *th.pressure;
  FieldSolution sol{Problem::pp, th, {}, {}, {}};

  // (i) pressure
  {
    const SparseMatrix g = assemble_matrix({Form::grad_grad}, q, q);
    const CoeffVec rhs = -assemble_functional(DomainScalar{data.force_divergence}, q) +
                         assemble_functional(NeumannPair{Marker::gamma1, data.flux}, q);
    const ConstraintSet cs = essential_constraints(q, PressureDirichlet{data.pressure});
    CoeffVec fixed_values = CoeffVec::Zero(q.num_dofs());
    cs.apply(fixed_values);
    const ReducedSystem rs = reduce(g, rhs, cs.mask(q.num_dofs()), fixed_values);
    SolveDiagnostics d;
    sol.pressure = expand(rs, factor_solve(rs.matrix, rs.rhs, &d), fixed_values);
    sol.diagnostics = d;
  }
  // (ii) velocity
  {
    const SparseMatrix a = assemble_matrix({Form::sym_grad_half}, v, v);
    const SparseMatrix dt = assemble_matrix({Form::div_couple}, q, v);
    CoeffVec rhs = assemble_functional(DomainLoad{data.force}, v) + dt * sol.pressure;
    if (traction) {
      if (traction->marker != Marker::gamma2) throw ConfigError("PP traction functional must live on Gamma2");
      rhs += scatter(v, *traction);
    } else {
      rhs += assemble_functional(TractionPair{Marker::gamma2, data.traction}, v);
    }
    const ConstraintSet cs = essential_constraints(v, VelocityNoSlip{});
    CoeffVec fixed_values = CoeffVec::Zero(v.num_dofs());
    const ReducedSystem rs = reduce(a, rhs, cs.mask(v.num_dofs()), fixed_values);
    SolveDiagnostics d;
    sol.velocity = expand(rs, factor_solve(rs.matrix, rs.rhs, &d), fixed_values);
    sol.diagnostics.relative_residual = std::max(sol.diagnostics.relative_residual, d.relative_residual);
    sol.diagnostics.pivots += d.pivots;
    sol.diagnostics.min_pivot_ratio = std::min(sol.diagnostics.min_pivot_ratio, d.min_pivot_ratio);
  }
  return sol;
}

inline FieldSolution solve(Problem p, const TaylorHood& th, const ProblemData& data) {
  switch (p) {
    case Problem::s1: return solve_s1(th, data);
    case Problem::s2: return solve_s2(th, data);
    default: return solve_pp(th, data);
  }
}

}  // namespace stokeslab
