#pragma once

// Volume norms, discrete fractional trace norms and residual-based boundary
// functionals (discrete normal flux and traction).

#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "stokeslab/assembly.hpp"
#include "stokeslab/boundary_functional.hpp"
#include "stokeslab/solvers.hpp"

namespace stokeslab {

inline double l2_norm(const FeSpace& space, const CoeffVec& v) {
  const SparseMatrix m = assemble_matrix({Form::mass}, space, space);
  return std::sqrt(std::max(0.0, v.dot(m * v)));
}

inline double h1_seminorm(const FeSpace& space, const CoeffVec& v) {
  const SparseMatrix k = assemble_matrix({Form::grad_grad}, space, space);
  return std::sqrt(std::max(0.0, v.dot(k * v)));
}

inline double h1_norm(const FeSpace& space, const CoeffVec& v) {
  const double l2 = l2_norm(space, v), semi = h1_seminorm(space, v);
  return std::sqrt(l2 * l2 + semi * semi);
}

/// Squared L² and H¹-seminorm errors against a closed-form function.
/// `value` returns double (scalar space) or Vec2; `gradient` returns Vec2
/// (scalar) or Mat2 with row i = ∇u_i.
struct ErrorNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1() const { return std::sqrt(l2 * l2 + h1_semi * h1_semi); }
};

template <class Value, class Gradient>
ErrorNorms error_norms(const FeSpace& space, const CoeffVec& v, Value&& value, Gradient&& gradient, int order = 10) {
  const Mesh& mesh = space.mesh();
  const auto rule = triangle_rule(order);
  detail::CellTabulation tab(space.degree(), rule);
  const int nc = space.components();
  double l2 = 0.0, semi = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    tab.reinit(mesh, c);
    const auto nodes = space.cell_nodes(c);
    for (size_t q = 0; q < tab.size(); ++q) {
      Vec2 uh = Vec2::Zero();
      Mat2 gh = Mat2::Zero();
      for (int a = 0; a < tab.count(); ++a) {
        for (int i = 0; i < nc; ++i) {
          const double coef = v[space.dof(nodes[a], i)];
          uh[i] += coef * tab.value(q, a);
          gh.row(i) += coef * tab.grad(q, a).transpose();
        }
      }
      const Point& x = tab.point(q);
      const auto u = value(x);
      const auto g = gradient(x);
      if constexpr (std::is_arithmetic_v<std::decay_t<decltype(u)>>) {
        l2 += tab.jxw(q) * (uh[0] - u) * (uh[0] - u);
        semi += tab.jxw(q) * (gh.row(0).transpose() - Vec2(g)).squaredNorm();
      } else {
        l2 += tab.jxw(q) * (uh - Vec2(u)).squaredNorm();
        semi += tab.jxw(q) * (gh - Mat2(g)).squaredNorm();
      }
    }
  }
  return {std::sqrt(l2), std::sqrt(semi)};
}

// ---------------------------------------------------------------------------
// Fractional trace norms

/// Generalized eigen-decomposition A v = λ M v of the boundary H¹ and mass
/// matrices over the nodes of a boundary part (scalar, space degree).
struct TraceSpectrum {
  Marker marker = Marker::gamma1;
  std::vector<int> nodes;
  Eigen::MatrixXd mass;
  Eigen::MatrixXd h1;
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // M-orthonormal columns

  int size() const { return static_cast<int>(nodes.size()); }
};

inline constexpr int kTraceDofCap = 2000;

inline TraceSpectrum trace_spectrum(const FeSpace& space, Marker m) {
  const Mesh& mesh = space.mesh();
  detail::require_marker(mesh, m);
  TraceSpectrum s;
  s.marker = m;
  for (const auto& bn : space.boundary_nodes(m)) s.nodes.push_back(bn.node);
  const int n = s.size();
  if (n == 0) throw ConfigError("trace spectrum: no boundary dofs");
  if (n > kTraceDofCap) throw ConfigError("trace spectrum: boundary dof count exceeds " + std::to_string(kTraceDofCap));
  s.mass = Eigen::MatrixXd::Zero(n, n);
  s.h1 = Eigen::MatrixXd::Zero(n, n);
  const auto rule = line_rule(5);
  for (int e = 0; e < static_cast<int>(mesh.boundary_edges().size()); ++e) {
    const auto& be = mesh.boundary_edges()[e];
    if (be.marker != m) continue;
    const double len = (mesh.vertex(be.vertices[1]) - mesh.vertex(be.vertices[0])).norm();
    const auto nodes = space.boundary_edge_nodes(e);
    const int k = space.edge_node_count();
    for (const auto& lp : rule) {
      std::array<double, 3> v, dv;
      ShapeFunctions::eval_edge(space.degree(), lp.s, v, dv);
      for (int a = 0; a < k; ++a) {
        const int ia = space.boundary_position(nodes[a], m);
        for (int b = 0; b < k; ++b) {
          const int ib = space.boundary_position(nodes[b], m);
          const double mv = lp.weight * len * v[a] * v[b];
          s.mass(ia, ib) += mv;
          s.h1(ia, ib) += mv + lp.weight * dv[a] * dv[b] / len;
        }
      }
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s.h1, s.mass);
  if (es.info() != Eigen::Success) throw NumericalError("trace spectrum: generalized eigensolver failed");
  s.eigenvalues = es.eigenvalues();
  s.eigenvectors = es.eigenvectors();
  return s;
}

/// (Σ λ_k^{1/2} c_k²)^{1/2} with c = Vᵀ M g.
inline double h_half_norm(const TraceSpectrum& s, const Eigen::VectorXd& g) {
  if (g.size() != s.size()) throw ConfigError("h_half_norm: dimension mismatch");
  const Eigen::VectorXd c = s.eigenvectors.transpose() * (s.mass * g);
  return std::sqrt((s.eigenvalues.cwiseSqrt().array() * c.array().square()).sum());
}

/// (Σ λ_k^{-1/2} (v_kᵀ f)²)^{1/2}, summed over components.
inline double h_minus_half_norm(const TraceSpectrum& s, const BoundaryFunctional& f) {
  if (f.size() != s.size() || f.marker != s.marker) throw ConfigError("h_minus_half_norm: dimension mismatch");
  double sum = 0.0;
  for (int c = 0; c < f.components; ++c) {
    const Eigen::VectorXd d = s.eigenvectors.transpose() * f.component(c);
    sum += (d.array().square() / s.eigenvalues.cwiseSqrt().array()).sum();
  }
  return std::sqrt(sum);
}

/// Scalar H^{1/2} norm of a trace given over s.nodes.
inline double l2_trace_norm(const TraceSpectrum& s, const Eigen::VectorXd& g) { return std::sqrt(g.dot(s.mass * g)); }
inline double h1_trace_norm(const TraceSpectrum& s, const Eigen::VectorXd& g) { return std::sqrt(g.dot(s.h1 * g)); }

/// Functional whose H^{-1/2} norm equals h_half_norm(g) and ⟨f,g⟩ = ‖g‖²_{1/2}.
inline BoundaryFunctional riesz_image(const TraceSpectrum& s, const Eigen::VectorXd& g) {
  const Eigen::VectorXd c = s.eigenvectors.transpose() * (s.mass * g);
  BoundaryFunctional f;
  f.marker = s.marker;
  f.components = 1;
  f.nodes = s.nodes;
  f.values = s.mass * (s.eigenvectors * (s.eigenvalues.cwiseSqrt().asDiagonal() * c));
  return f;
}

/// Gagliardo surrogate (‖η‖²_L² + ∫∫|η(x)-η(y)|²/|x-y|²)^{1/2} of the trace
/// of a scalar FE function on a boundary part. Pairs of identical edges are
/// skipped.
inline double gagliardo_half_norm(const FeSpace& space, const CoeffVec& v, Marker m, int points = 6) {
  const Mesh& mesh = space.mesh();
  if (space.components() != 1) throw ConfigError("gagliardo_half_norm: scalar space required");
  struct Sample {
    Point x;
    double w, val;
    int edge;
  };
  std::vector<Sample> samples;
  const auto rule = gauss_legendre(points);
  for (int e = 0; e < static_cast<int>(mesh.boundary_edges().size()); ++e) {
    const auto& be = mesh.boundary_edges()[e];
    if (be.marker != m) continue;
    const Point& x0 = mesh.vertex(be.vertices[0]);
    const Point& x1 = mesh.vertex(be.vertices[1]);
    const double len = (x1 - x0).norm();
    const auto nodes = space.boundary_edge_nodes(e);
    for (const auto& lp : rule) {
      std::array<double, 3> val, dv;
      ShapeFunctions::eval_edge(space.degree(), lp.s, val, dv);
      double eta = 0.0;
      for (int a = 0; a < space.edge_node_count(); ++a) eta += val[a] * v[nodes[a]];
      samples.push_back({x0 + lp.s * (x1 - x0), lp.weight * len, eta, e});
    }
  }
  double l2 = 0.0, semi = 0.0;
  for (const auto& a : samples) {
    l2 += a.w * a.val * a.val;
    for (const auto& b : samples) {
      if (a.edge == b.edge) continue;
      const double d = a.val - b.val;
      semi += a.w * b.w * d * d / (a.x - b.x).squaredNorm();
    }
  }
  return std::sqrt(l2 + semi);
}

// ---------------------------------------------------------------------------
// Residual-based boundary functionals

/// Discrete Neumann flux on Γ1: ⟨∂p/∂ν, ψ_i⟩ = ∫∇p·∇ψ_i + ∫(div F)ψ_i for
/// the boundary basis functions ψ_i of the pressure space.
inline BoundaryFunctional pressure_flux_functional(const FeSpace& pressure_space, const CoeffVec& p,
                                                   const ScalarField& force_divergence = {}) {
  if (pressure_space.components() != 1) throw ConfigError("pressure flux needs a scalar space");
  const SparseMatrix k = assemble_matrix({Form::grad_grad}, pressure_space, pressure_space);
  CoeffVec r = k * p;
  if (force_divergence) r += assemble_functional(DomainScalar{force_divergence}, pressure_space);
  return restrict_functional(pressure_space, r, Marker::gamma1);
}

/// Discrete traction on Γ2: ⟨t, φ_i⟩ = a(u,φ_i) - ∫p div φ_i - ∫F·φ_i.
inline BoundaryFunctional traction_functional(const TaylorHood& th, const CoeffVec& u, const CoeffVec& p,
                                              const VectorField& force = {}) {
  const FeSpace& v = *th.velocity;
  const SparseMatrix a = assemble_matrix({Form::sym_grad_half}, v, v);
  const SparseMatrix dt = assemble_matrix({Form::div_couple}, *th.pressure, v);
  CoeffVec r = a * u - dt * p;
  if (force) r -= assemble_functional(DomainLoad{force}, v);
  return restrict_functional(v, r, Marker::gamma2);
}

/// Assembled pairing restricted to the admissible nodes of its boundary part.
inline BoundaryFunctional neumann_functional(const FeSpace& pressure_space, const BoundaryScalarField& g) {
  return restrict_functional(pressure_space, assemble_functional(NeumannPair{Marker::gamma1, g}, pressure_space),
                             Marker::gamma1);
}

inline BoundaryFunctional traction_pair_functional(const FeSpace& velocity_space, const BoundaryVectorField& t) {
  return restrict_functional(velocity_space, assemble_functional(TractionPair{Marker::gamma2, t}, velocity_space),
                             Marker::gamma2);
}

}  // namespace stokeslab
