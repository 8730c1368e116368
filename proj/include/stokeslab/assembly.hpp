#pragma once

// Assembly of the bilinear forms and load functionals of the three
// formulations. Rows index test dofs, columns trial dofs.

#include <array>
#include <functional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "stokeslab/linalg.hpp"
#include "stokeslab/quadrature.hpp"
#include "stokeslab/spaces.hpp"

namespace stokeslab {

using BoundaryScalarField = std::function<double(const Point&, const Vec2& normal)>;
using BoundaryVectorField = std::function<Vec2(const Point&, const Vec2& normal)>;

enum class Form {
  sym_grad_half,          // ½∫(∇u+∇uᵀ):(∇φ+∇φᵀ) = 2∫D(u):D(φ)
  curl_curl,              // ∫(∂₁u₂-∂₂u₁)(∂₁φ₂-∂₂φ₁)
  div_div,                // ∫div u div φ
  div_couple,             // ∫ q div φ
  grad_grad,              // ∫∇u·∇φ (componentwise)
  mass,                   // ∫u·φ
  boundary_mass,          // ∫_Γm u·φ
  boundary_h1,            // ∫_Γm (∂ₛu·∂ₛφ + u·φ)
  boundary_normal_trace,  // ∫_Γm q (φ·ν)
};

struct FormKind {
  Form form;
  Marker marker = Marker::gamma1;
};

struct QuadratureOrder {
  int cell = 4;
  int edge = 5;
};

namespace detail {

/// Basis values and physical gradients at the quadrature points of one cell.
class CellTabulation {
 public:
  CellTabulation(int degree, const std::vector<QuadPoint>& rule) : degree_(degree), rule_(rule) {
    ref_val_.resize(rule.size());
    ref_grad_.resize(rule.size());
    for (size_t q = 0; q < rule.size(); ++q) ShapeFunctions::eval(degree, rule[q].ref, ref_val_[q], ref_grad_[q]);
    grad_.resize(rule.size());
    jxw_.resize(rule.size());
    points_.resize(rule.size());
  }

  void reinit(const Mesh& mesh, int c) {
    const auto& t = mesh.cell(c);
    const Point& x0 = mesh.vertex(t[0]);
    Mat2 jac;
    jac.col(0) = mesh.vertex(t[1]) - x0;
    jac.col(1) = mesh.vertex(t[2]) - x0;
    const double det = jac.determinant();
    const Mat2 jinv_t = jac.inverse().transpose();
    const int n = ShapeFunctions::count(degree_);
    for (size_t q = 0; q < rule_.size(); ++q) {
      jxw_[q] = rule_[q].weight * det;
      points_[q] = x0 + jac * rule_[q].ref;
      for (int a = 0; a < n; ++a) grad_[q][a] = jinv_t * ref_grad_[q][a];
    }
  }

  size_t size() const { return rule_.size(); }
  int count() const { return ShapeFunctions::count(degree_); }
  double value(size_t q, int a) const { return ref_val_[q][a]; }
  const Vec2& grad(size_t q, int a) const { return grad_[q][a]; }
  double jxw(size_t q) const { return jxw_[q]; }
  const Point& point(size_t q) const { return points_[q]; }

 private:
  int degree_;
  std::vector<QuadPoint> rule_;
  std::vector<std::array<double, ShapeFunctions::max_count>> ref_val_;
  std::vector<std::array<Vec2, ShapeFunctions::max_count>> ref_grad_;
  std::vector<std::array<Vec2, ShapeFunctions::max_count>> grad_;
  std::vector<double> jxw_;
  std::vector<Point> points_;
};

inline Mat2 basis_gradient(const Vec2& g, int comp) {
  Mat2 m = Mat2::Zero();
  m.row(comp) = g.transpose();
  return m;
}

inline double curl_of(const Vec2& g, int comp) { return comp == 0 ? -g.y() : g.x(); }

inline void check_same_mesh(const FeSpace& a, const FeSpace& b) {
  if (&a.mesh() != &b.mesh()) throw ConfigError("spaces are defined on different meshes");
}

inline void require_marker(const Mesh& mesh, Marker m) {
  if (mesh.count_boundary_edges(m) == 0) throw ConfigError("no boundary edges carry marker " + to_string(m));
}

}  // namespace detail

inline SparseMatrix assemble_matrix(FormKind kind, const FeSpace& trial, const FeSpace& test,
                                    QuadratureOrder order = {}) {
  detail::check_same_mesh(trial, test);
  const Mesh& mesh = test.mesh();
  const int ct = test.components(), cu = trial.components();
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("unsupported component arity for ") + what);
  };
  Triplets triplets;

  const bool boundary_form =
      kind.form == Form::boundary_mass || kind.form == Form::boundary_h1 || kind.form == Form::boundary_normal_trace;

  if (!boundary_form) {
    switch (kind.form) {
      case Form::sym_grad_half: need(ct == 2 && cu == 2, "sym_grad_half"); break;
      case Form::curl_curl: need(ct == 2 && cu == 2, "curl_curl"); break;
      case Form::div_div: need(ct == 2 && cu == 2, "div_div"); break;
      case Form::div_couple: need(ct + cu == 3, "div_couple"); break;
      default: need(ct == cu, "grad_grad/mass"); break;
    }
    const auto rule = triangle_rule(order.cell);
    detail::CellTabulation tt(test.degree(), rule), tu(trial.degree(), rule);
    const int nt = tt.count(), nu = tu.count();
    for (int c = 0; c < mesh.num_cells(); ++c) {
      tt.reinit(mesh, c);
      tu.reinit(mesh, c);
      const auto test_nodes = test.cell_nodes(c);
      const auto trial_nodes = trial.cell_nodes(c);
      for (int a = 0; a < nt; ++a) {
        for (int i = 0; i < ct; ++i) {
          for (int b = 0; b < nu; ++b) {
            for (int j = 0; j < cu; ++j) {
              double v = 0.0;
              for (size_t q = 0; q < rule.size(); ++q) {
                const double w = tt.jxw(q);
                switch (kind.form) {
                  case Form::sym_grad_half: {
                    const Mat2 gu = detail::basis_gradient(tu.grad(q, b), j);
                    const Mat2 gt = detail::basis_gradient(tt.grad(q, a), i);
                    v += w * 0.5 * ((gu + gu.transpose()).cwiseProduct(gt + gt.transpose())).sum();
                    break;
                  }
                  case Form::curl_curl:
                    v += w * detail::curl_of(tu.grad(q, b), j) * detail::curl_of(tt.grad(q, a), i);
                    break;
                  case Form::div_div:
                    v += w * tu.grad(q, b)[j] * tt.grad(q, a)[i];
                    break;
                  case Form::div_couple:
                    if (ct == 1)  // scalar test q, vector trial
                      v += w * tt.value(q, a) * tu.grad(q, b)[j];
                    else  // vector test, scalar trial
                      v += w * tu.value(q, b) * tt.grad(q, a)[i];
                    break;
                  case Form::grad_grad:
                    if (i == j) v += w * tu.grad(q, b).dot(tt.grad(q, a));
                    break;
                  case Form::mass:
                    if (i == j) v += w * tu.value(q, b) * tt.value(q, a);
                    break;
                  default: break;
                }
              }
              if (v != 0.0) triplets.emplace_back(test.dof(test_nodes[a], i), trial.dof(trial_nodes[b], j), v);
            }
          }
        }
      }
    }
    return from_triplets(test.num_dofs(), trial.num_dofs(), triplets);
  }

  detail::require_marker(mesh, kind.marker);
  if (kind.form == Form::boundary_normal_trace)
    need(ct + cu == 3, "boundary_normal_trace");
  else
    need(ct == cu, "boundary_mass/boundary_h1");
  const auto rule = line_rule(order.edge);
  for (int e = 0; e < static_cast<int>(mesh.boundary_edges().size()); ++e) {
    const auto& be = mesh.boundary_edges()[e];
    if (be.marker != kind.marker) continue;
    const double len = (mesh.vertex(be.vertices[1]) - mesh.vertex(be.vertices[0])).norm();
    const Vec2 nu = mesh.outward_normal(be);
    const auto tnodes = test.boundary_edge_nodes(e);
    const auto unodes = trial.boundary_edge_nodes(e);
    for (int a = 0; a < test.edge_node_count(); ++a) {
      for (int i = 0; i < ct; ++i) {
        for (int b = 0; b < trial.edge_node_count(); ++b) {
          for (int j = 0; j < cu; ++j) {
            double v = 0.0;
            for (const auto& lp : rule) {
              std::array<double, 3> vt, dt, vu, du;
              ShapeFunctions::eval_edge(test.degree(), lp.s, vt, dt);
              ShapeFunctions::eval_edge(trial.degree(), lp.s, vu, du);
              const double w = lp.weight * len;
              if (kind.form == Form::boundary_normal_trace) {
                v += ct == 2 ? w * vu[b] * vt[a] * nu[i] : w * vt[a] * vu[b] * nu[j];
              } else if (i == j) {
                v += w * vu[b] * vt[a];
                if (kind.form == Form::boundary_h1) v += w * du[b] * dt[a] / (len * len);
              }
            }
            if (v != 0.0) triplets.emplace_back(test.dof(tnodes[a], i), trial.dof(unodes[b], j), v);
          }
        }
      }
    }
  }
  return from_triplets(test.num_dofs(), trial.num_dofs(), triplets);
}

// ---------------------------------------------------------------------------
// Functionals

/// ∫_Ω F·φ
struct DomainLoad {
  VectorField force;
};
/// ∫_Ω f ψ
struct DomainScalar {
  ScalarField value;
};
/// ∫_Γm t·φ
struct TractionPair {
  Marker marker;
  BoundaryVectorField traction;
};
/// ∫_Γm g ψ
struct NeumannPair {
  Marker marker;
  BoundaryScalarField flux;
};
/// ∫_Γm p (φ·ν)
struct PressureFlux {
  Marker marker;
  ScalarField pressure;
};

using FunctionalKind = std::variant<DomainLoad, DomainScalar, TractionPair, NeumannPair, PressureFlux>;

inline CoeffVec assemble_functional(const FunctionalKind& kind, const FeSpace& test, QuadratureOrder order = {}) {
  const Mesh& mesh = test.mesh();
  CoeffVec out = CoeffVec::Zero(test.num_dofs());
  const int ct = test.components();

  auto domain = [&](auto&& integrand_at) {
    const auto rule = triangle_rule(order.cell);
    detail::CellTabulation tab(test.degree(), rule);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      tab.reinit(mesh, c);
      const auto nodes = test.cell_nodes(c);
      for (size_t q = 0; q < tab.size(); ++q) {
        const auto value = integrand_at(tab.point(q));
        for (int a = 0; a < tab.count(); ++a)
          for (int i = 0; i < ct; ++i) out[test.dof(nodes[a], i)] += tab.jxw(q) * tab.value(q, a) * value[i];
      }
    }
  };
  auto boundary = [&](Marker m, auto&& integrand_at) {
    detail::require_marker(mesh, m);
    const auto rule = line_rule(order.edge);
    for (int e = 0; e < static_cast<int>(mesh.boundary_edges().size()); ++e) {
      const auto& be = mesh.boundary_edges()[e];
      if (be.marker != m) continue;
      const Point& x0 = mesh.vertex(be.vertices[0]);
      const Point& x1 = mesh.vertex(be.vertices[1]);
      const double len = (x1 - x0).norm();
      const Vec2 nu = mesh.outward_normal(be);
      const auto nodes = test.boundary_edge_nodes(e);
      for (const auto& lp : rule) {
        std::array<double, 3> v, dv;
        ShapeFunctions::eval_edge(test.degree(), lp.s, v, dv);
        const auto value = integrand_at(Point(x0 + lp.s * (x1 - x0)), nu);
        for (int a = 0; a < test.edge_node_count(); ++a)
          for (int i = 0; i < ct; ++i) out[test.dof(nodes[a], i)] += lp.weight * len * v[a] * value[i];
      }
    }
  };
  auto need = [&](int comps, const char* what) {
    if (ct != comps) throw ConfigError(std::string("unsupported component arity for ") + what);
  };

  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, DomainLoad>) {
          need(2, "domain load");
          if (!k.force) throw ConfigError("domain load: force missing");
          domain([&](const Point& x) { return k.force(x); });
        } else if constexpr (std::is_same_v<T, DomainScalar>) {
          need(1, "domain scalar");
          if (!k.value) throw ConfigError("domain scalar: function missing");
          domain([&](const Point& x) { return Eigen::Matrix<double, 1, 1>(k.value(x)); });
        } else if constexpr (std::is_same_v<T, TractionPair>) {
          need(2, "traction pairing");
          if (!k.traction) throw ConfigError("traction pairing: data missing");
          boundary(k.marker, [&](const Point& x, const Vec2& n) { return k.traction(x, n); });
        } else if constexpr (std::is_same_v<T, NeumannPair>) {
          need(1, "Neumann pairing");
          if (!k.flux) throw ConfigError("Neumann pairing: data missing");
          boundary(k.marker, [&](const Point& x, const Vec2& n) { return Eigen::Matrix<double, 1, 1>(k.flux(x, n)); });
        } else {
          need(2, "pressure flux");
          if (!k.pressure) throw ConfigError("pressure flux: data missing");
          boundary(k.marker, [&](const Point& x, const Vec2& n) { return Vec2(k.pressure(x) * n); });
        }
      },
      kind);
  return out;
}

}  // namespace stokeslab
