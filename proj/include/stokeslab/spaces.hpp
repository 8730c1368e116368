#pragma once

// Continuous Lagrange P1/P2 spaces (scalar or 2-vector), degree-of-freedom
// maps, ordered boundary node lists and essential constraint sets.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "stokeslab/errors.hpp"
#include "stokeslab/mesh.hpp"

namespace stokeslab {

using CoeffVec = Eigen::VectorXd;
using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Vec2(const Point&)>;

/// Lagrange shape functions on the reference triangle. P2 ordering: vertex
/// functions 0..2, then edge midpoints of local edges (0,1), (1,2), (2,0).
struct ShapeFunctions {
  static constexpr int max_count = 6;

  static int count(int degree) { return degree == 1 ? 3 : 6; }

  static void eval(int degree, const Eigen::Vector2d& r, std::array<double, max_count>& val,
                   std::array<Eigen::Vector2d, max_count>& grad) {
    const double l0 = 1.0 - r.x() - r.y(), l1 = r.x(), l2 = r.y();
    const Eigen::Vector2d g0(-1.0, -1.0), g1(1.0, 0.0), g2(0.0, 1.0);
    if (degree == 1) {
      val[0] = l0, val[1] = l1, val[2] = l2;
      grad[0] = g0, grad[1] = g1, grad[2] = g2;
      return;
    }
    val[0] = l0 * (2 * l0 - 1), grad[0] = (4 * l0 - 1) * g0;
    val[1] = l1 * (2 * l1 - 1), grad[1] = (4 * l1 - 1) * g1;
    val[2] = l2 * (2 * l2 - 1), grad[2] = (4 * l2 - 1) * g2;
    val[3] = 4 * l0 * l1, grad[3] = 4 * (l1 * g0 + l0 * g1);
    val[4] = 4 * l1 * l2, grad[4] = 4 * (l2 * g1 + l1 * g2);
    val[5] = 4 * l2 * l0, grad[5] = 4 * (l0 * g2 + l2 * g0);
  }

  /// 1-D Lagrange basis on an edge, nodes ordered (start, [mid,] end).
  static void eval_edge(int degree, double s, std::array<double, 3>& val, std::array<double, 3>& dval) {
    if (degree == 1) {
      val = {1 - s, s, 0.0};
      dval = {-1.0, 1.0, 0.0};
      return;
    }
    val = {(1 - s) * (1 - 2 * s), 4 * s * (1 - s), s * (2 * s - 1)};
    dval = {4 * s - 3, 4 - 8 * s, 4 * s - 1};
  }
};

/// A node on a boundary part with its chain index and arclength coordinate.
struct BoundaryNode {
  int node;
  int chain;
  double arclength;
};

/// Continuous Lagrange space. Nodes are vertices (then edge midpoints for P2);
/// dofs are component-interleaved: dof = node * components + component.
class FeSpace {
 public:
  FeSpace(MeshPtr mesh, int degree, int components) : mesh_(std::move(mesh)), degree_(degree), components_(components) {
    if (degree != 1 && degree != 2) throw ConfigError("polynomial degree must be 1 or 2");
    if (components != 1 && components != 2) throw ConfigError("component count must be 1 or 2");
    build_boundary_index();
  }

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int components() const { return components_; }
  int num_nodes() const { return mesh_->num_vertices() + (degree_ == 2 ? mesh_->num_edges() : 0); }
  int num_dofs() const { return components_ * num_nodes(); }
  int dof(int node, int comp) const { return node * components_ + comp; }
  int local_count() const { return ShapeFunctions::count(degree_); }

  Point node_point(int node) const {
    const int nv = mesh_->num_vertices();
    if (node < nv) return mesh_->vertex(node);
    const auto& e = mesh_->edges()[node - nv];
    return 0.5 * (mesh_->vertex(e[0]) + mesh_->vertex(e[1]));
  }

  std::array<int, ShapeFunctions::max_count> cell_nodes(int c) const {
    std::array<int, ShapeFunctions::max_count> n{};
    const auto& t = mesh_->cell(c);
    n[0] = t[0], n[1] = t[1], n[2] = t[2];
    if (degree_ == 2) {
      const auto& ce = mesh_->cell_edges(c);
      for (int k = 0; k < 3; ++k) n[3 + k] = mesh_->num_vertices() + ce[k];
    }
    return n;
  }

  /// Nodes of boundary edge i in edge order (start, [mid,] end).
  std::array<int, 3> boundary_edge_nodes(int i) const {
    const auto& be = mesh_->boundary_edges()[i];
    if (degree_ == 1) return {be.vertices[0], be.vertices[1], -1};
    return {be.vertices[0], mesh_->num_vertices() + mesh_->boundary_edge_index(i), be.vertices[1]};
  }

  int edge_node_count() const { return degree_ + 1; }

  /// Nodes on the closure of a boundary part, ordered by chain then arclength.
  const std::vector<BoundaryNode>& boundary_nodes(Marker m) const { return boundary_nodes_[index(m)]; }

  bool on_closure(int node, Marker m) const { return closure_[index(m)][node] != 0; }

  /// Position of a node in boundary_nodes(m), or -1.
  int boundary_position(int node, Marker m) const { return position_[index(m)][node]; }

 private:
  static int index(Marker m) { return m == Marker::gamma1 ? 0 : 1; }

  void build_boundary_index() {
    const Mesh& mesh = *mesh_;
    const int nb = static_cast<int>(mesh.boundary_edges().size());
    for (Marker m : {Marker::gamma1, Marker::gamma2}) {
      auto& list = boundary_nodes_[index(m)];
      auto& closure = closure_[index(m)];
      auto& pos = position_[index(m)];
      closure.assign(num_nodes(), 0);
      pos.assign(num_nodes(), -1);

      std::map<int, int> from_start;  // start vertex -> boundary edge
      std::set<int> ends;
      for (int i = 0; i < nb; ++i) {
        const auto& be = mesh.boundary_edges()[i];
        if (be.marker != m) continue;
        from_start[be.vertices[0]] = i;
        ends.insert(be.vertices[1]);
      }
      std::vector<char> used(nb, 0);
      int chain = 0;
      auto walk = [&](int first) {
        double s = 0.0;
        int i = first;
        bool start = true;
        while (i >= 0 && !used[i]) {
          used[i] = 1;
          const auto& be = mesh.boundary_edges()[i];
          const auto nodes = boundary_edge_nodes(i);
          const double len = (mesh.vertex(be.vertices[1]) - mesh.vertex(be.vertices[0])).norm();
          for (int k = start ? 0 : 1; k < edge_node_count(); ++k) {
            const double sk = s + len * k / degree_;
            if (!closure[nodes[k]]) {
              closure[nodes[k]] = 1;
              pos[nodes[k]] = static_cast<int>(list.size());
              list.push_back({nodes[k], chain, sk});
            }
          }
          start = false;
          s += len;
          auto it = from_start.find(be.vertices[1]);
          i = it == from_start.end() ? -1 : it->second;
        }
        ++chain;
      };
      // open chains start where no marked edge ends; then any closed loops
      for (const auto& [v, i] : from_start)
        if (!ends.count(v)) walk(i);
      for (const auto& [v, i] : from_start)
        if (!used[i]) walk(i);
    }
  }

  MeshPtr mesh_;
  int degree_;
  int components_;
  std::array<std::vector<BoundaryNode>, 2> boundary_nodes_;
  std::array<std::vector<char>, 2> closure_;
  std::array<std::vector<int>, 2> position_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

inline SpacePtr build_space(MeshPtr mesh, int degree, int components) {
  return std::make_shared<const FeSpace>(std::move(mesh), degree, components);
}

// ---------------------------------------------------------------------------
// Constraints

enum class ConstraintKind { dirichlet, tangential };

/// Essential constraints as dof -> prescribed value. Dirichlet wins over a
/// tangential pin of the same dof.
class ConstraintSet {
 public:
  struct Entry {
    double value;
    ConstraintKind kind;
  };

  void add(int dof, double value, ConstraintKind kind) {
    auto [it, inserted] = entries_.try_emplace(dof, Entry{value, kind});
    if (inserted) return;
    Entry& e = it->second;
    if (e.kind == kind) {
      if (e.value != value)
        throw ConfigError("dof " + std::to_string(dof) + " constrained twice with conflicting values");
      return;
    }
    if (kind == ConstraintKind::dirichlet) e = {value, kind};
  }

  bool contains(int dof) const { return entries_.count(dof) != 0; }
  double value(int dof) const { return entries_.at(dof).value; }
  ConstraintKind kind(int dof) const { return entries_.at(dof).kind; }
  size_t size() const { return entries_.size(); }
  const std::map<int, Entry>& entries() const { return entries_; }

  /// Overwrites constrained entries of v with their prescribed values.
  void apply(CoeffVec& v) const {
    for (const auto& [dof, e] : entries_) v[dof] = e.value;
  }

  /// Boolean mask over n dofs.
  std::vector<char> mask(int n) const {
    std::vector<char> m(n, 0);
    for (const auto& [dof, e] : entries_) m[dof] = 1;
    return m;
  }

 private:
  std::map<int, Entry> entries_;
};

/// All vector dofs on the closure of the given parts pinned to zero.
struct VelocityNoSlip {
  std::vector<Marker> markers{Marker::gamma1};
};
/// u = 0 on Γ1 and u·τ = 0 on (axis-aligned) Γ2.
struct HSpace {};
/// Scalar dofs on closure(Γ2) pinned to p^b.
struct PressureDirichlet {
  ScalarField value;
};
/// Scalar dofs on the closure of the given parts pinned to zero.
struct ScalarZero {
  std::vector<Marker> markers;
};

using ConstraintSpec = std::variant<VelocityNoSlip, HSpace, PressureDirichlet, ScalarZero>;

namespace detail {

inline void pin_nodes(const FeSpace& space, Marker m, double value, ConstraintSet& cs) {
  for (const auto& bn : space.boundary_nodes(m))
    for (int c = 0; c < space.components(); ++c) cs.add(space.dof(bn.node, c), value, ConstraintKind::dirichlet);
}

}  // namespace detail

inline ConstraintSet essential_constraints(const FeSpace& space, const ConstraintSpec& spec) {
  ConstraintSet cs;
  const Mesh& mesh = space.mesh();
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, VelocityNoSlip>) {
          if (space.components() != 2) throw ConfigError("no-slip constraints need a vector space");
          for (Marker m : s.markers) detail::pin_nodes(space, m, 0.0, cs);
        } else if constexpr (std::is_same_v<T, HSpace>) {
          if (space.components() != 2) throw ConfigError("H constraints need a vector space");
          detail::pin_nodes(space, Marker::gamma1, 0.0, cs);
          for (int i = 0; i < static_cast<int>(mesh.boundary_edges().size()); ++i) {
            const auto& be = mesh.boundary_edges()[i];
            if (be.marker != Marker::gamma2) continue;
            const Vec2 t = mesh.vertex(be.vertices[1]) - mesh.vertex(be.vertices[0]);
            const double tol = 1e-12 * t.norm();
            int comp;
            if (std::abs(t.y()) <= tol) {
              comp = 0;  // horizontal side: tangent (±1,0)
            } else if (std::abs(t.x()) <= tol) {
              comp = 1;  // vertical side: tangent (0,±1)
            } else {
              throw GeometryError("tangential constraint requires axis-aligned Gamma2 sides");
            }
            const auto nodes = space.boundary_edge_nodes(i);
            for (int k = 0; k < space.edge_node_count(); ++k)
              cs.add(space.dof(nodes[k], comp), 0.0, ConstraintKind::tangential);
          }
        } else if constexpr (std::is_same_v<T, PressureDirichlet>) {
          if (space.components() != 1) throw ConfigError("pressure constraints need a scalar space");
          if (!s.value) throw ConfigError("pressure Dirichlet data missing");
          for (const auto& bn : space.boundary_nodes(Marker::gamma2))
            cs.add(space.dof(bn.node, 0), s.value(space.node_point(bn.node)), ConstraintKind::dirichlet);
        } else {
          for (Marker m : s.markers) detail::pin_nodes(space, m, 0.0, cs);
        }
      },
      spec);
  return cs;
}

// ---------------------------------------------------------------------------

/// Nodal interpolant. f returns double for scalar spaces, Vec2 for vector spaces.
template <class F>
CoeffVec interpolate(const FeSpace& space, F&& f) {
  CoeffVec v(space.num_dofs());
  for (int node = 0; node < space.num_nodes(); ++node) {
    const auto value = f(space.node_point(node));
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(value)>>) {
      if (space.components() != 1) throw ConfigError("scalar function interpolated into a vector space");
      v[node] = value;
    } else {
      if (space.components() != 2) throw ConfigError("vector function interpolated into a scalar space");
      v[space.dof(node, 0)] = value[0];
      v[space.dof(node, 1)] = value[1];
    }
  }
  return v;
}

/// Values of one component at the nodes of boundary_nodes(m).
inline Eigen::VectorXd trace_values(const FeSpace& space, const CoeffVec& v, Marker m, int comp = 0) {
  const auto& nodes = space.boundary_nodes(m);
  Eigen::VectorXd t(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) t[i] = v[space.dof(nodes[i].node, comp)];
  return t;
}

}  // namespace stokeslab
