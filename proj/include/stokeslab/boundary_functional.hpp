#pragma once

#include <vector>

#include "stokeslab/spaces.hpp"

namespace stokeslab {

/// Dual element on a boundary part: pairings against the basis functions of
/// the nodes in boundary_nodes(marker), component-interleaved.
struct BoundaryFunctional {
  Marker marker = Marker::gamma1;
  int components = 1;
  std::vector<int> nodes;
  Eigen::VectorXd values;

  int size() const { return static_cast<int>(nodes.size()); }

  /// Values of one component, in node order.
  Eigen::VectorXd component(int c) const {
    Eigen::VectorXd v(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) v[i] = values[i * components + c];
    return v;
  }

  BoundaryFunctional& operator+=(const BoundaryFunctional& o) {
    check(o);
    values += o.values;
    return *this;
  }
  BoundaryFunctional& operator-=(const BoundaryFunctional& o) {
    check(o);
    values -= o.values;
    return *this;
  }
  BoundaryFunctional& operator*=(double s) {
    values *= s;
    return *this;
  }
  friend BoundaryFunctional operator+(BoundaryFunctional a, const BoundaryFunctional& b) { return a += b; }
  friend BoundaryFunctional operator-(BoundaryFunctional a, const BoundaryFunctional& b) { return a -= b; }
  friend BoundaryFunctional operator*(double s, BoundaryFunctional a) { return a *= s; }

 private:
  void check(const BoundaryFunctional& o) const {
    if (o.marker != marker || o.components != components || o.nodes != nodes)
      throw ConfigError("boundary functionals live on different boundary spaces");
  }
};

/// Entries of a full dof vector at the boundary nodes of m. Nodes that also
/// lie on the closure of the other part are not admissible test functions
/// and get 0.
inline BoundaryFunctional restrict_functional(const FeSpace& space, const CoeffVec& full, Marker m) {
  BoundaryFunctional f;
  f.marker = m;
  f.components = space.components();
  const auto& bn = space.boundary_nodes(m);
  f.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bn.size()) * f.components);
  for (size_t i = 0; i < bn.size(); ++i) {
    f.nodes.push_back(bn[i].node);
    if (space.on_closure(bn[i].node, other(m))) continue;
    for (int c = 0; c < f.components; ++c) f.values[i * f.components + c] = full[space.dof(bn[i].node, c)];
  }
  return f;
}

/// Inverse of restrict_functional: a full dof vector, zero off the boundary.
inline CoeffVec scatter(const FeSpace& space, const BoundaryFunctional& f) {
  if (f.components != space.components()) throw ConfigError("functional/space component mismatch");
  CoeffVec full = CoeffVec::Zero(space.num_dofs());
  for (size_t i = 0; i < f.nodes.size(); ++i)
    for (int c = 0; c < f.components; ++c) full[space.dof(f.nodes[i], c)] = f.values[i * f.components + c];
  return full;
}

}  // namespace stokeslab
