#pragma once

// Conforming 2-D triangle meshes with a two-part boundary Γ = Γ1 ∪ Γ2.

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stokeslab/errors.hpp"

namespace stokeslab {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class Marker : int { gamma1 = 1, gamma2 = 2 };

inline std::string to_string(Marker m) { return m == Marker::gamma1 ? "Gamma1" : "Gamma2"; }

inline Marker other(Marker m) { return m == Marker::gamma1 ? Marker::gamma2 : Marker::gamma1; }

struct BoundaryEdge {
  std::array<int, 2> vertices;
  Marker marker;
};

/// Sides of the generated unit square, in counter-clockwise order.
enum class Side : int { bottom = 0, right = 1, top = 2, left = 3 };

/// Marker assignment for the four sides of (0,1)².
struct BcLayout {
  std::array<Marker, 4> sides{Marker::gamma1, Marker::gamma2, Marker::gamma1, Marker::gamma2};

  Marker operator[](Side s) const { return sides[static_cast<int>(s)]; }

  /// Γ1 = {y=0, y=1}, Γ2 = {x=0, x=1}: flow through a channel.
  static BcLayout pipe() { return {}; }

  static BcLayout uniform(Marker m) { return {{m, m, m, m}}; }

  bool has(Marker m) const { return std::find(sides.begin(), sides.end(), m) != sides.end(); }

  void validate() const {
    for (Marker m : {Marker::gamma1, Marker::gamma2}) {
      if (!has(m)) throw ConfigError("boundary layout leaves " + to_string(m) + " empty");
    }
  }

  /// Accepts "pipe", "all-gamma1", "all-gamma2", or four digits in {1,2}
  /// for bottom, right, top, left (e.g. "1212" == pipe).
  static BcLayout parse(const std::string& text) {
    if (text == "pipe") return pipe();
    if (text == "all-gamma1") return uniform(Marker::gamma1);
    if (text == "all-gamma2") return uniform(Marker::gamma2);
    if (text.size() == 4 && std::all_of(text.begin(), text.end(), [](char c) { return c == '1' || c == '2'; })) {
      BcLayout l;
      for (int i = 0; i < 4; ++i) l.sides[i] = text[i] == '1' ? Marker::gamma1 : Marker::gamma2;
      return l;
    }
    throw ConfigError("unknown layout '" + text + "'");
  }
};

/// Immutable triangle mesh. Cells are counter-clockwise; boundary edges are
/// stored with the orientation of their cell so the outward normal of edge
/// (a,b) is the tangent (b-a) rotated clockwise.
class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells, std::vector<BoundaryEdge> boundary,
       bool require_both_markers = true)
      : vertices_(std::move(vertices)), cells_(std::move(cells)) {
    build(std::move(boundary), require_both_markers);
  }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int v) const { return vertices_[v]; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::array<int, 3>& cell(int c) const { return cells_[c]; }

  /// Edges as sorted vertex pairs.
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  /// Local edge k of a cell joins local vertices k and (k+1)%3.
  const std::array<int, 3>& cell_edges(int c) const { return cell_edges_[c]; }
  /// Incident cells; second entry -1 for boundary edges.
  const std::array<int, 2>& edge_cells(int e) const { return edge_cells_[e]; }

  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  /// Global edge index of boundary edge i.
  int boundary_edge_index(int i) const { return boundary_edge_ids_[i]; }

  double cell_area(int c) const {
    const auto& t = cells_[c];
    const Point a = vertices_[t[1]] - vertices_[t[0]];
    const Point b = vertices_[t[2]] - vertices_[t[0]];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
  }

  double total_area() const {
    double s = 0.0;
    for (int c = 0; c < num_cells(); ++c) s += cell_area(c);
    return s;
  }

  double boundary_length(Marker m) const {
    double s = 0.0;
    for (const auto& be : boundary_)
      if (be.marker == m) s += (vertices_[be.vertices[1]] - vertices_[be.vertices[0]]).norm();
    return s;
  }

  double boundary_length() const { return boundary_length(Marker::gamma1) + boundary_length(Marker::gamma2); }

  int count_boundary_edges(Marker m) const {
    return static_cast<int>(std::count_if(boundary_.begin(), boundary_.end(), [m](const auto& b) { return b.marker == m; }));
  }

  Vec2 outward_normal(const BoundaryEdge& be) const {
    const Vec2 t = vertices_[be.vertices[1]] - vertices_[be.vertices[0]];
    return Vec2(t.y(), -t.x()).normalized();
  }

  /// Longest edge length.
  double mesh_size() const {
    double h = 0.0;
    for (const auto& e : edges_) h = std::max(h, (vertices_[e[1]] - vertices_[e[0]]).norm());
    return h;
  }

 private:
  void build(std::vector<BoundaryEdge> boundary, bool require_both_markers) {
    const int nv = num_vertices();
    for (int c = 0; c < num_cells(); ++c) {
      for (int v : cells_[c])
        if (v < 0 || v >= nv) throw ConfigError("cell " + std::to_string(c) + " references vertex out of range");
      if (!(cell_area(c) > 0.0)) throw ConfigError("cell " + std::to_string(c) + " has non-positive signed area");
    }

    std::map<std::array<int, 2>, int> index;
    cell_edges_.resize(cells_.size());
    for (int c = 0; c < num_cells(); ++c) {
      for (int k = 0; k < 3; ++k) {
        int a = cells_[c][k], b = cells_[c][(k + 1) % 3];
        std::array<int, 2> key{std::min(a, b), std::max(a, b)};
        auto [it, inserted] = index.try_emplace(key, num_edges());
        if (inserted) {
          edges_.push_back(key);
          edge_cells_.push_back({c, -1});
        } else {
          auto& ec = edge_cells_[it->second];
          if (ec[1] != -1) throw ConfigError("non-conforming mesh: edge shared by more than two cells");
          ec[1] = c;
        }
        cell_edges_[c][k] = it->second;
      }
    }

    std::vector<int> marked(edges_.size(), 0);
    for (const auto& be : boundary) {
      std::array<int, 2> key{std::min(be.vertices[0], be.vertices[1]), std::max(be.vertices[0], be.vertices[1])};
      auto it = index.find(key);
      if (it == index.end()) throw ConfigError("boundary edge is not an edge of the mesh");
      int e = it->second;
      if (edge_cells_[e][1] != -1) throw ConfigError("boundary edge is shared by two cells");
      if (marked[e]++) throw ConfigError("boundary edge listed twice");
      // orient as in the owning cell
      const auto& t = cells_[edge_cells_[e][0]];
      BoundaryEdge oriented = be;
      for (int k = 0; k < 3; ++k) {
        if (std::array<int, 2>{std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])} == key) {
          oriented.vertices = {t[k], t[(k + 1) % 3]};
        }
      }
      boundary_.push_back(oriented);
      boundary_edge_ids_.push_back(e);
    }
    for (int e = 0; e < num_edges(); ++e) {
      if (edge_cells_[e][1] == -1 && !marked[e])
        throw ConfigError("edge incident to one cell has no boundary marker (hanging vertex or missing marker)");
    }
    // boundary must consist of closed loops
    std::vector<int> degree(nv, 0);
    for (const auto& be : boundary_) {
      ++degree[be.vertices[0]];
      ++degree[be.vertices[1]];
    }
    for (int d : degree)
      if (d != 0 && d != 2) throw ConfigError("boundary is not a union of closed curves");

    if (require_both_markers) {
      for (Marker m : {Marker::gamma1, Marker::gamma2})
        if (count_boundary_edges(m) == 0) throw ConfigError("mesh boundary has no " + to_string(m) + " edges");
    }
  }

  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<std::array<int, 2>> edge_cells_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<int> boundary_edge_ids_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// 2n² right-diagonal triangles on (0,1)². Vertex (i,j) has index j(n+1)+i.
inline Mesh generate_unit_square(int n, const BcLayout& layout) {
  if (n < 1) throw ConfigError("mesh resolution n must be >= 1");
  layout.validate();
  const int m = n + 1;
  auto id = [m](int i, int j) { return j * m + i; };
  std::vector<Point> verts;
  verts.reserve(static_cast<size_t>(m) * m);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) verts.emplace_back(double(i) / n, double(j) / n);
  std::vector<std::array<int, 3>> cells;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<BoundaryEdge> boundary;
  for (int i = 0; i < n; ++i) boundary.push_back({{id(i, 0), id(i + 1, 0)}, layout[Side::bottom]});
  for (int j = 0; j < n; ++j) boundary.push_back({{id(n, j), id(n, j + 1)}, layout[Side::right]});
  for (int i = n; i > 0; --i) boundary.push_back({{id(i, n), id(i - 1, n)}, layout[Side::top]});
  for (int j = n; j > 0; --j) boundary.push_back({{id(0, j), id(0, j - 1)}, layout[Side::left]});
  return Mesh(std::move(verts), std::move(cells), std::move(boundary));
}

/// Red refinement: every triangle into four congruent children, edge midpoint
/// of edge e becomes vertex V+e.
inline Mesh refine_uniform(const Mesh& m) {
  const int nv = m.num_vertices();
  std::vector<Point> verts = m.vertices();
  for (const auto& e : m.edges()) verts.push_back(0.5 * (m.vertex(e[0]) + m.vertex(e[1])));
  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * static_cast<size_t>(m.num_cells()));
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto& t = m.cell(c);
    const auto& ce = m.cell_edges(c);
    int m01 = nv + ce[0], m12 = nv + ce[1], m20 = nv + ce[2];
    cells.push_back({t[0], m01, m20});
    cells.push_back({m01, t[1], m12});
    cells.push_back({m20, m12, t[2]});
    cells.push_back({m01, m12, m20});
  }
  std::vector<BoundaryEdge> boundary;
  for (int i = 0; i < static_cast<int>(m.boundary_edges().size()); ++i) {
    const auto& be = m.boundary_edges()[i];
    int mid = nv + m.boundary_edge_index(i);
    boundary.push_back({{be.vertices[0], mid}, be.marker});
    boundary.push_back({{mid, be.vertices[1]}, be.marker});
  }
  return Mesh(std::move(verts), std::move(cells), std::move(boundary));
}

// ---------------------------------------------------------------------------
// Line-oriented text format:
//   mesh2d v1
//   vertices N      (x y per line)
//   cells M         (i j k)
//   boundary K      (i j marker)

inline void write_mesh(std::ostream& os, const Mesh& m) {
  os << "mesh2d v1\n";
  os << "vertices " << m.num_vertices() << "\n";
  os.precision(17);
  for (const auto& p : m.vertices()) os << p.x() << " " << p.y() << "\n";
  os << "cells " << m.num_cells() << "\n";
  for (const auto& c : m.cells()) os << c[0] << " " << c[1] << " " << c[2] << "\n";
  os << "boundary " << m.boundary_edges().size() << "\n";
  for (const auto& b : m.boundary_edges())
    os << b.vertices[0] << " " << b.vertices[1] << " " << static_cast<int>(b.marker) << "\n";
}

inline Mesh read_mesh(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::string {
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) return line;
    }
    throw ConfigError("mesh file: unexpected end of input");
  };
  auto fail = [&](const std::string& what) { return ConfigError("mesh file line " + std::to_string(lineno) + ": " + what); };
  auto section = [&](const std::string& name) {
    std::istringstream ss(next());
    std::string key;
    long count = -1;
    if (!(ss >> key >> count) || key != name || count < 0) throw fail("expected '" + name + " <count>'");
    return count;
  };

  if (next().rfind("mesh2d v1", 0) != 0) throw fail("missing header 'mesh2d v1'");
  std::vector<Point> verts(section("vertices"));
  for (auto& p : verts) {
    std::istringstream ss(next());
    if (!(ss >> p.x() >> p.y())) throw fail("bad vertex");
  }
  std::vector<std::array<int, 3>> cells(section("cells"));
  for (auto& c : cells) {
    std::istringstream ss(next());
    if (!(ss >> c[0] >> c[1] >> c[2])) throw fail("bad cell");
  }
  std::vector<BoundaryEdge> boundary(section("boundary"));
  for (auto& b : boundary) {
    std::istringstream ss(next());
    int marker = 0;
    if (!(ss >> b.vertices[0] >> b.vertices[1] >> marker) || (marker != 1 && marker != 2)) throw fail("bad boundary edge");
    b.marker = static_cast<Marker>(marker);
  }
  return Mesh(std::move(verts), std::move(cells), std::move(boundary));
}

}  // namespace stokeslab
