#pragma once

// Closed-form Stokes solutions on (0,1)² and the data they induce.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "stokeslab/solvers.hpp"

namespace stokeslab {

/// A divergence-free velocity u* with u* = 0 on Γ1 and u*·τ = 0 on Γ2, and a
/// pressure p*. Data follow from the strong operator -Δu + ∇p, which both
/// the symmetric-gradient and the curl-curl forms reproduce for div u = 0.
struct ManufacturedCase {
  std::string name;
  BcLayout layout;
  std::function<Vec2(const Point&)> velocity;
  std::function<Mat2(const Point&)> velocity_gradient;  // row i = ∇u_i
  std::function<Vec2(const Point&)> velocity_laplacian;
  ScalarField pressure;
  VectorField pressure_gradient;
  ScalarField pressure_laplacian;

  /// F = -Δu* + ∇p*
  VectorField force() const {
    return [lap = velocity_laplacian, gp = pressure_gradient](const Point& x) { return Vec2(-lap(x) + gp(x)); };
  }
  /// div F = Δp* (div Δu* = Δ div u* = 0)
  ScalarField force_divergence() const { return pressure_laplacian; }
  /// t^b = (∇u*+∇u*ᵀ)ν - p*ν
  BoundaryVectorField traction() const {
    return [g = velocity_gradient, p = pressure](const Point& x, const Vec2& n) {
      const Mat2 gx = g(x);
      return Vec2((gx + gx.transpose()) * n - p(x) * n);
    };
  }
  /// g^b = ∇p*·ν
  BoundaryScalarField flux() const {
    return [gp = pressure_gradient](const Point& x, const Vec2& n) { return gp(x).dot(n); };
  }

  ProblemData data() const { return {force(), force_divergence(), traction(), flux(), pressure}; }
};

/// Plane Poiseuille flow u* = (y(1-y), 0), p* = 2(1-x). Lies in P2 × P1.
inline ManufacturedCase ms1_poiseuille() {
  ManufacturedCase c;
  c.name = "ms1";
  c.layout = BcLayout::pipe();
  c.velocity = [](const Point& x) { return Vec2(x.y() * (1 - x.y()), 0.0); };
  c.velocity_gradient = [](const Point& x) {
    Mat2 g;
    g << 0.0, 1 - 2 * x.y(), 0.0, 0.0;
    return g;
  };
  c.velocity_laplacian = [](const Point&) { return Vec2(-2.0, 0.0); };
  c.pressure = [](const Point& x) { return 2.0 * (1 - x.x()); };
  c.pressure_gradient = [](const Point&) { return Vec2(-2.0, 0.0); };
  c.pressure_laplacian = [](const Point&) { return 0.0; };
  return c;
}

/// u* = (∂ψ/∂y, -∂ψ/∂x) with ψ = sin²(πx)sin²(πy), p* = cos(πx)cos(πy).
inline ManufacturedCase ms2_trig() {
  using std::cos, std::sin;
  constexpr double pi = std::numbers::pi;
  ManufacturedCase c;
  c.name = "ms2";
  c.layout = BcLayout::pipe();
  c.velocity = [](const Point& x) {
    const double sx = sin(pi * x.x()), sy = sin(pi * x.y());
    return Vec2(pi * sx * sx * sin(2 * pi * x.y()), -pi * sin(2 * pi * x.x()) * sy * sy);
  };
  c.velocity_gradient = [](const Point& x) {
    const double sx = sin(pi * x.x()), sy = sin(pi * x.y());
    const double s2x = sin(2 * pi * x.x()), s2y = sin(2 * pi * x.y());
    Mat2 g;
    g << pi * pi * s2x * s2y, 2 * pi * pi * sx * sx * cos(2 * pi * x.y()),
        -2 * pi * pi * cos(2 * pi * x.x()) * sy * sy, -pi * pi * s2x * s2y;
    return g;
  };
  c.velocity_laplacian = [](const Point& x) {
    const double p3 = pi * pi * pi;
    return Vec2(2 * p3 * sin(2 * pi * x.y()) * (2 * cos(2 * pi * x.x()) - 1),
                -2 * p3 * sin(2 * pi * x.x()) * (2 * cos(2 * pi * x.y()) - 1));
  };
  c.pressure = [](const Point& x) { return cos(pi * x.x()) * cos(pi * x.y()); };
  c.pressure_gradient = [](const Point& x) {
    return Vec2(-pi * sin(pi * x.x()) * cos(pi * x.y()), -pi * cos(pi * x.x()) * sin(pi * x.y()));
  };
  c.pressure_laplacian = [](const Point& x) { return -2 * pi * pi * cos(pi * x.x()) * cos(pi * x.y()); };
  return c;
}

inline ManufacturedCase manufactured(const std::string& name) {
  if (name == "ms1" || name == "ms1_poiseuille") return ms1_poiseuille();
  if (name == "ms2" || name == "ms2_trig") return ms2_trig();
  throw ConfigError("unknown manufactured case '" + name + "' (expected ms1 or ms2)");
}

}  // namespace stokeslab
