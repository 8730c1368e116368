#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace stokeslab {

struct QuadPoint {
  Eigen::Vector2d ref;  // reference coordinates
  double weight;
};

struct LinePoint {
  double s;  // in [0,1]
  double weight;
};

/// n-point Gauss–Legendre rule on [0,1], exact for degree 2n-1.
inline std::vector<LinePoint> gauss_legendre(int n) {
  std::vector<LinePoint> pts(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    pts[n - 1 - i] = {0.5 * (x + 1.0), 0.5 * w};
  }
  return pts;
}

/// Line rule on [0,1] exact for polynomials of the given degree.
inline std::vector<LinePoint> line_rule(int degree) { return gauss_legendre(degree / 2 + 1); }

/// Collapsed Gauss rule on the reference triangle (0,0),(1,0),(0,1); weights
/// sum to 1/2. Exact for polynomials of the given total degree.
inline std::vector<QuadPoint> triangle_rule(int degree) {
  const int n = (degree + 1) / 2 + 1;  // the collapse adds one degree in the first variable
  const auto g = gauss_legendre(n);
  std::vector<QuadPoint> pts;
  pts.reserve(static_cast<size_t>(n) * n);
  for (const auto& a : g) {
    for (const auto& b : g) {
      pts.push_back({Eigen::Vector2d(a.s, b.s * (1.0 - a.s)), a.weight * b.weight * (1.0 - a.s)});
    }
  }
  return pts;
}

}  // namespace stokeslab
