#include <gtest/gtest.h>

#include <random>

#include "stokeslab/manufactured.hpp"
#include "stokeslab/norms.hpp"

using namespace stokeslab;

namespace {

MeshPtr square(int n, BcLayout layout = BcLayout::pipe()) {
  return std::make_shared<const Mesh>(generate_unit_square(n, layout));
}

Eigen::VectorXd sample_trace(const FeSpace& s, const TraceSpectrum& spec, const ScalarField& f) {
  Eigen::VectorXd g(spec.size());
  for (int k = 0; k < spec.size(); ++k) g[k] = f(s.node_point(spec.nodes[k]));
  return g;
}

}  // namespace

TEST(Norms, VolumeNormsOfLinearFunction) {
  const FeSpace s(square(3), 1, 1);
  const CoeffVec v = interpolate(s, [](const Point& x) { return x.x(); });
  EXPECT_NEAR(l2_norm(s, v), std::sqrt(1.0 / 3), 1e-14);
  EXPECT_NEAR(h1_seminorm(s, v), 1.0, 1e-14);
  EXPECT_NEAR(h1_norm(s, v), std::sqrt(4.0 / 3), 1e-14);
}

TEST(Norms, ErrorNormsAgainstClosedForm) {
  const FeSpace s(square(4), 2, 2);
  const CoeffVec v = CoeffVec::Zero(s.num_dofs());
  const auto e = error_norms(
      s, v, [](const Point& x) { return Vec2(x.x(), 0.0); },
      [](const Point&) {
        Mat2 g;
        g << 1, 0, 0, 0;
        return g;
      });
  EXPECT_NEAR(e.l2, std::sqrt(1.0 / 3), 1e-14);
  EXPECT_NEAR(e.h1_semi, 1.0, 1e-14);
  // exact when the function is in the space
  const CoeffVec w = interpolate(s, [](const Point& x) { return Vec2(x.x() * x.y(), 1.0); });
  const auto z = error_norms(
      s, w, [](const Point& x) { return Vec2(x.x() * x.y(), 1.0); },
      [](const Point& x) {
        Mat2 g;
        g << x.y(), x.x(), 0, 0;
        return g;
      });
  EXPECT_LT(z.h1(), 1e-14);
}

TEST(Norms, SingleEdgeSpectrum) {
  // Γ2 is the left side only: one P1 edge of length 1
  const FeSpace q(square(1, BcLayout::parse("1112")), 1, 1);
  const TraceSpectrum spec = trace_spectrum(q, Marker::gamma2);
  ASSERT_EQ(spec.size(), 2);
  EXPECT_NEAR(spec.eigenvalues[0], 1.0, 1e-13);
  EXPECT_NEAR(spec.eigenvalues[1], 13.0, 1e-12);
}

TEST(Norms, SpectrumInvariants) {
  for (int deg : {1, 2}) {
    const FeSpace s(square(5), deg, 1);
    for (Marker m : {Marker::gamma1, Marker::gamma2}) {
      const TraceSpectrum spec = trace_spectrum(s, m);
      EXPECT_GE(spec.eigenvalues.minCoeff(), 1.0 - 1e-10);
      const Eigen::MatrixXd g = spec.eigenvectors.transpose() * spec.mass * spec.eigenvectors;
      EXPECT_LT((g - Eigen::MatrixXd::Identity(spec.size(), spec.size())).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Norms, ConstantTrace) {
  const FeSpace s(square(4, BcLayout::parse("1222")), 2, 1);
  const TraceSpectrum spec = trace_spectrum(s, Marker::gamma2);
  const Eigen::VectorXd g = Eigen::VectorXd::Constant(spec.size(), 2.5);
  EXPECT_NEAR(h_half_norm(spec, g), 2.5 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(l2_trace_norm(spec, g), 2.5 * std::sqrt(3.0), 1e-12);
}

TEST(Norms, MassTimesOneHasNormRootLength) {
  const FeSpace s(square(4), 2, 1);
  const TraceSpectrum spec = trace_spectrum(s, Marker::gamma1);
  BoundaryFunctional f;
  f.marker = Marker::gamma1;
  f.nodes = spec.nodes;
  f.values = spec.mass * Eigen::VectorXd::Ones(spec.size());
  EXPECT_NEAR(h_minus_half_norm(spec, f), std::sqrt(2.0), 1e-12);
}

TEST(Norms, InterpolationInequalityAndRieszDuality) {
  const FeSpace s(square(6), 2, 1);
  std::mt19937 rng(12345);
  std::normal_distribution<double> dist;
  for (Marker m : {Marker::gamma1, Marker::gamma2}) {
    const TraceSpectrum spec = trace_spectrum(s, m);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd g(spec.size()), h(spec.size());
      for (int k = 0; k < spec.size(); ++k) g[k] = dist(rng), h[k] = dist(rng);
      const double half = h_half_norm(spec, g);
      EXPECT_LE(half * half, l2_trace_norm(spec, g) * h1_trace_norm(spec, g) * (1 + 1e-12));
      EXPECT_LE(l2_trace_norm(spec, g), half * (1 + 1e-12));
      const BoundaryFunctional f = riesz_image(spec, g);
      EXPECT_NEAR(h_minus_half_norm(spec, f), half, 1e-10 * half);
      EXPECT_NEAR(f.values.dot(g), half * half, 1e-10 * half * half);
      // generalized Cauchy–Schwarz
      EXPECT_LE(std::abs(f.values.dot(h)), h_minus_half_norm(spec, f) * h_half_norm(spec, h) * (1 + 1e-12));
    }
  }
}

TEST(Norms, HalfNormStableUnderRefinement) {
  // smooth profile: the discrete H^{1/2} norm settles as the mesh is refined
  std::vector<double> v;
  for (int n : {4, 8, 16, 32}) {
    const FeSpace s(square(n), 2, 1);
    const TraceSpectrum spec = trace_spectrum(s, Marker::gamma2);
    v.push_back(h_half_norm(spec, sample_trace(s, spec, [](const Point& x) { return x.y() * (1 - x.y()); })));
  }
  EXPECT_LT(std::abs(v[3] - v[2]), 0.01 * v[3]);
  EXPECT_LT(std::abs(v[3] - v[2]), std::abs(v[1] - v[0]) + 1e-14);
}

TEST(Norms, GagliardoEquivalence) {
  for (int n : {4, 8}) {
    const FeSpace s(square(n), 2, 1);
    for (auto f : std::vector<ScalarField>{[](const Point& x) { return x.y() * (1 - x.y()); },
                                           [](const Point& x) { return std::sin(std::numbers::pi * x.x()); },
                                           [](const Point& x) { return 1.0 + x.x() + x.y(); }}) {
      const CoeffVec v = interpolate(s, f);
      for (Marker m : {Marker::gamma1, Marker::gamma2}) {
        const TraceSpectrum spec = trace_spectrum(s, m);
        const double a = h_half_norm(spec, trace_values(s, v, m));
        const double b = gagliardo_half_norm(s, v, m);
        if (a < 1e-12) {  // profile vanishes on this part
          EXPECT_LT(b, 1e-12);
          continue;
        }
        EXPECT_GE(b / a, 0.1);
        EXPECT_LE(b / a, 10.0);
      }
    }
  }
  const FeSpace vs(square(2), 2, 2);
  EXPECT_THROW(gagliardo_half_norm(vs, CoeffVec::Zero(vs.num_dofs()), Marker::gamma1), ConfigError);
}

TEST(Norms, FluxOfLinearPressure) {
  // p = y: ∂p/∂ν = -1 on y = 0, +1 on y = 1
  const FeSpace q(square(4), 1, 1);
  const CoeffVec p = interpolate(q, [](const Point& x) { return x.y(); });
  const BoundaryFunctional flux = pressure_flux_functional(q, p);
  const BoundaryFunctional ref = neumann_functional(q, [](const Point& x, const Vec2&) { return x.y() > 0.5 ? 1.0 : -1.0; });
  EXPECT_LT((flux.values - ref.values).cwiseAbs().maxCoeff(), 1e-14);
  double bottom = 0.0, top = 0.0;
  for (int k = 0; k < flux.size(); ++k) (q.node_point(flux.nodes[k]).y() < 0.5 ? bottom : top) += flux.values[k];
  // corner nodes are dropped: interior nodes carry 3 of the 4 edge lengths
  EXPECT_NEAR(bottom, -0.75, 1e-14);
  EXPECT_NEAR(top, 0.75, 1e-14);
}

TEST(Norms, FluxIdentityForPressurePoisson) {
  for (const auto& c : {ms1_poiseuille(), ms2_trig()}) {
    for (int n : {2, 4, 8, 16}) {
      const TaylorHood th = TaylorHood::build(square(n));
      const ProblemData d = c.data();
      const FieldSolution pp = solve_pp(th, d);
      const BoundaryFunctional r = pressure_flux_functional(*th.pressure, pp.pressure, d.force_divergence);
      const BoundaryFunctional g = neumann_functional(*th.pressure, d.flux);
      EXPECT_LE((r.values - g.values).cwiseAbs().maxCoeff(), 1e-10) << c.name << " n=" << n;
    }
  }
}

TEST(Norms, TractionOfConstantPressure) {
  // u = 0, p = 1, F = 0: ⟨t,φ⟩ = -∫ div φ restricted to Γ2 = -∫_Γ2 φ·ν
  const TaylorHood th = TaylorHood::build(square(3));
  const CoeffVec u = CoeffVec::Zero(th.velocity->num_dofs());
  const CoeffVec p = CoeffVec::Ones(th.pressure->num_dofs());
  const BoundaryFunctional t = traction_functional(th, u, p);
  const BoundaryFunctional ref = traction_pair_functional(*th.velocity, [](const Point&, const Vec2& nu) { return Vec2(-nu); });
  EXPECT_LT((t.values - ref.values).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_GT(ref.values.cwiseAbs().maxCoeff(), 0.1);
}

TEST(Norms, FunctionalArithmeticChecksSpaces) {
  const FeSpace q(square(2), 1, 1);
  const BoundaryFunctional a = neumann_functional(q, [](const Point&, const Vec2&) { return 1.0; });
  BoundaryFunctional b = a;
  b.marker = Marker::gamma2;
  EXPECT_THROW(a - b, ConfigError);
  EXPECT_LT((a + a - 2.0 * a).values.norm(), 1e-15);
}

TEST(Norms, DimensionMismatch) {
  const FeSpace q(square(2), 1, 1);
  const TraceSpectrum spec = trace_spectrum(q, Marker::gamma1);
  EXPECT_THROW(h_half_norm(spec, Eigen::VectorXd::Zero(spec.size() + 1)), ConfigError);
}
