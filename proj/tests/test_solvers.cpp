#include <gtest/gtest.h>

#include "stokeslab/manufactured.hpp"
#include "stokeslab/norms.hpp"
#include "stokeslab/verify.hpp"

using namespace stokeslab;

namespace stokeslab {
void PrintTo(Problem p, std::ostream* os) { *os << to_string(p); }
}  // namespace stokeslab

namespace {

TaylorHood th_square(int n, BcLayout layout = BcLayout::pipe()) {
  return TaylorHood::build(std::make_shared<const Mesh>(generate_unit_square(n, layout)));
}

ProblemData zero_data() {
  return {[](const Point&) { return Vec2(0, 0); }, [](const Point&) { return 0.0; },
          [](const Point&, const Vec2&) { return Vec2(0, 0); }, [](const Point&, const Vec2&) { return 0.0; },
          [](const Point&) { return 0.0; }};
}

}  // namespace

TEST(FactorSolve, Identity) {
  Triplets t;
  for (int i = 0; i < 5; ++i) t.emplace_back(i, i, 1.0);
  const CoeffVec b = CoeffVec::LinSpaced(5, 1, 5);
  EXPECT_LT((factor_solve(from_triplets(5, 5, t), b) - b).norm(), 1e-15);
}

TEST(FactorSolve, Tridiagonal) {
  // (1/h²)[2 -1; -1 2 -1; -1 2] x = 1, h = 1/4 → x = (3/32, 1/8, 3/32)
  const double h2 = 1.0 / 16;
  Triplets t{{0, 0, 2 / h2}, {0, 1, -1 / h2}, {1, 0, -1 / h2}, {1, 1, 2 / h2},
             {1, 2, -1 / h2}, {2, 1, -1 / h2}, {2, 2, 2 / h2}};
  const CoeffVec x = factor_solve(from_triplets(3, 3, t), CoeffVec::Ones(3));
  EXPECT_NEAR(x[0], 3.0 / 32, 1e-15);
  EXPECT_NEAR(x[1], 1.0 / 8, 1e-15);
  EXPECT_NEAR(x[2], 3.0 / 32, 1e-15);
}

TEST(FactorSolve, SingularityDetected) {
  Triplets zero_row{{0, 0, 1.0}, {0, 1, 2.0}, {2, 2, 1.0}};
  EXPECT_THROW(factor_solve(from_triplets(3, 3, zero_row), CoeffVec::Ones(3)), NumericalError);
  Triplets rank_one{{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
  EXPECT_THROW(factor_solve(from_triplets(2, 2, rank_one), CoeffVec::Ones(2)), NumericalError);
  EXPECT_THROW(factor_solve(from_triplets(2, 3, {}), CoeffVec::Ones(2)), ConfigError);
}

TEST(FactorSolve, IndefiniteSaddle) {
  // [2 1; 1 0] x = (3, 1) → x = (1, 1)
  Triplets t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}};
  SolveDiagnostics d;
  const CoeffVec x = factor_solve(from_triplets(2, 2, t), CoeffVec(Eigen::Vector2d(3, 1)), &d);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
  EXPECT_LE(d.relative_residual, 1e-15);
}

class PoiseuilleExact : public ::testing::TestWithParam<Problem> {};

TEST_P(PoiseuilleExact, ReproducesFields) {
  const ManufacturedCase c = ms1_poiseuille();
  // n = 1 leaves a corner pressure unconnected to any free velocity in the curl form
  for (int n : {2, 3, 4}) {
    const FieldSolution s = solve(GetParam(), th_square(n), c.data());
    const SolutionErrors e = solution_errors(s, c);
    EXPECT_LT(e.velocity.h1(), 1e-10) << "n=" << n;
    EXPECT_LT(e.pressure.l2, 1e-10) << "n=" << n;
    EXPECT_LE(s.diagnostics.relative_residual, 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(AllProblems, PoiseuilleExact, ::testing::Values(Problem::s1, Problem::s2, Problem::pp),
                         [](const auto& info) { return to_string(info.param); });

TEST(Solvers, ZeroDataGivesZero) {
  const TaylorHood th = th_square(3);
  for (Problem p : {Problem::s1, Problem::s2, Problem::pp}) {
    const FieldSolution s = solve(p, th, zero_data());
    EXPECT_LT(s.velocity.norm(), 1e-14) << to_string(p);
    EXPECT_LT(s.pressure.norm(), 1e-14) << to_string(p);
  }
}

TEST(Solvers, ConstantPressureData) {
  const double c = 1.75;
  const TaylorHood th = th_square(2);
  ProblemData d = zero_data();
  d.pressure = [c](const Point&) { return c; };
  d.traction = [c](const Point&, const Vec2& nu) { return Vec2(-c * nu); };
  for (Problem p : {Problem::s1, Problem::s2, Problem::pp}) {
    const FieldSolution s = solve(p, th, d);
    EXPECT_LT(s.velocity.cwiseAbs().maxCoeff(), 1e-12) << to_string(p);
    EXPECT_LT((s.pressure.array() - c).abs().maxCoeff(), 1e-12) << to_string(p);
  }
}

TEST(Solvers, ConstraintsHoldExactly) {
  const ManufacturedCase c = ms2_trig();
  const TaylorHood th = th_square(4);
  const FieldSolution s1 = solve_s1(th, c.data());
  const ConstraintSet c1 = essential_constraints(*th.velocity, VelocityNoSlip{});
  for (const auto& [dof, e] : c1.entries()) EXPECT_EQ(s1.velocity[dof], e.value);
  const FieldSolution s2 = solve_s2(th, c.data());
  const ConstraintSet c2 = essential_constraints(*th.velocity, HSpace{});
  for (const auto& [dof, e] : c2.entries()) EXPECT_EQ(s2.velocity[dof], e.value);
  const FieldSolution pp = solve_pp(th, c.data());
  const ConstraintSet cp = essential_constraints(*th.pressure, PressureDirichlet{c.pressure});
  for (const auto& [dof, e] : cp.entries()) EXPECT_EQ(pp.pressure[dof], e.value);
}

TEST(Solvers, DiscreteDivergenceConstraint) {
  const ManufacturedCase c = ms2_trig();
  const TaylorHood th = th_square(6);
  const SparseMatrix b = assemble_matrix({Form::div_couple}, *th.velocity, *th.pressure);
  for (Problem p : {Problem::s1, Problem::s2}) {
    const FieldSolution s = solve(p, th, c.data());
    EXPECT_LE((b * s.velocity).cwiseAbs().maxCoeff(), 1e-9) << to_string(p);
  }
}

TEST(Solvers, Affinity) {
  const TaylorHood th = th_square(3);
  const ProblemData a = ms2_trig().data();
  const ProblemData b = ms1_poiseuille().data();
  ProblemData sum;
  sum.force = [&](const Point& x) { return Vec2(a.force(x) + b.force(x)); };
  sum.force_divergence = [&](const Point& x) { return a.force_divergence(x) + b.force_divergence(x); };
  sum.traction = [&](const Point& x, const Vec2& n) { return Vec2(a.traction(x, n) + b.traction(x, n)); };
  sum.flux = [&](const Point& x, const Vec2& n) { return a.flux(x, n) + b.flux(x, n); };
  sum.pressure = [&](const Point& x) { return a.pressure(x) + b.pressure(x); };
  for (Problem p : {Problem::s1, Problem::s2, Problem::pp}) {
    const FieldSolution sa = solve(p, th, a), sb = solve(p, th, b), ss = solve(p, th, sum),
                        s0 = solve(p, th, zero_data());
    EXPECT_LT((ss.velocity - sa.velocity - sb.velocity + s0.velocity).norm(), 1e-9 * ss.velocity.norm());
    EXPECT_LT((ss.pressure - sa.pressure - sb.pressure + s0.pressure).norm(), 1e-9 * ss.pressure.norm());
  }
}

TEST(Solvers, MissingDataRejected) {
  const TaylorHood th = th_square(2);
  ProblemData d = zero_data();
  d.traction = nullptr;
  EXPECT_THROW(solve_s1(th, d), ConfigError);
  EXPECT_NO_THROW(solve_s2(th, d));
  EXPECT_THROW(solve_pp(th, d), ConfigError);
  d = zero_data();
  d.pressure = nullptr;
  EXPECT_THROW(solve_s2(th, d), ConfigError);
}

TEST(Solvers, FullyClampedVelocityLeavesPressureUndetermined) {
  const TaylorHood th = th_square(3);
  const FeSpace& v = *th.velocity;
  const SparseMatrix a = assemble_matrix({Form::sym_grad_half}, v, v);
  const ConstraintSet clamp = essential_constraints(v, VelocityNoSlip{{Marker::gamma1, Marker::gamma2}});
  EXPECT_THROW(detail::solve_saddle(Problem::s1, th, a, CoeffVec::Zero(v.num_dofs()), clamp), NumericalError);
}

TEST(Solvers, EmptyGamma2Rejected) {
  EXPECT_THROW(th_square(2, BcLayout::uniform(Marker::gamma1)), ConfigError);
}

TEST(Solvers, BareCurlFormLosesStabilityOnFineMeshes) {
  // Without the grad-div term the curl form admits discretely
  // divergence-free, curl-free velocities once n >= 6.
  const ProblemData d = ms1_poiseuille().data();
  EXPECT_NO_THROW(solve_s2(th_square(4), d, {0.0}));
  EXPECT_THROW(solve_s2(th_square(8), d, {0.0}), NumericalError);
  EXPECT_NO_THROW(solve_s2(th_square(8), d));
  EXPECT_THROW(solve_s2(th_square(2), d, {-1.0}), ConfigError);
}

TEST(Solvers, S2PressureTraceConvergesToData) {
  // natural condition p = p^b on Γ2
  const ManufacturedCase c = ms2_trig();
  std::vector<double> err;
  for (int n : {4, 8, 16}) {
    const TaylorHood th = th_square(n);
    const FieldSolution s = solve_s2(th, c.data());
    const TraceSpectrum spec = trace_spectrum(*th.pressure, Marker::gamma2);
    const Eigen::VectorXd ph = trace_values(*th.pressure, s.pressure, Marker::gamma2);
    Eigen::VectorXd pb(spec.size());
    for (int k = 0; k < spec.size(); ++k) pb[k] = c.pressure(th.pressure->node_point(spec.nodes[k]));
    err.push_back(l2_trace_norm(spec, ph - pb));
  }
  for (size_t i = 1; i < err.size(); ++i) EXPECT_GE(std::log2(err[i - 1] / err[i]), 1.5) << err[i - 1] << " " << err[i];
}

TEST(Solvers, PPMatchesS1ForExactData) {
  const ManufacturedCase c = ms1_poiseuille();
  const TaylorHood th = th_square(5);
  const FieldSolution s1 = solve_s1(th, c.data()), pp = solve_pp(th, c.data());
  EXPECT_LT((s1.velocity - pp.velocity).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((s1.pressure - pp.pressure).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Solvers, PPPressureStageIgnoresTraction) {
  const ManufacturedCase c = ms2_trig();
  const TaylorHood th = th_square(4);
  ProblemData d = c.data();
  const FieldSolution a = solve_pp(th, d);
  d.traction = [](const Point& x, const Vec2&) { return Vec2(1.0, x.y()); };
  const FieldSolution b = solve_pp(th, d);
  EXPECT_EQ(a.pressure, b.pressure);
  EXPECT_GT((a.velocity - b.velocity).norm(), 1e-3);
}

TEST(Solvers, ParseProblem) {
  EXPECT_EQ(parse_problem("pp"), Problem::pp);
  EXPECT_THROW(parse_problem("s3"), ConfigError);
}
