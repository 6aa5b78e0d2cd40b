#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "podrom/fhn.hpp"
#include "podrom/ode.hpp"
#include "test_util.hpp"

using namespace podrom;

namespace {

OdeSystem decay() {
  OdeSystem s;
  s.dimension = 1;
  s.rhs = [](double, std::span<const double> x, std::span<double> out) { out[0] = -x[0]; };
  return s;
}

OdeSystem zero_system(std::size_t n) {
  OdeSystem s;
  s.dimension = n;
  s.rhs = [](double, std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  return s;
}

}  // namespace

TEST(Integrate, ZeroRhsKeepsStateExactly) {
  const OdeSystem s = zero_system(3);
  const Vector x0{1.5, -2.0, 3.25};
  const Vector times{0.0, 0.1, 0.7, 1.0};
  const Trajectory tr = integrate(s, x0, 0.0, 1.0, times);
  ASSERT_EQ(tr.size(), 4u);
  for (const auto& x : tr.states) EXPECT_EQ(x, x0);
}

TEST(Integrate, ScalarDecay) {
  IntegrationOptions o;
  const Vector times{1.0};
  const Trajectory tr = integrate(decay(), Vector{1.0}, 0.0, 1.0, times, o);
  EXPECT_NEAR(tr.states[0][0], std::exp(-1.0), 10 * o.rel_tol);
}

TEST(Integrate, RotationHalfTurn) {
  IntegrationOptions o;
  const OdeSystem s = make_linear_system(DenseMatrix::from_rows({{0, 1}, {-1, 0}}));
  const Vector times{std::numbers::pi};
  const Trajectory tr = integrate(s, Vector{1.0, 0.0}, 0.0, std::numbers::pi, times, o);
  EXPECT_NEAR(tr.states[0][0], -1.0, 10 * o.rel_tol);
  EXPECT_NEAR(tr.states[0][1], 0.0, 10 * o.rel_tol);
}

TEST(Integrate, OutputTimesReturnedBitForBit) {
  std::vector<double> times;
  for (int i = 0; i <= 37; ++i) times.push_back(0.3 * i / 37.0 + (i % 3 ? 1e-9 : 0.0));
  times.front() = 0.0;
  std::sort(times.begin(), times.end());
  const Trajectory tr = integrate(decay(), Vector{1.0}, 0.0, 0.4, times);
  ASSERT_EQ(tr.times.size(), times.size());
  for (std::size_t i = 0; i < times.size(); ++i) EXPECT_EQ(tr.times[i], times[i]);
  for (std::size_t i = 0; i < times.size(); ++i) EXPECT_NEAR(tr.states[i][0], std::exp(-times[i]), 1e-9);
}

TEST(Integrate, InvalidArguments) {
  const Vector t{0.5};
  EXPECT_THROW(integrate(decay(), Vector{1.0, 2.0}, 0.0, 1.0, t), InvalidInput);
  EXPECT_THROW(integrate(decay(), Vector{1.0}, 1.0, 1.0, t), InvalidInput);
  const Vector outside{1.5};
  EXPECT_THROW(integrate(decay(), Vector{1.0}, 0.0, 1.0, outside), InvalidInput);
  const Vector unsorted{0.5, 0.2};
  EXPECT_THROW(integrate(decay(), Vector{1.0}, 0.0, 1.0, unsorted), InvalidInput);
  IntegrationOptions bad;
  bad.rel_tol = 0.0;
  EXPECT_THROW(integrate(decay(), Vector{1.0}, 0.0, 1.0, t, bad), InvalidInput);
}

TEST(Integrate, NanInRhsIsEvaluationError) {
  OdeSystem s;
  s.dimension = 1;
  s.rhs = [](double t, std::span<const double>, std::span<double> out) { out[0] = t > 0.5 ? NAN : 1.0; };
  const Vector t{1.0};
  EXPECT_THROW(integrate(s, Vector{0.0}, 0.0, 1.0, t), EvaluationError);
}

TEST(Integrate, BlowUpIsStiffnessError) {
  // x' = x², x(0) = 1 blows up at t = 1.
  OdeSystem s;
  s.dimension = 1;
  s.rhs = [](double, std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0]; };
  const Vector t{2.0};
  try {
    integrate(s, Vector{1.0}, 0.0, 2.0, t);
    FAIL() << "expected a failure";
  } catch (const StiffnessError& e) {
    EXPECT_NEAR(e.time(), 1.0, 1e-3);
  } catch (const EvaluationError&) {
    // Overflow to inf before the step floor is also a legitimate outcome.
  }
}

TEST(Integrate, StepBudgetIsStiffnessError) {
  IntegrationOptions o;
  o.max_steps = 5;
  const Vector t{1.0};
  EXPECT_THROW(integrate(decay(), Vector{1.0}, 0.0, 1.0, t, o), StiffnessError);
}

TEST(Integrate, Rk4ConvergenceOrder) {
  const double exact = std::exp(-1.0);
  const double e1 = std::abs(integrate_rk4(decay(), Vector{1.0}, 0.0, 1.0, 10)[0] - exact);
  const double e2 = std::abs(integrate_rk4(decay(), Vector{1.0}, 0.0, 1.0, 20)[0] - exact);
  EXPECT_NEAR(e2 / e1, 1.0 / 16.0, 0.2 / 16.0);
}

TEST(Integrate, AdaptiveAgreesWithRk4) {
  const OdeSystem s = make_linear_system(DenseMatrix::from_rows({{-1, 2}, {-2, -1}}));
  const Vector x0{1.0, 0.5};
  const Vector t{2.0};
  const Vector a = integrate(s, x0, 0.0, 2.0, t).states[0];
  const Vector b = integrate_rk4(s, x0, 0.0, 2.0, 4000);
  EXPECT_LE(podrom::testing::max_abs_diff(a, b), 1e-9);
}

TEST(Integrate, LinearWiringMatchesGenericRhs) {
  std::mt19937_64 rng(5);
  const DenseMatrix a = podrom::testing::random_matrix(4, 4, rng) - 3.0 * DenseMatrix::identity(4);
  const OdeSystem lin = make_linear_system(a, [](double t) { return Vector{std::sin(t), 0.0, 1.0, -t}; });
  OdeSystem generic;
  generic.dimension = 4;
  generic.rhs = [a](double t, std::span<const double> x, std::span<double> out) {
    const Vector ax = multiply(a, x);
    const Vector b{std::sin(t), 0.0, 1.0, -t};
    for (std::size_t i = 0; i < 4; ++i) out[i] = ax[i] + b[i];
  };
  const Vector x0{1, 2, 3, 4};
  const Vector t{0.5, 1.0, 1.5};
  const Trajectory p = integrate(lin, x0, 0.0, 1.5, t);
  const Trajectory q = integrate(generic, x0, 0.0, 1.5, t);
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_LE(podrom::testing::max_abs_diff(p.states[k], q.states[k]), 1e-10);
}

TEST(SampleRhs, ZeroAndDecay) {
  Trajectory tr;
  tr.times = {0.0, 1.0};
  tr.states = {Vector{1.0}, Vector{std::exp(-1.0)}};
  const DenseMatrix z = sample_rhs(zero_system(1), tr);
  EXPECT_EQ(z.max_abs(), 0.0);
  const DenseMatrix d = sample_rhs(decay(), tr);
  EXPECT_EQ(d(0, 0), -1.0);
  EXPECT_EQ(d(0, 1), -std::exp(-1.0));
  EXPECT_THROW(sample_rhs(decay(), Trajectory{}), InvalidInput);
}

TEST(SampleRhs, NanIsEvaluationError) {
  OdeSystem s;
  s.dimension = 1;
  s.rhs = [](double, std::span<const double>, std::span<double> out) { out[0] = NAN; };
  Trajectory tr;
  tr.times = {0.0};
  tr.states = {Vector{1.0}};
  EXPECT_THROW(sample_rhs(s, tr), EvaluationError);
}

// The derivative column at t = 0 against a forward difference of a short
// integration from the zero state.
TEST(SampleRhs, FhnMatchesShortStepDifference) {
  const auto ep = fhn::preset(fhn::PresetId::B);
  // sin² forcing vanishes at t = 0; start slightly later so the boundary
  // rows are nonzero.
  const double t0 = 0.3;
  const OdeSystem sys = fhn::build_fhn(ep.params);
  const Vector x0 = fhn::initial_state(ep.params);
  Trajectory tr;
  tr.times = {t0};
  tr.states = {x0};
  const Vector f = sample_rhs(sys, tr).column(0);
  const double h = 1e-8;
  const Vector ts{t0 + h};
  IntegrationOptions o;
  o.rel_tol = 1e-13;
  o.abs_tol = 1e-16;
  const Vector xh = integrate(sys, x0, t0, t0 + h, ts, o).states[0];
  const double scale = max_abs(f);
  ASSERT_GT(scale, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR((xh[i] - x0[i]) / h, f[i], 1e-5 * scale) << i;
  const double dx = ep.params.dx();
  EXPECT_NEAR(f[0], ep.params.D1 / dx * ep.params.I0(t0), 1e-12 * scale);
}
