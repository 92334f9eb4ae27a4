#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dipole/ode.hpp"
#include "dipole/quadrature.hpp"

using namespace dipole;

TEST(Dopri45, ExponentialDecay) {
  IntegratorConfig cfg;
  cfg.max_step = 0.1;
  const auto sol = solve_dopri45<1>([](double, const State<1> &y) { return State<1>{-y[0]}; }, 0.0, {1.0}, 3.0, cfg);
  EXPECT_NEAR(sol.final_state()[0], std::exp(-3.0), 1e-11);
  EXPECT_EQ(sol.t_end(), 3.0);
}

TEST(Dopri45, HarmonicOscillatorAndDenseOutput) {
  IntegratorConfig cfg;
  cfg.max_step = 0.5;
  auto f = [](double, const State<2> &y) { return State<2>{y[1], -y[0]}; };
  const auto sol = solve_dopri45<2>(f, 0.0, {1.0, 0.0}, 2 * std::numbers::pi, cfg);
  EXPECT_NEAR(sol.final_state()[0], 1.0, 1e-9);
  EXPECT_NEAR(sol.final_state()[1], 0.0, 1e-9);
  double worst = 0.0;
  for (double t = 0.0; t <= 2 * std::numbers::pi; t += 0.0137) {
    const auto y = sol(t);
    worst = std::max({worst, std::abs(y[0] - std::cos(t)), std::abs(y[1] + std::sin(t))});
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Dopri45, DenseOutputInterpolatesNodes) {
  auto f = [](double t, const State<1> &) { return State<1>{std::cos(t)}; };
  const auto sol = solve_dopri45<1>(f, 0.0, {0.0}, 1.0, IntegratorConfig{});
  for (std::size_t i = 0; i < sol.times().size(); ++i) EXPECT_EQ(sol(sol.times()[i])[0], sol.nodes()[i][0]);
  EXPECT_EQ(sol(-1.0)[0], 0.0);
  EXPECT_EQ(sol(2.0)[0], sol.final_state()[0]);
}

TEST(Dopri45, PolynomialSolutionsAreExactToRoundoff) {
  // y' = 4 t^3 lies inside the order of the method
  IntegratorConfig cfg;
  cfg.max_step = 0.25;
  const auto sol = solve_dopri45<1>([](double t, const State<1> &) { return State<1>{4 * t * t * t}; }, 0.0, {0.0},
                                    1.0, cfg);
  EXPECT_NEAR(sol.final_state()[0], 1.0, 1e-14);
}

TEST(Dopri45, RespectsMaxStep) {
  IntegratorConfig cfg;
  cfg.max_step = 0.01;
  const auto sol = solve_dopri45<1>([](double, const State<1> &) { return State<1>{0.0}; }, 0.0, {2.0}, 1.0, cfg);
  for (const auto &s : sol.segments()) EXPECT_LE(s.h, 0.01 * (1 + 1e-12));
  EXPECT_GE(sol.step_count(), 99u);
  EXPECT_EQ(sol.final_state()[0], 2.0);
}

TEST(Dopri45, ZeroLengthInterval) {
  const auto sol = solve_dopri45<1>([](double, const State<1> &y) { return y; }, 1.0, {3.0}, 1.0, IntegratorConfig{});
  EXPECT_EQ(sol.step_count(), 0u);
  EXPECT_EQ(sol.final_state()[0], 3.0);
}

TEST(Dopri45, TighterToleranceIsMoreAccurate) {
  auto f = [](double, const State<1> &y) { return State<1>{y[0] * (1 - y[0])}; };
  const double exact = 1.0 / (1.0 + 9.0 * std::exp(-5.0));
  IntegratorConfig loose;
  loose.rel_tol = 1e-5;
  loose.abs_tol = 1e-7;
  loose.max_step = 10.0;
  const double e_loose = std::abs(solve_dopri45<1>(f, 0.0, {0.1}, 5.0, loose).final_state()[0] - exact);
  const double e_tight = std::abs(solve_dopri45<1>(f, 0.0, {0.1}, 5.0, loose.tightened(1e-4)).final_state()[0] - exact);
  EXPECT_LT(e_tight, e_loose);
  EXPECT_LT(e_tight, 1e-9);
}

TEST(Dopri45, FailuresAreReported) {
  IntegratorConfig cfg;
  cfg.max_steps = 5;
  auto f = [](double, const State<1> &) { return State<1>{1.0}; };
  EXPECT_THROW(solve_dopri45<1>(f, 0.0, {0.0}, 1.0, cfg), StepFailureError);
  EXPECT_THROW(solve_dopri45<1>(f, 1.0, {0.0}, 0.0, IntegratorConfig{}), Error);
  // blow-up at t = 1
  auto g = [](double, const State<1> &y) { return State<1>{y[0] * y[0]}; };
  EXPECT_THROW(solve_dopri45<1>(g, 0.0, {1.0}, 2.0, IntegratorConfig{}), StepFailureError);
}

TEST(IntegratorConfig, Validation) {
  IntegratorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.rel_tol = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.max_step = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  const auto t = c.tightened(0.1);
  EXPECT_DOUBLE_EQ(t.rel_tol, 1e-11);
  EXPECT_DOUBLE_EQ(t.abs_tol, 1e-13);
  EXPECT_EQ(t.max_step, c.max_step);
}

TEST(Quadrature, SimpsonIsExactForCubics) {
  std::vector<double> f;
  const double h = 0.1;
  for (int i = 0; i <= 10; ++i) {
    const double x = i * h;
    f.push_back(x * x * x - 2 * x + 1);
  }
  EXPECT_NEAR(composite_simpson(f, h), 0.25 - 1.0 + 1.0, 1e-15);
  EXPECT_THROW(simpson_weights(4, h), GridError);
  EXPECT_THROW(simpson_weights(1, h), GridError);
}

TEST(Quadrature, GaussLegendreExactToDegree15) {
  const double v = GaussLegendre8::integrate([](double x) { return std::pow(x, 14) + x * x * x; }, -1.0, 2.0, 0.0);
  EXPECT_NEAR(v, (std::pow(2.0, 15) + 1.0) / 15.0 + (16.0 - 1.0) / 4.0, 1e-9);
}

TEST(Quadrature, AdaptiveSimpsonResolvesNarrowPeak) {
  auto f = [](double x) { return std::array<double, 2>{std::exp(-1e4 * (x - 0.3) * (x - 0.3)), std::sin(x)}; };
  const auto r = adaptive_simpson<2>(f, 0.0, 1.0, 1e-13);
  EXPECT_NEAR(r[0], std::sqrt(std::numbers::pi) / 100.0, 1e-11);
  EXPECT_NEAR(r[1], 1.0 - std::cos(1.0), 1e-12);
}
