#include <cmath>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "dipole/reconstruction.hpp"

using namespace dipole;

namespace {

constexpr double kSigma = 0.1;
constexpr double kRho = kTwoPi;
const double kTau = free_exit_time(kSigma, kRho);

PotentialSpec poly(double eps, double kappa = 8.0) { return PotentialSpec::compact_polynomial(eps, 0.5, kappa); }

S0Series radial_s0(const PotentialSpec &p, int N = 400) {
  return s0_series(radial_table(p, kSigma, kRho, N, kTau), kSigma);
}

// Synthetic series sampling f on the standard alpha grid.
template <class F>
S0Series synthetic(F f, int N) {
  S0Series s;
  s.sigma = kSigma;
  s.rho = kRho;
  s.beta = impact_bound(kSigma, kRho);
  s.N = N;
  s.thetas = {0.0};
  std::vector<double> row;
  for (int l = -N; l <= N; ++l) {
    s.alphas.push_back(s.beta * l / N);
    row.push_back(f(s.alphas.back()));
  }
  s.values.push_back(row);
  return s;
}

double numeric_log_integral(double r, double (*f)(double)) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double beta = impact_bound(kSigma, kRho);
  auto g = [&](double a) { return std::log(lambda_kernel(r, a, kSigma)) * f(a); };
  // split at the kinks so the quadrature sees smooth pieces
  std::vector<double> cuts = {-beta};
  for (double k : {-kSigma - r, -kSigma + r})
    if (k > -beta && k < beta) cuts.push_back(k);
  cuts.push_back(beta);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += ts.integrate(g, cuts[i], cuts[i + 1]);
  return s;
}

double bump(double a) { return std::exp(-8.0 * a * a) * (1.0 - a * a / 1.21) * (1.0 - a * a / 1.21); }
double one(double) { return 1.0; }

}  // namespace

TEST(LambdaKernel, ReferenceValues) {
  EXPECT_DOUBLE_EQ(lambda_kernel(0.3, 0.4, kSigma), 0.45);
  EXPECT_DOUBLE_EQ(lambda_kernel(0.3, -0.5, kSigma), 0.5 * (0.4 + std::sqrt(0.07)));
  EXPECT_DOUBLE_EQ(lambda_kernel(0.3, 0.1, kSigma), 0.15);
  EXPECT_DOUBLE_EQ(lambda_kernel(0.0, 0.4, kSigma), 0.5);
  EXPECT_DOUBLE_EQ(lambda_kernel(0.2, 0.1, kSigma), 0.1);  // A = r: both branches agree
  EXPECT_THROW(lambda_kernel(0.0, -kSigma, kSigma), SingularPointError);
  EXPECT_THROW(lambda_kernel(-0.1, 0.0, kSigma), Error);
}

TEST(LambdaKernel, SolvesTheQuadratic) {
  // lambda + r^2 / (4 lambda) = A for A >= r
  for (double r : {0.05, 0.3, 0.9})
    for (double a : {0.2, 0.6, 1.0}) {
      const double A = a + kSigma;
      if (A < r) continue;
      const double l = lambda_kernel(r, a, kSigma);
      EXPECT_NEAR(l + r * r / (4 * l), A, 1e-15);
    }
}

TEST(LogMoments, MatchNumericIntegration) {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double r : {0.0, 0.2, 0.7}) {
    for (auto [lo, hi] : {std::pair{-1.0, 1.2}, std::pair{0.3, 0.9}, std::pair{-0.1, 0.05}}) {
      auto ln_lambda = [&](double A) {
        if (r == 0.0) return std::log(std::abs(A));
        const double a = std::abs(A);
        return a <= r ? std::log(0.5 * r) : std::log(0.5 * (a + std::sqrt(a * a - r * r)));
      };
      std::vector<double> cuts = {lo};
      for (double k : {-r, 0.0, r})
        if (k > lo && k < hi) cuts.push_back(k);
      cuts.push_back(hi);
      std::sort(cuts.begin(), cuts.end());
      double m0 = 0.0, m1 = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        m0 += ts.integrate(ln_lambda, cuts[i], cuts[i + 1]);
        m1 += ts.integrate([&](double A) { return A * ln_lambda(A); }, cuts[i], cuts[i + 1]);
      }
      EXPECT_NEAR(detail::lnlambda_moment0(r, hi) - detail::lnlambda_moment0(r, lo), m0, 1e-12) << r;
      EXPECT_NEAR(detail::lnlambda_moment1(r, hi) - detail::lnlambda_moment1(r, lo), m1, 1e-12) << r;
    }
  }
}

TEST(RadialLogIntegral, MatchesNumericIntegrationForSmoothData) {
  for (int N : {100, 400}) {
    const S0Series c = synthetic(one, N);
    const S0Series b = synthetic(bump, N);
    const auto w = simpson_weights(c.alphas.size(), c.alpha_step());
    for (double r : {0.0, 0.05, 0.3, 0.77, 1.5}) {
      // the pure log point r = 0 converges more slowly than the kinks
      const double tol = (N == 100 ? 1e-5 : 1e-6) * (r == 0.0 ? 8.0 : 1.0);
      EXPECT_NEAR(radial_log_integral(c, 0, r, w), numeric_log_integral(r, one), 1e-12) << r;
      EXPECT_NEAR(radial_log_integral(b, 0, r, w), numeric_log_integral(r, bump), tol) << N << " " << r;
    }
  }
}

TEST(ReconstructRadial, TrivialTableGivesTheFarFieldValue) {
  const S0Series s = radial_s0(PotentialSpec::constant(0.25), 40);
  const auto r = reconstruct_radial(s, kSigma, kRho, 0.25, uniform_radii(0.0, 1.3, 27));
  for (double v : r.values) EXPECT_EQ(v, 0.25);
}

TEST(ReconstructRadial, ErrorIsSmallRelativeToEpsilonOnTheReferenceProblem) {
  const double eps = 0.01;
  const auto p = poly(eps);
  const S0Series s = radial_s0(p);
  auto rec = reconstruct_radial(s, kSigma, kRho, 0.0, default_radii(kSigma, s.beta));
  rec.attach_exact(p);
  EXPECT_LT(rec.sup_error(eps), 0.1);
  EXPECT_GT(rec.sup_error(eps), 0.05);  // linearization error is of order eps, not roundoff
  // outside the support the reconstruction vanishes to roundoff
  EXPECT_LT(rec.sup_error(eps, 0.75), 1e-12);
  EXPECT_LT(moment_check(s) / s0_sup(s), 1e-12);
}

TEST(ReconstructRadial, ErrorShrinksLinearlyWithEpsilon) {
  std::vector<double> e;
  for (double eps : {0.02, 0.01, 0.005}) {
    const auto p = poly(eps);
    const S0Series s = radial_s0(p);
    auto rec = reconstruct_radial(s, kSigma, kRho, 0.0, default_radii(kSigma, s.beta));
    rec.attach_exact(p);
    e.push_back(rec.sup_error(eps));
  }
  EXPECT_GT(e[0], e[1]);
  EXPECT_GT(e[1], e[2]);
  EXPECT_NEAR(e[0] / e[1], 2.0, 0.3);
  EXPECT_NEAR(e[1] / e[2], 2.0, 0.3);
}

TEST(ReconstructRadial, ConvergesInTheAlphaSpacing) {
  const auto p = poly(0.01);
  const auto radii = uniform_radii(0.0, 0.6, 13);
  std::vector<std::vector<double>> v;
  for (int N : {50, 100, 200, 400}) v.push_back(reconstruct_radial(radial_s0(p, N), kSigma, kRho, 0.0, radii).values);
  auto diff = [&](std::size_t a, std::size_t b) {
    double m = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) m = std::max(m, std::abs(v[a][i] - v[b][i]));
    return m;
  };
  EXPECT_NEAR(diff(0, 1) / diff(1, 2), 4.0, 2.0);
  EXPECT_NEAR(diff(1, 2) / diff(2, 3), 4.0, 2.0);
}

TEST(ReconstructRadial, CuspPotential) {
  const double eps = 0.01;
  const auto p = poly(eps, 0.0);
  const S0Series s = radial_s0(p);
  auto rec = reconstruct_radial(s, kSigma, kRho, 0.0, default_radii(kSigma, s.beta));
  rec.attach_exact(p);
  EXPECT_LT(rec.sup_error(eps), 0.25);
}

TEST(ReconstructGeneral, AgreesWithRadialFormula) {
  const double eps = 0.01;
  const auto p = poly(eps);
  const ScatteringTable radial = radial_table(p, kSigma, kRho, 400, kTau);
  const S0Series s1 = s0_series(radial, kSigma);
  const S0Series sM = s0_series(rotated_angular_table(radial, 64), kSigma);
  std::vector<Vec2> pts;
  std::vector<double> radii;
  for (double r : {0.0, 0.12, 0.3, 0.45, 0.6, 0.9}) {
    radii.push_back(r);
    pts.push_back(rotate({r, 0.0}, 0.37 * r + 0.2));
  }
  const auto a = reconstruct_radial(s1, kSigma, kRho, 0.0, radii);
  const auto b = reconstruct_general(sM, kSigma, kRho, 0.0, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-4 * eps) << radii[i];
}

TEST(ReconstructGeneral, RecoversAnOffCentrePotential) {
  const double eps = 0.005;
  const auto p = PotentialSpec::gaussian_sum({{eps, {0.3, 0.1}, 30.0}, {0.5 * eps, {-0.2, -0.25}, 40.0}});
  const S0Series s = s0_series(angular_table(p, kSigma, kRho, 100, 32, kTau), kSigma);
  std::vector<Vec2> pts;
  for (double x = -0.8; x <= 0.8; x += 0.1)
    for (double y = -0.8; y <= 0.8; y += 0.1) pts.push_back({x, y});
  auto rec = reconstruct_general(s, kSigma, kRho, 0.0, pts);
  rec.attach_exact(p);
  EXPECT_LT(rec.sup_error(eps), 0.06);
}

TEST(Reconstruction, RejectsInconsistentInput) {
  const S0Series s = radial_s0(poly(0.01), 10);
  EXPECT_THROW(reconstruct_radial(s, 0.2, kRho, 0.0, {0.1}), MetadataMismatchError);
  EXPECT_THROW(reconstruct_radial(s, kSigma, kRho, 0.0, {-0.1}), Error);
  EXPECT_THROW(reconstruct_general(s, kSigma, 2.0, 0.0, {{0.1, 0.0}}), MetadataMismatchError);
  S0Series bad = s;
  bad.thetas = {0.0, 1.0, 2.0, 3.0};
  bad.values.assign(4, s.values[0]);
  EXPECT_THROW(reconstruct_general(bad, kSigma, kRho, 0.0, {{0.1, 0.0}}), GridError);
  bad = s;
  bad.alphas.pop_back();
  EXPECT_THROW(reconstruct_radial(bad, kSigma, kRho, 0.0, {0.1}), GridError);
  EXPECT_THROW(uniform_radii(0.0, 1.0, 1), ConfigError);
  EXPECT_THROW(uniform_radii(1.0, 0.5, 10), ConfigError);
}

TEST(Reconstruction, DefaultRadii) {
  const auto r = default_radii(kSigma, 1.1);
  ASSERT_EQ(r.size(), 201u);
  EXPECT_EQ(r.front(), 0.0);
  EXPECT_NEAR(r.back(), 1.3, 1e-15);
}
