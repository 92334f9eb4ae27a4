#pragma once

// Linearized inversion of the scattering relation: the radial single-integral
// formula with the ln(lambda) kernel and the general double-integral formula
// with the ln|alpha + sigma - r cos(theta - phi)| kernel.
//
// Both use composite Simpson on the 2N+1 alpha nodes. The kernels have
// log/square-root singularities inside the alpha range, so the integrand is
// regularized by subtracting the piecewise-quadratic interpolant of S0 at the
// singular points and adding the subtracted part back through closed-form
// log moments.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dipole/errors.hpp"
#include "dipole/parallel.hpp"
#include "dipole/potential.hpp"
#include "dipole/quadrature.hpp"
#include "dipole/scattering.hpp"

namespace dipole {

inline constexpr double kLogFloor = 1e-12;

inline double lambda_kernel(double r, double alpha, double sigma) {
  if (r < 0.0) throw Error("lambda_kernel: r must be non-negative");
  const double A = std::abs(alpha + sigma);
  if (r == 0.0 && A == 0.0) throw SingularPointError("lambda_kernel at (r, alpha) = (0, -sigma)");
  if (r > 0.0 && A <= r) return 0.5 * r;
  return 0.5 * (A + std::sqrt((A - r) * (A + r)));
}

struct ReconstructionResult {
  TableMode mode = TableMode::Radial;
  std::vector<Vec2> points;  // evaluation points; radial results use (r, 0)
  std::vector<double> values;
  std::vector<double> exact;  // empty when the true potential is unknown
  double q = 0.0;
  double sigma = 0.1;
  double rho = kTwoPi;
  double beta = 1.1;
  int N = 400;
  std::size_t theta_count = 1;
  std::string quadrature;

  double radius(std::size_t i) const { return norm(points[i]); }

  /// sup |Q_rec - Q_exact| / scale over points with radius in [r_lo, r_hi].
  double sup_error(double scale = 1.0, double r_lo = 0.0,
                   double r_hi = std::numeric_limits<double>::infinity()) const {
    double e = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double r = radius(i);
      if (r >= r_lo && r <= r_hi) e = std::max(e, std::abs(values[i] - exact.at(i)));
    }
    return e / scale;
  }

  void attach_exact(const PotentialSpec &p) {
    exact.clear();
    for (const auto &x : points) exact.push_back(eval_Q(p, x));
  }
};

/// count uniform radii on [lo, hi]; the default grid is 201 points on [0, beta + sigma + 0.1].
inline std::vector<double> uniform_radii(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo) || lo < 0.0) throw ConfigError("radius grid needs count >= 2, 0 <= lo < hi");
  std::vector<double> r(count);
  for (std::size_t i = 0; i < count; ++i)
    r[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return r;
}
inline std::vector<double> default_radii(double sigma, double beta) {
  return uniform_radii(0.0, beta + sigma + 0.1, 201);
}

namespace detail {

/// Piecewise-quadratic interpolant of one S0 row on the Simpson panels; zero
/// outside [-beta, beta].
inline double s0_interpolant(const std::vector<double> &row, double beta, int N, double a) {
  if (a < -beta || a > beta) return 0.0;
  const double h = beta / N;
  int p = static_cast<int>(std::floor((a + beta) / (2.0 * h)));
  p = std::clamp(p, 0, N - 1);
  const std::size_t j = 2 * static_cast<std::size_t>(p);
  const double u = (a - (-beta + 2.0 * p * h)) / h;  // in [0, 2]
  const double f0 = row[j], f1 = row[j + 1], f2 = row[j + 2];
  return f0 * 0.5 * (u - 1.0) * (u - 2.0) - f1 * u * (u - 2.0) + f2 * 0.5 * u * (u - 1.0);
}

/// Antiderivative of ln|u| vanishing at 0.
inline double log_antiderivative(double u) { return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u; }

/// Antiderivatives (vanishing at A = 0) of ln(lambda) and A ln(lambda), with
/// A = alpha + sigma.
inline double lnlambda_moment0(double r, double A) {
  if (r == 0.0) return log_antiderivative(A);
  const double a = std::abs(A);
  const double l = std::log(0.5 * r);
  if (a <= r) return A * l;
  const double u = a / r;
  const double v = a * l + r * (u * std::acosh(u) - std::sqrt((u - 1.0) * (u + 1.0)));
  return A < 0.0 ? -v : v;
}
inline double lnlambda_moment1(double r, double A) {
  if (r == 0.0) return A == 0.0 ? 0.0 : 0.5 * A * A * std::log(std::abs(A)) - 0.25 * A * A;
  const double a = std::abs(A);
  const double l = std::log(0.5 * r);
  if (a <= r) return 0.5 * A * A * l;
  const double u = a / r;
  return 0.5 * A * A * l +
         r * r * ((2.0 * u * u - 1.0) / 4.0 * std::acosh(u) -
                  u * std::sqrt((u - 1.0) * (u + 1.0)) / 4.0);
}

inline void require_grid(const S0Series &s0) {
  if (s0.values.empty() || s0.alphas.size() != 2 * static_cast<std::size_t>(s0.N) + 1)
    throw GridError("S0 series does not match its alpha grid");
  const double h = s0.alpha_step();
  for (std::size_t j = 0; j < s0.alphas.size(); ++j)
    if (std::abs(s0.alphas[j] - (-s0.beta + static_cast<double>(j) * h)) > 1e-12 * std::max(1.0, s0.beta))
      throw GridError("S0 alpha grid is not uniform");
  for (const auto &row : s0.values)
    if (row.size() != s0.alphas.size()) throw GridError("S0 row length mismatch");
}

}  // namespace detail

/// Integral of ln(lambda(r, alpha)) S0(alpha) over [-beta, beta].
inline double radial_log_integral(const S0Series &s0, std::size_t row, double r,
                                  const std::vector<double> &w) {
  const auto &f = s0.values[row];
  const double sigma = s0.sigma, beta = s0.beta;
  // L(A) = c0 + c1 A matches the interpolant at the kernel's kinks A = -r, r
  // (the log point A = 0 when r = 0).
  double c0, c1;
  if (r == 0.0) {
    c0 = detail::s0_interpolant(f, beta, s0.N, -sigma);
    c1 = 0.0;
  } else {
    const double s1 = detail::s0_interpolant(f, beta, s0.N, -sigma - r);
    const double s2 = detail::s0_interpolant(f, beta, s0.N, -sigma + r);
    c0 = 0.5 * (s1 + s2);
    c1 = (s2 - s1) / (2.0 * r);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double A = s0.alphas[j] + sigma;
    if (r == 0.0 && A == 0.0) continue;  // ln|A| (S0 - L) -> 0
    sum += w[j] * std::log(lambda_kernel(r, s0.alphas[j], sigma)) * (f[j] - c0 - c1 * A);
  }
  const double lo = -beta + sigma, hi = beta + sigma;
  sum += c0 * (detail::lnlambda_moment0(r, hi) - detail::lnlambda_moment0(r, lo));
  sum += c1 * (detail::lnlambda_moment1(r, hi) - detail::lnlambda_moment1(r, lo));
  return sum;
}

/// Q(r) = q + (2 pi sigma)^-2 int ln(lambda(r, alpha)) S0(alpha) d alpha, using the theta = 0 row.
inline ReconstructionResult reconstruct_radial(const S0Series &s0, double sigma, double rho,
                                               double q, const std::vector<double> &radii,
                                               unsigned threads = 0) {
  detail::require_grid(s0);
  if (std::abs(s0.sigma - sigma) > 1e-15 || std::abs(s0.rho - rho) > 1e-12)
    throw MetadataMismatchError("reconstruct_radial: sigma/rho differ from the S0 series");
  for (double r : radii)
    if (!(r >= 0.0)) throw Error("reconstruct_radial: radii must be non-negative");
  const auto w = simpson_weights(s0.alphas.size(), s0.alpha_step());
  const double k = 1.0 / ((kTwoPi * sigma) * (kTwoPi * sigma));

  ReconstructionResult out;
  out.mode = TableMode::Radial;
  out.q = q;
  out.sigma = sigma;
  out.rho = rho;
  out.beta = s0.beta;
  out.N = s0.N;
  out.quadrature = "composite Simpson on 2N+1 alpha nodes with kink subtraction";
  for (double r : radii) out.points.push_back({r, 0.0});
  out.values = parallel_map<double>(
      radii.size(), [&](std::size_t i) { return q + k * radial_log_integral(s0, 0, radii[i], w); },
      threads);
  return out;
}

/// Q(x) = q + ((2 pi)^3 sigma^2)^-1 int_0^2pi int_-beta^beta ln|alpha + sigma - r cos(theta - phi)| S0 .
/// Composite Simpson in alpha with the singular point subtracted, periodic
/// trapezoid in theta.
inline ReconstructionResult reconstruct_general(const S0Series &s0, double sigma, double rho,
                                                double q, const std::vector<Vec2> &points,
                                                unsigned threads = 0) {
  detail::require_grid(s0);
  if (std::abs(s0.sigma - sigma) > 1e-15 || std::abs(s0.rho - rho) > 1e-12)
    throw MetadataMismatchError("reconstruct_general: sigma/rho differ from the S0 series");
  const std::size_t M = s0.thetas.size();
  for (std::size_t k = 0; k < M; ++k)
    if (std::abs(s0.thetas[k] - kTwoPi * static_cast<double>(k) / static_cast<double>(M)) > 1e-12)
      throw GridError("reconstruct_general needs a uniform periodic theta grid");
  const auto w = simpson_weights(s0.alphas.size(), s0.alpha_step());
  const double beta = s0.beta;
  const double k = 1.0 / (kTwoPi * kTwoPi * kTwoPi * sigma * sigma);

  auto evaluate = [&](std::size_t i) {
    const double r = norm(points[i]);
    const double phi = std::atan2(points[i].y, points[i].x);
    double total = 0.0;
    for (std::size_t t = 0; t < M; ++t) {
      const auto &f = s0.values[t];
      const double a = r * std::cos(s0.thetas[t] - phi) - sigma;
      const double c = detail::s0_interpolant(f, beta, s0.N, a);
      double inner = 0.0;
      for (std::size_t j = 0; j < f.size(); ++j)
        inner += w[j] * std::log(std::max(std::abs(s0.alphas[j] - a), kLogFloor)) * (f[j] - c);
      inner += c * (detail::log_antiderivative(beta - a) - detail::log_antiderivative(-beta - a));
      total += inner;
    }
    return q + k * (kTwoPi / static_cast<double>(M)) * total;
  };

  ReconstructionResult out;
  out.mode = TableMode::Angular;
  out.q = q;
  out.sigma = sigma;
  out.rho = rho;
  out.beta = beta;
  out.N = s0.N;
  out.theta_count = M;
  out.quadrature = "composite Simpson in alpha with singularity subtraction, periodic trapezoid in theta";
  out.points = points;
  out.values = parallel_map<double>(points.size(), evaluate, threads);
  return out;
}

/// max over theta rows of |Simpson integral of S0 over [-beta, beta]|.
inline double moment_check(const S0Series &s0) {
  detail::require_grid(s0);
  double m = 0.0;
  for (const auto &row : s0.values) m = std::max(m, std::abs(composite_simpson(row, s0.alpha_step())));
  return m;
}

/// max |S0| over the whole series.
inline double s0_sup(const S0Series &s0) {
  double m = 0.0;
  for (const auto &row : s0.values)
    for (double v : row) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace dipole
