#pragma once

// Launch geometry, scattering samples S(theta, alpha) = X(tau) - X_e(tau),
// scattering tables and the derived S0 series.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dipole/dynamics.hpp"
#include "dipole/errors.hpp"
#include "dipole/parallel.hpp"
#include "dipole/potential.hpp"

namespace dipole {

/// Launch angle theta, impact parameter alpha, speed sigma = |xi0| and ball
/// parameter rho (ball radius rho / 2pi).
struct LaunchParams {
  double theta = 0.0;
  double alpha = 0.0;
  double sigma = 0.1;
  double rho = kTwoPi;
};

/// xi0 = sigma (-sin t, cos t), x0 = alpha xi0^perp/sigma - (rho/2pi) xi0/sigma.
inline PhaseState launch(double theta, double alpha, double sigma, double rho) {
  if (!(sigma > 0.0) || !(rho > 0.0)) throw Error("launch: sigma and rho must be positive");
  const Vec2 dir{-std::sin(theta), std::cos(theta)};
  const Vec2 across{std::cos(theta), std::sin(theta)};
  return {alpha * across - (rho / kTwoPi) * dir, sigma * dir};
}
inline PhaseState launch(const LaunchParams &l) { return launch(l.theta, l.alpha, l.sigma, l.rho); }

/// Sup over impact parameters of the free-flow exit time.
inline double free_exit_time(double sigma, double rho) { return 2.0 * sigma * rho; }

inline double impact_bound(double sigma, double rho) { return sigma + rho / kTwoPi; }

struct ScatteringSample {
  double theta = 0.0;
  double alpha = 0.0;
  Vec2 s_x;
  Vec2 s_xi;
  double tau_used = 0.0;

  PhaseState as_phase() const { return {s_x, s_xi}; }
  friend bool operator==(const ScatteringSample &, const ScatteringSample &) = default;
};

inline ScatteringSample scattering_sample(double theta, double alpha, double sigma, double rho,
                                          const PotentialSpec &p, double tau,
                                          const IntegratorConfig &cfg = {}) {
  if (!std::isfinite(alpha)) throw Error("scattering_sample: alpha must be finite");
  if (tau < free_exit_time(sigma, rho) * (1.0 - 1e-12))
    throw Error("scattering_sample: tau must be at least 2 sigma rho");
  const Trajectory traj = integrate(launch(theta, alpha, sigma, rho), p, tau, cfg);
  const PhaseState d = traj.final_deviation();
  return {theta, alpha, d.x, d.xi, tau};
}

/// R_theta applied to S_x and S_xi separately.
inline ScatteringSample rotate_sample(const ScatteringSample &s, double theta) {
  ScatteringSample out = s;
  out.theta = theta;
  out.s_x = rotate(s.s_x, theta);
  out.s_xi = rotate(s.s_xi, theta);
  return out;
}

enum class TableMode { Radial, Angular };

struct SampleFailure {
  std::size_t theta_index = 0;
  std::size_t alpha_index = 0;
  std::string message;
  friend bool operator==(const SampleFailure &, const SampleFailure &) = default;
};

/// Samples on alpha_l = beta l / N, l = -N..N, for each theta row.
struct ScatteringTable {
  TableMode mode = TableMode::Radial;
  double sigma = 0.1;
  double rho = kTwoPi;
  double beta = 1.1;
  int N = 400;
  double tau = 0.0;
  std::string potential;
  IntegratorConfig ode;
  std::vector<double> thetas;
  std::vector<ScatteringSample> samples;  // row-major: theta index, then alpha index
  std::vector<SampleFailure> failures;

  std::size_t alpha_count() const { return 2 * static_cast<std::size_t>(N) + 1; }
  std::size_t theta_count() const { return thetas.size(); }
  double alpha_step() const { return beta / N; }
  double alpha(std::size_t j) const {
    return beta * (static_cast<double>(j) - N) / static_cast<double>(N);
  }
  const ScatteringSample &at(std::size_t k, std::size_t j) const {
    return samples[k * alpha_count() + j];
  }
  ScatteringSample &at(std::size_t k, std::size_t j) { return samples[k * alpha_count() + j]; }

  friend bool operator==(const ScatteringTable &a, const ScatteringTable &b) {
    return a.mode == b.mode && a.sigma == b.sigma && a.rho == b.rho && a.beta == b.beta &&
           a.N == b.N && a.tau == b.tau && a.potential == b.potential &&
           a.ode.rel_tol == b.ode.rel_tol && a.ode.abs_tol == b.ode.abs_tol &&
           a.ode.max_step == b.ode.max_step && a.ode.initial_step == b.ode.initial_step &&
           a.thetas == b.thetas && a.samples == b.samples && a.failures == b.failures;
  }
};

namespace detail {
inline ScatteringTable build_table(TableMode mode, const PotentialSpec &p, double sigma, double rho,
                                   int N, std::vector<double> thetas, double tau,
                                   const IntegratorConfig &cfg, unsigned threads) {
  if (N < 2) throw Error("scattering table needs N >= 2");
  if (!(sigma > 0.0) || !(rho > 0.0)) throw Error("scattering table needs sigma, rho > 0");
  ScatteringTable t;
  t.mode = mode;
  t.sigma = sigma;
  t.rho = rho;
  t.beta = impact_bound(sigma, rho);
  t.N = N;
  t.tau = tau;
  t.potential = describe(p);
  t.ode = cfg;
  t.thetas = std::move(thetas);

  const std::size_t na = t.alpha_count();
  struct Cell {
    ScatteringSample sample;
    std::string error;
  };
  auto cells = parallel_map<Cell>(
      t.theta_count() * na,
      [&](std::size_t idx) {
        const std::size_t k = idx / na, j = idx % na;
        const double theta = t.thetas[k], alpha = t.alpha(j);
        Cell c;
        // |alpha| >= beta: neither vortex meets the ball, the sample is zero.
        if (j == 0 || j + 1 == na) {
          c.sample = {theta, alpha, {}, {}, tau};
          return c;
        }
        try {
          c.sample = scattering_sample(theta, alpha, sigma, rho, p, tau, cfg);
        } catch (const Error &e) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          c.sample = {theta, alpha, {nan, nan}, {nan, nan}, tau};
          c.error = e.what();
        }
        return c;
      },
      threads);
  t.samples.reserve(cells.size());
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    t.samples.push_back(cells[idx].sample);
    if (!cells[idx].error.empty()) t.failures.push_back({idx / na, idx % na, cells[idx].error});
  }
  return t;
}
}  // namespace detail

inline ScatteringTable radial_table(const PotentialSpec &p, double sigma, double rho, int N,
                                    double tau, const IntegratorConfig &cfg = {},
                                    unsigned threads = 0) {
  return detail::build_table(TableMode::Radial, p, sigma, rho, N, {0.0}, tau, cfg, threads);
}

inline std::vector<double> uniform_angles(int M) {
  std::vector<double> th(static_cast<std::size_t>(M));
  for (int k = 0; k < M; ++k) th[static_cast<std::size_t>(k)] = kTwoPi * k / M;
  return th;
}

inline ScatteringTable angular_table(const PotentialSpec &p, double sigma, double rho, int N, int M,
                                     double tau, const IntegratorConfig &cfg = {},
                                     unsigned threads = 0) {
  if (M < 4) throw Error("angular table needs M >= 4");
  return detail::build_table(TableMode::Angular, p, sigma, rho, N, uniform_angles(M), tau, cfg,
                             threads);
}

/// Angular table obtained from the theta = 0 row of a radial table by rotation.
inline ScatteringTable rotated_angular_table(const ScatteringTable &radial, int M) {
  if (M < 4) throw Error("angular table needs M >= 4");
  ScatteringTable t = radial;
  t.mode = TableMode::Angular;
  t.thetas = uniform_angles(M);
  t.samples.clear();
  t.failures.clear();
  for (double th : t.thetas)
    for (std::size_t j = 0; j < radial.alpha_count(); ++j)
      t.samples.push_back(rotate_sample(radial.at(0, j), th));
  return t;
}

struct S0Series {
  double sigma = 0.1;
  double rho = kTwoPi;
  double beta = 1.1;
  int N = 400;
  std::vector<double> thetas;
  std::vector<double> alphas;
  std::vector<std::vector<double>> values;  // values[k][j] at (thetas[k], alphas[j])

  double alpha_step() const { return beta / N; }
};

inline void validate_alpha_grid(const ScatteringTable &t) {
  if (t.N < 2) throw GridError("alpha grid needs N >= 2");
  if (t.samples.size() != t.theta_count() * t.alpha_count())
    throw GridError("sample count does not match the theta x alpha grid");
  const double h = t.alpha_step();
  for (std::size_t k = 0; k < t.theta_count(); ++k)
    for (std::size_t j = 0; j < t.alpha_count(); ++j) {
      const double expected = -t.beta + static_cast<double>(j) * h;
      if (std::abs(t.at(k, j).alpha - expected) > 1e-12 * std::max(1.0, t.beta))
        throw GridError("alpha grid is not uniform on [-beta, beta]");
    }
}

/// S0 = sigma (-sin t, cos t) . dS_x + (cos t, sin t) . (S_xi - sigma dS_xi), with
/// central differences and zero ghost values beyond |l| = N.
inline S0Series s0_series(const ScatteringTable &t, double sigma) {
  validate_alpha_grid(t);
  if (!t.failures.empty()) throw Error("s0_series: table contains failed samples");
  S0Series s;
  s.sigma = sigma;
  s.rho = t.rho;
  s.beta = t.beta;
  s.N = t.N;
  s.thetas = t.thetas;
  const std::size_t na = t.alpha_count();
  for (std::size_t j = 0; j < na; ++j) s.alphas.push_back(t.at(0, j).alpha);
  const double two_h = 2.0 * t.alpha_step();
  for (std::size_t k = 0; k < t.theta_count(); ++k) {
    const double th = t.thetas[k];
    const Vec2 dir{-std::sin(th), std::cos(th)}, across{std::cos(th), std::sin(th)};
    std::vector<double> row(na);
    for (std::size_t j = 0; j < na; ++j) {
      const PhaseState lo = j == 0 ? PhaseState{} : t.at(k, j - 1).as_phase();
      const PhaseState hi = j + 1 == na ? PhaseState{} : t.at(k, j + 1).as_phase();
      const PhaseState d = (1.0 / two_h) * (hi - lo);
      const ScatteringSample &c = t.at(k, j);
      row[j] = sigma * dot(dir, d.x) + dot(across, c.s_xi - sigma * d.xi);
    }
    s.values.push_back(std::move(row));
  }
  return s;
}

}  // namespace dipole
