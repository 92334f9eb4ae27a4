#pragma once

// Numerical checks of the structural identities: the exact integral identity
// relating V - V_e along the perturbed orbit to X(tau) - X_e(tau), the
// second-order accuracy of its linearization about the free flow, energy
// conservation, and rotation/scaling covariance.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dipole/dynamics.hpp"
#include "dipole/quadrature.hpp"
#include "dipole/scattering.hpp"

namespace dipole {

inline constexpr double kResidualFloor = 1e-14;

struct IdentityReport {
  LaunchParams launch;
  double tau = 0.0;
  PhaseState lhs;
  PhaseState rhs;
  double residual = 0.0;
  double relative_residual = 0.0;
  std::size_t steps = 0;
};

/// Integrand of the exact identity at time s on a computed orbit.
inline PhaseState identity_integrand(const Trajectory &traj, const PotentialSpec &p, double tau,
                                     double s) {
  const PhaseState X = traj.at(s);
  return free_flow_jacobian(tau - s, X.xi) * potential_field(X, p);
}

enum class IdentityQuadrature {
  Coupled,     // LHS carried as four extra components of the adaptive solve
  DenseOutput  // Gauss-Legendre on the dense-output interpolant of each step
};

/// LHS: int_0^tau dX_e/dX(tau - s, X(s)) (V - V_e)(X(s)) ds. RHS: X(tau) - X_e(tau).
///
/// The coupled form integrates the LHS under the same error control as the
/// orbit, so the residual tracks the integrator tolerance. The dense-output
/// form is limited by the fourth-order interpolant once the step cap binds.
inline IdentityReport su_identity_residual(const PotentialSpec &p, double theta, double alpha,
                                           double sigma, double rho, double tau,
                                           const IntegratorConfig &cfg = {},
                                           IdentityQuadrature method = IdentityQuadrature::Coupled) {
  if (tau < free_exit_time(sigma, rho) * (1.0 - 1e-12))
    throw Error("su_identity_residual: tau must be at least 2 sigma rho");
  const PhaseState X0 = launch(theta, alpha, sigma, rho);
  IdentityReport rep;
  rep.launch = {theta, alpha, sigma, rho};
  rep.tau = tau;
  if (method == IdentityQuadrature::Coupled) {
    const Vec2 v0 = free_velocity(X0.xi);
    auto physical = [&](double s, const State<8> &d) {
      return PhaseState{X0.x + s * v0 + Vec2{d[0], d[1]}, X0.xi + Vec2{d[2], d[3]}};
    };
    auto rhs = [&](double s, const State<8> &d) {
      const PhaseState X = physical(s, d);
      const PhaseState v = potential_field(X, p);
      const PhaseState dev{free_velocity_increment(X0.xi, {d[2], d[3]}) + v.x, v.xi};
      const PhaseState lhs = free_flow_jacobian(tau - s, X.xi) * v;
      return State<8>{dev.x.x, dev.x.y, dev.xi.x, dev.xi.y, lhs.x.x, lhs.x.y, lhs.xi.x, lhs.xi.y};
    };
    auto scale = [&](double s, const State<8> &d) {
      const PhaseState X = physical(s, d);
      return State<8>{X.x.x, X.x.y, X.xi.x, X.xi.y, d[4], d[5], d[6], d[7]};
    };
    const auto sol = solve_dopri45<8>(rhs, 0.0, State<8>{}, tau, cfg, scale);
    const auto &y = sol.final_state();
    rep.rhs = {{y[0], y[1]}, {y[2], y[3]}};
    rep.lhs = {{y[4], y[5]}, {y[6], y[7]}};
    rep.steps = sol.step_count();
  } else {
    const Trajectory traj = integrate(X0, p, tau, cfg);
    rep.steps = traj.dense_deviation().step_count();
    for (const auto &seg : traj.dense_deviation().segments())
      rep.lhs = rep.lhs + GaussLegendre8::integrate(
                              [&](double s) { return identity_integrand(traj, p, tau, s); },
                              seg.t0, seg.t0 + seg.h, PhaseState{});
    rep.rhs = traj.final_deviation();
  }
  rep.residual = norm(rep.lhs - rep.rhs);
  rep.relative_residual = rep.residual / std::max(norm(rep.rhs), kResidualFloor);
  return rep;
}

struct LinearizationPoint {
  double eps = 0.0;
  double err = 0.0;
  double scattering_norm = 0.0;
};

/// First-order prediction of S: the identity integrand evaluated on the free
/// flow with the Jacobian frozen at xi0.
inline PhaseState linearized_scattering(const PotentialSpec &p, const PhaseState &X0, double tau,
                                        double tol = 1e-15) {
  const JacobianBlock base = free_flow_jacobian(1.0, X0.xi);
  auto f = [&](double s) {
    const PhaseState Xe = free_flow(s, X0);
    JacobianBlock J;
    J.xxi = (tau - s) * base.xxi;
    return (J * potential_field(Xe, p)).to_array();
  };
  return PhaseState::from_array(adaptive_simpson<4>(f, 0.0, tau, tol, 128));
}

/// err(eps) = |linearized prediction - S_eps| for each member of the family.
inline std::vector<LinearizationPoint> linearization_order(
    const std::function<PotentialSpec(double)> &family, double theta, double alpha, double sigma,
    double rho, double tau, const IntegratorConfig &cfg, const std::vector<double> &eps_list) {
  std::vector<LinearizationPoint> out;
  const PhaseState X0 = launch(theta, alpha, sigma, rho);
  for (double eps : eps_list) {
    const PotentialSpec p = family(eps);
    const ScatteringSample s = scattering_sample(theta, alpha, sigma, rho, p, tau, cfg);
    const PhaseState lin = linearized_scattering(p, X0, tau);
    out.push_back({eps, norm(lin - s.as_phase()), norm(s.as_phase())});
  }
  return out;
}

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of log err = intercept + slope log eps.
inline PowerLawFit fit_power_law(const std::vector<LinearizationPoint> &pts) {
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto &p : pts) {
    const double x = std::log(p.eps), y = std::log(p.err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  PowerLawFit fit;
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  fit.slope = cxy / vx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return fit;
}

/// max |H(X(s)) - H(X(0))| over the accepted steps and `samples` uniform
/// dense-output points.
inline double conservation_report(const Trajectory &traj, const PotentialSpec &p,
                                  std::size_t samples = 2000) {
  const double h0 = hamiltonian(traj.initial_state(), p);
  double drift = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    drift = std::max(drift, std::abs(hamiltonian(traj.node(i), p) - h0));
  const double T = traj.final_time();
  for (std::size_t k = 0; k <= samples; ++k) {
    const double s = T * static_cast<double>(k) / static_cast<double>(samples);
    drift = std::max(drift, std::abs(hamiltonian(traj.at(s), p) - h0));
  }
  return drift;
}

/// max over the table of |S(theta, alpha) - R_theta S(0, alpha)|; the table's
/// first row must be theta = 0.
inline double rotation_residual(const ScatteringTable &t) {
  if (t.thetas.empty() || t.thetas.front() != 0.0)
    throw GridError("rotation_residual needs a theta = 0 row");
  double m = 0.0;
  for (std::size_t k = 0; k < t.theta_count(); ++k)
    for (std::size_t j = 0; j < t.alpha_count(); ++j) {
      const ScatteringSample r = rotate_sample(t.at(0, j), t.thetas[k]);
      m = std::max(m, norm(t.at(k, j).as_phase() - r.as_phase()));
    }
  return m;
}

/// |X~(c^2 T) - c X(T)| where X~ is the orbit launched from (c sigma, c rho,
/// c alpha) in the potential y -> Q0(y / c).
inline double scaling_residual(const PotentialSpec &p, double theta, double alpha, double sigma,
                               double rho, double c, double T, const IntegratorConfig &cfg = {}) {
  const Trajectory base = integrate(launch(theta, alpha, sigma, rho), p, T, cfg);
  const Trajectory big =
      integrate(launch(theta, c * alpha, c * sigma, c * rho), dilated(p, c), c * c * T, cfg);
  return norm(big.final_state() - c * base.final_state());
}

struct CovarianceReport {
  double rotation = 0.0;
  double scaling = 0.0;
};

inline CovarianceReport covariance_report(const PotentialSpec &p, const ScatteringTable &table,
                                          const IntegratorConfig &cfg = {}, double c = 2.0,
                                          double alpha = 0.2) {
  if (!is_radial(p)) throw Error("covariance_report: potential is not radially symmetric");
  CovarianceReport rep;
  rep.rotation = rotation_residual(table);
  rep.scaling = scaling_residual(p, 0.0, alpha, table.sigma, table.rho, c, table.tau, cfg);
  return rep;
}

}  // namespace dipole
