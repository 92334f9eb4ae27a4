#pragma once

// Reduced dipole dynamics in the phase variables X = (x, xi): center of mass x
// and travel direction xi, with vortices at x + xi^perp and x - xi^perp.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "dipole/errors.hpp"
#include "dipole/ode.hpp"
#include "dipole/potential.hpp"
#include "dipole/vec2.hpp"

namespace dipole {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kCollisionTolerance = 1e-9;

/// Also used for phase-space differences and vector-field values.
struct PhaseState {
  Vec2 x;
  Vec2 xi;

  friend constexpr bool operator==(const PhaseState &, const PhaseState &) = default;

  constexpr State<4> to_array() const { return {x.x, x.y, xi.x, xi.y}; }
  static constexpr PhaseState from_array(const State<4> &a) {
    return {{a[0], a[1]}, {a[2], a[3]}};
  }
  /// Unordered vortex pair {x + xi^perp, x - xi^perp}.
  constexpr std::pair<Vec2, Vec2> vortices() const { return {x + perp(xi), x - perp(xi)}; }
};

constexpr PhaseState operator+(const PhaseState &a, const PhaseState &b) {
  return {a.x + b.x, a.xi + b.xi};
}
constexpr PhaseState operator-(const PhaseState &a, const PhaseState &b) {
  return {a.x - b.x, a.xi - b.xi};
}
constexpr PhaseState operator*(double s, const PhaseState &a) { return {s * a.x, s * a.xi}; }
inline double norm(const PhaseState &a) {
  return std::sqrt(norm2(a.x) + norm2(a.xi));
}

namespace detail {
inline void require_direction(const Vec2 &xi) {
  if (xi.x == 0.0 && xi.y == 0.0) throw SingularDirectionError("travel direction xi is zero");
}
}  // namespace detail

/// Free-flow velocity xi / (2 pi |xi|^2).
inline Vec2 free_velocity(const Vec2 &xi) {
  detail::require_direction(xi);
  return xi / (kTwoPi * norm2(xi));
}

/// free_velocity(xi0 + d) - free_velocity(xi0) without cancellation:
/// (d |xi0|^2 - xi0 (2 xi0.d + |d|^2)) / (2 pi |xi|^2 |xi0|^2).
inline Vec2 free_velocity_increment(const Vec2 &xi0, const Vec2 &d) {
  const Vec2 xi = xi0 + d;
  detail::require_direction(xi);
  const double n0 = norm2(xi0);
  return (n0 * d - (2.0 * dot(xi0, d) + norm2(d)) * xi0) / (kTwoPi * norm2(xi) * n0);
}

inline double hamiltonian(const PhaseState &X, const PotentialSpec &p) {
  detail::require_direction(X.xi);
  const auto [a, b] = X.vortices();
  return std::log(norm(X.xi)) / kTwoPi + 0.5 * (eval_Q(p, a) + eval_Q(p, b));
}

/// V - V_e: the part of the vector field contributed by the potential.
inline PhaseState potential_field(const PhaseState &X, const PotentialSpec &p) {
  const auto [a, b] = X.vortices();
  return {-0.5 * (grad_perp_Q(p, a) - grad_perp_Q(p, b)), -0.5 * (grad_Q(p, a) + grad_Q(p, b))};
}

/// Hamiltonian vector field (dH/dxi, -dH/dx).
inline PhaseState vector_field(const PhaseState &X, const PotentialSpec &p) {
  const PhaseState v = potential_field(X, p);
  return {free_velocity(X.xi) + v.x, v.xi};
}

inline PhaseState free_flow(double s, const PhaseState &X0) {
  return {X0.x + s * free_velocity(X0.xi), X0.xi};
}

/// 4x4 matrix as 2x2 blocks [[xx, xxi], [xix, xixi]].
struct JacobianBlock {
  Mat2 xx = Mat2::identity();
  Mat2 xxi = Mat2::zero();
  Mat2 xix = Mat2::zero();
  Mat2 xixi = Mat2::identity();

  PhaseState operator*(const PhaseState &v) const {
    return {xx * v.x + xxi * v.xi, xix * v.x + xixi * v.xi};
  }
  double entry(int row, int col) const {
    const Mat2 &m = row < 2 ? (col < 2 ? xx : xxi) : (col < 2 ? xix : xixi);
    const int r = row % 2, c = col % 2;
    return r == 0 ? (c == 0 ? m.a11 : m.a12) : (c == 0 ? m.a21 : m.a22);
  }
};

/// E(xi) = (1/2pi) (I/|xi|^2 - 2 xi xi^T / |xi|^4).
inline Mat2 free_flow_e_matrix(const Vec2 &xi) {
  detail::require_direction(xi);
  const double n2 = norm2(xi);
  return (1.0 / kTwoPi) * ((1.0 / n2) * Mat2::identity() - (2.0 / (n2 * n2)) * outer(xi, xi));
}

/// d X_e(s, X) / d X; depends on xi only.
inline JacobianBlock free_flow_jacobian(double s, const Vec2 &xi) {
  JacobianBlock J;
  J.xxi = s * free_flow_e_matrix(xi);
  return J;
}

/// Dipole orbit stored as the deviation from the free flow of its initial
/// state, X(s) = X_e(s, X0) + D(s). Where the potential gradient vanishes
/// along the whole orbit the deviation is exactly zero.
class Trajectory {
 public:
  Trajectory(PhaseState X0, DenseSolution<4> deviation)
      : X0_(X0), v0_(free_velocity(X0.xi)), dev_(std::move(deviation)) {}

  const PhaseState &initial_state() const { return X0_; }
  double final_time() const { return dev_.t_end(); }
  const std::vector<double> &times() const { return dev_.times(); }
  std::size_t size() const { return dev_.times().size(); }
  const DenseSolution<4> &dense_deviation() const { return dev_; }

  PhaseState deviation(double s) const { return PhaseState::from_array(dev_(s)); }
  PhaseState final_deviation() const { return PhaseState::from_array(dev_.final_state()); }

  PhaseState at(double s) const { return free_part(s) + deviation(s); }
  PhaseState node(std::size_t i) const {
    return free_part(dev_.times()[i]) + PhaseState::from_array(dev_.nodes()[i]);
  }
  PhaseState final_state() const { return node(size() - 1); }

 private:
  PhaseState free_part(double s) const { return {X0_.x + s * v0_, X0_.xi}; }

  PhaseState X0_;
  Vec2 v0_;
  DenseSolution<4> dev_;
};

/// Adaptive 5(4) solution of the dipole system on [0, T]. The step control
/// measures relative error against the physical state X, not the deviation.
inline Trajectory integrate(const PhaseState &X0, const PotentialSpec &p, double T,
                            const IntegratorConfig &cfg = {}) {
  detail::require_direction(X0.xi);
  if (!(T >= 0.0)) throw Error("integrate: T must be non-negative");
  const Vec2 v0 = free_velocity(X0.xi);
  auto physical = [&](double s, const State<4> &d) {
    return PhaseState{X0.x + s * v0 + Vec2{d[0], d[1]}, X0.xi + Vec2{d[2], d[3]}};
  };
  auto rhs = [&](double s, const State<4> &d) {
    const PhaseState X = physical(s, d);
    const PhaseState v = potential_field(X, p);
    return PhaseState{free_velocity_increment(X0.xi, {d[2], d[3]}) + v.x, v.xi}.to_array();
  };
  auto scale = [&](double s, const State<4> &d) { return physical(s, d).to_array(); };
  return Trajectory(X0, solve_dopri45<4>(rhs, 0.0, State<4>{}, T, cfg, scale));
}

namespace detail {
inline double exit_margin(const PhaseState &X, double radius) {
  const auto [a, b] = X.vortices();
  return std::min(norm(a), norm(b)) - radius;
}
}  // namespace detail

/// Last time at which either vortex lies in the closed ball of radius rho/2pi,
/// or 0 if neither vortex ever enters. Sign changes are searched on the dense
/// output and refined by bisection to 1e-10.
inline double exit_time(const Trajectory &traj, double rho, int samples_per_step = 16) {
  const double radius = rho / kTwoPi;
  const auto &ts = traj.times();
  if (detail::exit_margin(traj.final_state(), radius) <= 0.0)
    throw NotExitedError("a vortex is still inside the ball at the final time");

  double inside = -1.0, outside = 0.0;
  for (std::size_t i = ts.size() - 1; i-- > 0 && inside < 0.0;) {
    const double t0 = ts[i], t1 = ts[i + 1];
    double next = t1;
    for (int k = samples_per_step - 1; k >= 0; --k) {
      const double s = t0 + (t1 - t0) * k / samples_per_step;
      if (detail::exit_margin(traj.at(s), radius) <= 0.0) {
        inside = s;
        outside = next;
        break;
      }
      next = s;
    }
  }
  if (inside < 0.0) return 0.0;
  while (outside - inside > 1e-10) {
    const double mid = 0.5 * (inside + outside);
    if (detail::exit_margin(traj.at(mid), radius) <= 0.0)
      inside = mid;
    else
      outside = mid;
  }
  return 0.5 * (inside + outside);
}

/// Velocities of a +/- vortex pair.
inline std::pair<Vec2, Vec2> dipole_pair_rhs(const Vec2 &a_plus, const Vec2 &a_minus,
                                             const PotentialSpec &p) {
  const Vec2 d = a_plus - a_minus;
  const double d2 = norm2(d);
  if (std::sqrt(d2) < kCollisionTolerance) throw CollisionError("dipole vortices collided");
  const Vec2 inter = (1.0 / std::numbers::pi) * perp((1.0 / d2) * d);
  return {inter + grad_perp_Q(p, a_plus), inter - grad_perp_Q(p, a_minus)};
}

/// (x, xi) of a vortex pair: x = (a+ + a-)/2, xi = ((a+ - a-)/2)^perp.
inline PhaseState phase_from_pair(const Vec2 &a_plus, const Vec2 &a_minus) {
  return {0.5 * (a_plus + a_minus), perp(0.5 * (a_plus - a_minus))};
}

/// Point-vortex system pi d_j a_j' = grad^perp_{a_j} [W + pi sum Q0(a_k)],
/// W = -sum_{j<k} d_j d_k log|a_j - a_k|.
inline std::vector<Vec2> n_vortex_rhs(std::span<const Vec2> a, std::span<const int> d,
                                      const PotentialSpec &p) {
  if (a.size() != d.size()) throw Error("n_vortex_rhs: positions and degrees differ in length");
  for (int dj : d)
    if (dj != 1 && dj != -1) throw Error("n_vortex_rhs: degrees must be +1 or -1");
  std::vector<Vec2> v(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    Vec2 gw;  // grad_{a_j} W
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (k == j) continue;
      const Vec2 r = a[j] - a[k];
      const double r2 = norm2(r);
      if (std::sqrt(r2) < kCollisionTolerance) throw CollisionError("point vortices collided");
      gw += (-static_cast<double>(d[j] * d[k]) / r2) * r;
    }
    v[j] = (1.0 / (std::numbers::pi * d[j])) * perp(gw) + (1.0 / d[j]) * grad_perp_Q(p, a[j]);
  }
  return v;
}

}  // namespace dipole
