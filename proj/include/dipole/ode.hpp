#pragma once

// Dormand-Prince 5(4) with the standard fourth-order continuous extension.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dipole/errors.hpp"

namespace dipole {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 1e-2;
  double initial_step = 1e-3;
  std::size_t max_steps = 2'000'000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step > 0.0) || !(initial_step > 0.0))
      throw ConfigError("integrator tolerances and step sizes must be strictly positive");
  }
  /// Both tolerances multiplied by k.
  IntegratorConfig tightened(double k) const {
    IntegratorConfig c = *this;
    c.rel_tol *= k;
    c.abs_tol *= k;
    return c;
  }
};

template <std::size_t D>
using State = std::array<double, D>;

namespace rk45 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace rk45

/// Accepted steps of an integration plus the interpolant on each step.
template <std::size_t D>
class DenseSolution {
 public:
  struct Segment {
    double t0 = 0.0;
    double h = 0.0;
    std::array<State<D>, 5> coeff{};
  };

  DenseSolution(double t0, const State<D> &y0) : times_{t0}, nodes_{y0} {}

  const std::vector<double> &times() const { return times_; }
  const std::vector<State<D>> &nodes() const { return nodes_; }
  const std::vector<Segment> &segments() const { return segments_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const State<D> &final_state() const { return nodes_.back(); }
  std::size_t step_count() const { return segments_.size(); }

  /// Interpolated state; t is clamped to [t_begin, t_end].
  State<D> operator()(double t) const {
    if (segments_.empty() || t <= times_.front()) return nodes_.front();
    if (t >= times_.back()) return nodes_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
    return evaluate(segments_[i], t);
  }

  static State<D> evaluate(const Segment &s, double t) {
    const double th = (t - s.t0) / s.h;
    const double th1 = 1.0 - th;
    State<D> y;
    const auto &r = s.coeff;
    for (std::size_t i = 0; i < D; ++i)
      y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
    return y;
  }

  void push(Segment seg, double t1, const State<D> &y1) {
    segments_.push_back(std::move(seg));
    times_.push_back(t1);
    nodes_.push_back(y1);
  }

 private:
  std::vector<double> times_;
  std::vector<State<D>> nodes_;
  std::vector<Segment> segments_;
};

struct IdentityScale {
  template <class Y>
  const Y &operator()(double, const Y &y) const {
    return y;
  }
};

/// Integrates y' = f(t, y) from t0 to t1 >= t0. `scale(t, y)` maps a state to
/// the magnitudes used by the relative tolerance; callers integrating in a
/// moving frame pass the magnitude of the physical state here.
template <std::size_t D, class Rhs, class Scale = IdentityScale>
DenseSolution<D> solve_dopri45(Rhs &&f, double t0, const State<D> &y0, double t1,
                               const IntegratorConfig &cfg, Scale &&scale = {}) {
  using namespace rk45;
  cfg.validate();
  if (!(t1 >= t0)) throw Error("solve_dopri45: t1 must not precede t0");

  DenseSolution<D> sol(t0, y0);
  if (t1 == t0) return sol;

  auto axpy = [](State<D> y, double h, std::initializer_list<std::pair<double, const State<D> *>> terms) {
    for (std::size_t i = 0; i < D; ++i) {
      double acc = 0.0;
      for (const auto &[c, k] : terms) acc += c * (*k)[i];
      y[i] += h * acc;
    }
    return y;
  };

  double t = t0;
  State<D> y = y0;
  State<D> k1 = f(t, y);
  double h = std::min({cfg.initial_step, cfg.max_step, t1 - t0});
  bool last_rejected = false;
  std::size_t steps = 0;

  while (t < t1) {
    if (++steps > cfg.max_steps) throw StepFailureError("step budget exhausted at t=" + std::to_string(t));
    bool final_step = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      final_step = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw StepFailureError("step size underflow at t=" + std::to_string(t));

    const State<D> k2 = f(t + c2 * h, axpy(y, h, {{a21, &k1}}));
    const State<D> k3 = f(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const State<D> k4 = f(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<D> k5 = f(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<D> k6 =
        f(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<D> y_new =
        axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const double t_new = final_step ? t1 : t + h;
    const State<D> k7 = f(t_new, y_new);

    const auto &sy = scale(t, y);
    const auto &sn = scale(t_new, y_new);
    double err = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(sy[i]), std::abs(sn[i]));
      err += (e / sk) * (e / sk);
    }
    err = std::sqrt(err / static_cast<double>(D));

    if (!std::isfinite(err)) {
      h *= 0.2;
      last_rejected = true;
      continue;
    }

    if (err <= 1.0) {
      typename DenseSolution<D>::Segment seg;
      seg.t0 = t;
      seg.h = t_new - t;
      for (std::size_t i = 0; i < D; ++i) {
        const double ydiff = y_new[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        seg.coeff[0][i] = y[i];
        seg.coeff[1][i] = ydiff;
        seg.coeff[2][i] = bspl;
        seg.coeff[3][i] = ydiff - h * k7[i] - bspl;
        seg.coeff[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      sol.push(std::move(seg), t_new, y_new);
      t = t_new;
      y = y_new;
      k1 = k7;
      double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = std::min(h * fac, cfg.max_step);
      last_rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected = true;
    }
  }
  return sol;
}

}  // namespace dipole
