#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dipole/errors.hpp"

namespace dipole {

/// Composite Simpson weights for n equally spaced nodes (n odd, n >= 3).
inline std::vector<double> simpson_weights(std::size_t n, double h) {
  if (n < 3 || n % 2 == 0) throw GridError("composite Simpson needs an odd node count >= 3");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  for (auto &x : w) x *= h / 3.0;
  return w;
}

inline double composite_simpson(std::span<const double> f, double h) {
  const auto w = simpson_weights(f.size(), h);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
  return s;
}

/// 8-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre8 {
  static constexpr std::array<double, 8> nodes = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
      0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> weights = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
      0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

  /// Integral of f over [a, b]; V must support V + V and double * V.
  template <class V, class F>
  static V integrate(F &&f, double a, double b, V zero) {
    const double m = 0.5 * (a + b), r = 0.5 * (b - a);
    V acc = zero;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc = acc + (r * weights[i]) * f(m + r * nodes[i]);
    return acc;
  }
};

namespace detail {
template <std::size_t D, class F>
void adaptive_simpson_rec(F &f, double a, double b, const std::array<double, D> &fa,
                          const std::array<double, D> &fm, const std::array<double, D> &fb,
                          const std::array<double, D> &whole, double tol, int depth,
                          std::array<double, D> &out) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const auto flm = f(lm), frm = f(rm);
  std::array<double, D> left{}, right{};
  double err = 0.0;
  for (std::size_t i = 0; i < D; ++i) {
    left[i] = (m - a) / 6.0 * (fa[i] + 4.0 * flm[i] + fm[i]);
    right[i] = (b - m) / 6.0 * (fm[i] + 4.0 * frm[i] + fb[i]);
    err = std::max(err, std::abs(left[i] + right[i] - whole[i]));
  }
  if (depth <= 0 || err <= 15.0 * tol) {
    for (std::size_t i = 0; i < D; ++i) out[i] += left[i] + right[i] + (left[i] + right[i] - whole[i]) / 15.0;
    return;
  }
  adaptive_simpson_rec<D>(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
  adaptive_simpson_rec<D>(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}
}  // namespace detail

/// Adaptive Simpson for vector-valued integrands, started from `panels`
/// uniform panels so that narrow features are not stepped over.
template <std::size_t D, class F>
std::array<double, D> adaptive_simpson(F &&f, double a, double b, double tol, int panels = 64,
                                       int max_depth = 40) {
  std::array<double, D> out{};
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double x0 = a + k * h, x1 = (k + 1 == panels) ? b : a + (k + 1) * h;
    const double xm = 0.5 * (x0 + x1);
    const auto f0 = f(x0), fm = f(xm), f1 = f(x1);
    std::array<double, D> whole{};
    for (std::size_t i = 0; i < D; ++i) whole[i] = (x1 - x0) / 6.0 * (f0[i] + 4.0 * fm[i] + f1[i]);
    detail::adaptive_simpson_rec<D>(f, x0, x1, f0, fm, f1, whole, tol / panels, max_depth, out);
  }
  return out;
}

}  // namespace dipole
