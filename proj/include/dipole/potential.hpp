#pragma once

// Analytic background potentials Q0 with exact gradients.

#include <cmath>
#include <cstdio>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "dipole/errors.hpp"
#include "dipole/vec2.hpp"

namespace dipole {

struct ZeroPotential {};

struct ConstantPotential {
  double value = 0.0;
};

/// strength * (1 - |x|^2/radius^2)^(smoothness+1) on |x| <= radius, zero outside.
struct CompactPolynomial {
  double strength = 0.0;
  double support_radius = 0.5;
  double smoothness = 8.0;
};

/// strength * exp(-exponent * |x|^2); exponent is the full coefficient of |x|^2.
struct Gaussian {
  double strength = 0.0;
  double exponent = 10.0;
};

struct GaussianBump {
  double strength = 0.0;
  Vec2 center;
  double exponent = 1.0;
};

struct GaussianSum {
  std::vector<GaussianBump> bumps;
};

using PotentialShape =
    std::variant<ZeroPotential, ConstantPotential, CompactPolynomial, Gaussian, GaussianSum>;

/// Q0(x) = offset + shape(x). The far-field value is offset (plus the
/// constant for ConstantPotential).
struct PotentialSpec {
  PotentialShape shape = ZeroPotential{};
  double offset = 0.0;

  static PotentialSpec zero() { return {}; }
  static PotentialSpec constant(double q) { return {ConstantPotential{q}, 0.0}; }
  static PotentialSpec compact_polynomial(double strength, double radius, double smoothness,
                                          double q = 0.0) {
    return {CompactPolynomial{strength, radius, smoothness}, q};
  }
  static PotentialSpec gaussian(double strength, double exponent, double q = 0.0) {
    return {Gaussian{strength, exponent}, q};
  }
  static PotentialSpec gaussian_sum(std::vector<GaussianBump> bumps, double q = 0.0) {
    return {GaussianSum{std::move(bumps)}, q};
  }
};

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace detail

inline void validate(const PotentialSpec &p) {
  std::visit(detail::overloaded{
                 [](const ZeroPotential &) {},
                 [](const ConstantPotential &) {},
                 [](const CompactPolynomial &c) {
                   if (!(c.strength >= 0.0) || !(c.support_radius > 0.0) || !(c.smoothness >= 0.0))
                     throw ConfigError("compact_polynomial needs strength >= 0, radius > 0, "
                                       "smoothness >= 0");
                 },
                 [](const Gaussian &g) {
                   if (!(g.strength >= 0.0) || !(g.exponent > 0.0))
                     throw ConfigError("gaussian needs strength >= 0, exponent > 0");
                 },
                 [](const GaussianSum &s) {
                   for (const auto &b : s.bumps)
                     if (!(b.exponent > 0.0)) throw ConfigError("gaussian bump exponent must be > 0");
                 },
             },
             p.shape);
}

inline double eval_Q(const PotentialSpec &p, const Vec2 &x) {
  const double shape = std::visit(
      detail::overloaded{
          [](const ZeroPotential &) { return 0.0; },
          [](const ConstantPotential &c) { return c.value; },
          [&](const CompactPolynomial &c) {
            const double t = norm2(x) / (c.support_radius * c.support_radius);
            if (t >= 1.0) return 0.0;
            return c.strength * std::pow(1.0 - t, c.smoothness + 1.0);
          },
          [&](const Gaussian &g) { return g.strength * std::exp(-g.exponent * norm2(x)); },
          [&](const GaussianSum &s) {
            double v = 0.0;
            for (const auto &b : s.bumps) v += b.strength * std::exp(-b.exponent * norm2(x - b.center));
            return v;
          },
      },
      p.shape);
  return p.offset + shape;
}

/// Analytic gradient of Q0. For the compact polynomial the interior formula is
/// used on the closed ball, so a cusp (smoothness 0) returns its one-sided
/// interior value at |x| = radius.
inline Vec2 grad_Q(const PotentialSpec &p, const Vec2 &x) {
  return std::visit(
      detail::overloaded{
          [](const ZeroPotential &) { return Vec2{}; },
          [](const ConstantPotential &) { return Vec2{}; },
          [&](const CompactPolynomial &c) {
            const double w2 = c.support_radius * c.support_radius;
            const double t = norm2(x) / w2;
            if (t > 1.0) return Vec2{};
            const double f = -2.0 * c.strength * (c.smoothness + 1.0) *
                             std::pow(1.0 - t, c.smoothness) / w2;
            return f * x;
          },
          [&](const Gaussian &g) {
            return (-2.0 * g.exponent * g.strength * std::exp(-g.exponent * norm2(x))) * x;
          },
          [&](const GaussianSum &s) {
            Vec2 v;
            for (const auto &b : s.bumps) {
              const Vec2 d = x - b.center;
              v += (-2.0 * b.exponent * b.strength * std::exp(-b.exponent * norm2(d))) * d;
            }
            return v;
          },
      },
      p.shape);
}

/// (d2 Q0, -d1 Q0).
inline Vec2 grad_perp_Q(const PotentialSpec &p, const Vec2 &x) { return perp(grad_Q(p, x)); }

inline double far_field_value(const PotentialSpec &p) {
  if (const auto *c = std::get_if<ConstantPotential>(&p.shape)) return p.offset + c->value;
  return p.offset;
}

/// True when Q0 depends on |x| only.
inline bool is_radial(const PotentialSpec &p) {
  if (const auto *s = std::get_if<GaussianSum>(&p.shape)) {
    for (const auto &b : s->bumps)
      if (b.center != Vec2{}) return false;
  }
  return true;
}

/// Multiplies the non-constant part by k; the offset is untouched.
inline PotentialSpec scaled(const PotentialSpec &p, double k) {
  PotentialSpec out = p;
  std::visit(detail::overloaded{
                 [](ZeroPotential &) {},
                 [](ConstantPotential &) {},
                 [&](CompactPolynomial &c) { c.strength *= k; },
                 [&](Gaussian &g) { g.strength *= k; },
                 [&](GaussianSum &s) {
                   for (auto &b : s.bumps) b.strength *= k;
                 },
             },
             out.shape);
  return out;
}

/// Returns the spec of y -> Q0(y / c).
inline PotentialSpec dilated(const PotentialSpec &p, double c) {
  PotentialSpec out = p;
  std::visit(detail::overloaded{
                 [](ZeroPotential &) {},
                 [](ConstantPotential &) {},
                 [&](CompactPolynomial &cp) { cp.support_radius *= c; },
                 [&](Gaussian &g) { g.exponent /= c * c; },
                 [&](GaussianSum &s) {
                   for (auto &b : s.bumps) {
                     b.center *= c;
                     b.exponent /= c * c;
                   }
                 },
             },
             out.shape);
  return out;
}

namespace detail {
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// Canonical one-line text form, used in file metadata and for consistency checks.
inline std::string describe(const PotentialSpec &p) {
  using detail::num;
  std::string s = std::visit(
      detail::overloaded{
          [](const ZeroPotential &) { return std::string("zero"); },
          [](const ConstantPotential &c) { return "constant value=" + num(c.value); },
          [](const CompactPolynomial &c) {
            return "compact_polynomial strength=" + num(c.strength) +
                   " support_radius=" + num(c.support_radius) + " smoothness=" + num(c.smoothness);
          },
          [](const Gaussian &g) {
            return "gaussian strength=" + num(g.strength) + " exponent=" + num(g.exponent);
          },
          [](const GaussianSum &gs) {
            std::string out = "gaussian_sum bumps=";
            for (std::size_t i = 0; i < gs.bumps.size(); ++i) {
              const auto &b = gs.bumps[i];
              if (i) out += ';';
              out += num(b.strength) + "," + num(b.center.x) + "," + num(b.center.y) + "," +
                     num(b.exponent);
            }
            return out;
          },
      },
      p.shape);
  return s + " q=" + num(p.offset);
}

}  // namespace dipole
