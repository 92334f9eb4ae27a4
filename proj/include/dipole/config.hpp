#pragma once

// Run configuration read from INI-style text with sectioned keys, e.g.
//
//   [potential]
//   kind = compact_polynomial
//   epsilon = 0.01
//
// Every key is optional; omitted keys take the reference experiment values.
// Unknown sections or keys are rejected so that typos cannot silently fall
// back to defaults.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dipole/errors.hpp"
#include "dipole/ode.hpp"
#include "dipole/potential.hpp"
#include "dipole/reconstruction.hpp"
#include "dipole/scattering.hpp"

namespace dipole {

struct PotentialConfig {
  std::string kind = "compact_polynomial";
  double epsilon = 0.01;
  double omega = 0.5;
  double kappa = 8.0;
  double exponent = 10.0;  // gaussian: Q0 = eps exp(-exponent |x|^2 / R^2), R the ball radius
  double value = 0.0;      // constant
  std::vector<GaussianBump> bumps;
  double q = 0.0;
};

struct SimulateConfig {
  Vec2 a_plus{-3.0, 0.5};
  Vec2 a_minus{-3.0, 0.0};
  double T = 10.0;
  int samples = 2001;
};

struct VerifyConfig {
  int launches = 20;
  std::vector<double> eps_list{0.02, 0.01, 0.005};
  double theta = 0.0;
  double alpha = 0.2;
  int angles = 8;
  double scale = 2.0;
  double su_bound = 1e-6;
  double su_shrink = 5.0;
  double energy_bound = 1e-9;
  double covariance_bound = 1e-8;
  double slope_tolerance = 0.3;
};

struct RunConfig {
  PotentialConfig potential;
  double sigma = 0.1;
  double ball_radius = 1.0;  // rho / 2pi
  int N = 400;
  int M = 8;
  std::string mode = "radial";
  std::optional<double> tau;
  double r_min = 0.0;
  std::optional<double> r_max;
  int r_count = 201;
  int rays = 4;  // evaluation rays for the general (angular) formula
  IntegratorConfig ode;
  SimulateConfig simulate;
  VerifyConfig verify;
  std::vector<double> eps_ladder{0.04, 0.02, 0.01, 0.005, 0.0025};
  std::string out = "out";
  unsigned threads = 0;
  std::uint64_t seed = 20140101;

  double rho() const { return kTwoPi * ball_radius; }
  double beta() const { return impact_bound(sigma, rho()); }
  double tau_value() const { return tau ? *tau : free_exit_time(sigma, rho()); }
  std::vector<double> radii() const {
    return uniform_radii(r_min, r_max ? *r_max : beta() + sigma + 0.1, static_cast<std::size_t>(r_count));
  }
};

/// The configured potential with strength eps (kind-specific; ignored by zero/constant).
inline PotentialSpec make_potential(const PotentialConfig &c, double eps, double ball_radius) {
  PotentialSpec p;
  if (c.kind == "zero")
    p = PotentialSpec::zero();
  else if (c.kind == "constant")
    p = PotentialSpec::constant(c.value);
  else if (c.kind == "compact_polynomial")
    p = PotentialSpec::compact_polynomial(eps, c.omega, c.kappa);
  else if (c.kind == "gaussian")
    p = PotentialSpec::gaussian(eps, c.exponent / (ball_radius * ball_radius));
  else if (c.kind == "gaussian_sum")
    p = PotentialSpec::gaussian_sum(c.bumps);
  else
    throw ConfigError("unknown potential kind '" + c.kind + "'");
  p.offset = c.q;
  validate(p);
  return p;
}

inline PotentialSpec make_potential(const RunConfig &c) {
  return make_potential(c.potential, c.potential.epsilon, c.ball_radius);
}

namespace detail {

inline std::vector<double> parse_list(const std::string &s, const std::string &key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    try {
      out.push_back(std::stod(item, &pos));
    } catch (const std::exception &) {
      throw ConfigError(key + ": cannot parse number '" + item + "'");
    }
    if (item.find_first_not_of(" \t", pos) != std::string::npos)
      throw ConfigError(key + ": trailing characters in '" + item + "'");
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const boost::property_tree::ptree &t) : tree_(t) {}

  template <class T>
  void get(const std::string &key, T &dst) {
    seen_.insert(key);
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return;
    try {
      dst = boost::lexical_cast<T>(trim(*v));
    } catch (const boost::bad_lexical_cast &) {
      throw ConfigError("invalid value for '" + key + "': '" + *v + "'");
    }
  }
  void get(const std::string &key, std::string &dst) {
    seen_.insert(key);
    if (const auto v = tree_.get_optional<std::string>(key)) dst = trim(*v);
  }
  void get(const std::string &key, std::optional<double> &dst) {
    double v = 0.0;
    if (has(key)) {
      get(key, v);
      dst = v;
    } else {
      seen_.insert(key);
    }
  }
  void get(const std::string &key, Vec2 &dst) {
    seen_.insert(key);
    if (const auto v = tree_.get_optional<std::string>(key)) {
      const auto xs = parse_list(*v, key);
      if (xs.size() != 2) throw ConfigError(key + ": expected two comma-separated numbers");
      dst = {xs[0], xs[1]};
    }
  }
  void get(const std::string &key, std::vector<double> &dst) {
    seen_.insert(key);
    if (const auto v = tree_.get_optional<std::string>(key)) dst = parse_list(*v, key);
  }
  void get(const std::string &key, std::vector<GaussianBump> &dst) {
    seen_.insert(key);
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return;
    dst.clear();
    std::stringstream ss(*v);
    std::string bump;
    while (std::getline(ss, bump, ';')) {
      const auto xs = parse_list(bump, key);
      if (xs.size() != 4) throw ConfigError(key + ": each bump is 'strength,cx,cy,exponent'");
      dst.push_back({xs[0], {xs[1], xs[2]}, xs[3]});
    }
  }
  bool has(const std::string &key) const { return tree_.get_optional<std::string>(key).has_value(); }

  void reject_unknown() const {
    for (const auto &[section, body] : tree_) {
      if (body.empty()) throw ConfigError("key '" + section + "' must be inside a [section]");
      for (const auto &[key, _] : body) {
        const std::string full = section + "." + key;
        if (!seen_.count(full)) throw ConfigError("unknown configuration key '" + full + "'");
      }
    }
  }

 private:
  static std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\"");
    const auto e = s.find_last_not_of(" \t\"");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  const boost::property_tree::ptree &tree_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline void validate(const RunConfig &c) {
  if (!(c.sigma > 0.0)) throw ConfigError("geometry.sigma must be positive");
  if (!(c.ball_radius > 0.0)) throw ConfigError("geometry.ball_radius must be positive");
  if (c.N < 2) throw ConfigError("scatter.N must be at least 2");
  if (c.M < 4) throw ConfigError("scatter.M must be at least 4");
  if (c.mode != "radial" && c.mode != "angular") throw ConfigError("scatter.mode must be radial or angular");
  if (c.tau && *c.tau < free_exit_time(c.sigma, c.rho()) * (1.0 - 1e-12))
    throw ConfigError("scatter.tau must be at least 2 sigma rho");
  if (c.r_count < 2 || c.r_min < 0.0) throw ConfigError("reconstruct.r_count >= 2 and r_min >= 0 required");
  if (c.rays < 1) throw ConfigError("reconstruct.rays must be positive");
  if (c.r_max && !(*c.r_max > c.r_min)) throw ConfigError("reconstruct.r_max must exceed r_min");
  c.ode.validate();
  if (!(c.simulate.T > 0.0) || c.simulate.samples < 2) throw ConfigError("simulate.T > 0 and samples >= 2 required");
  if (c.verify.launches < 1) throw ConfigError("verify.launches must be positive");
  if (c.verify.eps_list.size() < 2) throw ConfigError("verify.eps_list needs at least two values");
  for (double e : c.verify.eps_list)
    if (!(e > 0.0)) throw ConfigError("verify.eps_list entries must be positive");
  for (double e : c.eps_ladder)
    if (!(e > 0.0)) throw ConfigError("figures.eps_ladder entries must be positive");
  if (c.verify.angles < 4) throw ConfigError("verify.angles must be at least 4");
  if (!(c.verify.scale > 0.0)) throw ConfigError("verify.scale must be positive");
  const auto &p = c.potential;
  if (!(p.omega > 0.0) || p.kappa < 0.0 || !(p.exponent > 0.0) || p.epsilon < 0.0)
    throw ConfigError("potential parameters need omega > 0, kappa >= 0, exponent > 0, epsilon >= 0");
  make_potential(c);
}

inline RunConfig parse_config(const std::string &text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw ConfigError(std::string("configuration syntax error: ") + e.what());
  }
  RunConfig c;
  detail::Reader r(tree);
  r.get("potential.kind", c.potential.kind);
  r.get("potential.epsilon", c.potential.epsilon);
  r.get("potential.omega", c.potential.omega);
  r.get("potential.kappa", c.potential.kappa);
  r.get("potential.exponent", c.potential.exponent);
  r.get("potential.value", c.potential.value);
  r.get("potential.bumps", c.potential.bumps);
  r.get("potential.q", c.potential.q);
  r.get("geometry.sigma", c.sigma);
  r.get("geometry.ball_radius", c.ball_radius);
  r.get("scatter.N", c.N);
  r.get("scatter.M", c.M);
  r.get("scatter.mode", c.mode);
  r.get("scatter.tau", c.tau);
  r.get("reconstruct.r_min", c.r_min);
  r.get("reconstruct.r_max", c.r_max);
  r.get("reconstruct.r_count", c.r_count);
  r.get("reconstruct.rays", c.rays);
  r.get("ode.rel_tol", c.ode.rel_tol);
  r.get("ode.abs_tol", c.ode.abs_tol);
  r.get("ode.max_step", c.ode.max_step);
  r.get("ode.initial_step", c.ode.initial_step);
  r.get("ode.max_steps", c.ode.max_steps);
  r.get("simulate.a_plus", c.simulate.a_plus);
  r.get("simulate.a_minus", c.simulate.a_minus);
  r.get("simulate.T", c.simulate.T);
  r.get("simulate.samples", c.simulate.samples);
  r.get("verify.launches", c.verify.launches);
  r.get("verify.eps_list", c.verify.eps_list);
  r.get("verify.theta", c.verify.theta);
  r.get("verify.alpha", c.verify.alpha);
  r.get("verify.angles", c.verify.angles);
  r.get("verify.scale", c.verify.scale);
  r.get("verify.su_bound", c.verify.su_bound);
  r.get("verify.su_shrink", c.verify.su_shrink);
  r.get("verify.energy_bound", c.verify.energy_bound);
  r.get("verify.covariance_bound", c.verify.covariance_bound);
  r.get("verify.slope_tolerance", c.verify.slope_tolerance);
  r.get("figures.eps_ladder", c.eps_ladder);
  r.get("run.out", c.out);
  r.get("run.threads", c.threads);
  r.get("run.seed", c.seed);
  r.reject_unknown();
  validate(c);
  return c;
}

/// Canonical key = value listing of every field, used to record provenance.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig &c) {
  auto num = [](double v) { return detail::num(v); };
  auto list = [&](const std::vector<double> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
    return s;
  };
  std::string bumps;
  for (std::size_t i = 0; i < c.potential.bumps.size(); ++i) {
    const auto &b = c.potential.bumps[i];
    bumps += (i ? ";" : "") + num(b.strength) + "," + num(b.center.x) + "," + num(b.center.y) + "," + num(b.exponent);
  }
  return {
      {"potential.kind", c.potential.kind},
      {"potential.epsilon", num(c.potential.epsilon)},
      {"potential.omega", num(c.potential.omega)},
      {"potential.kappa", num(c.potential.kappa)},
      {"potential.exponent", num(c.potential.exponent)},
      {"potential.value", num(c.potential.value)},
      {"potential.bumps", bumps},
      {"potential.q", num(c.potential.q)},
      {"geometry.sigma", num(c.sigma)},
      {"geometry.ball_radius", num(c.ball_radius)},
      {"scatter.N", std::to_string(c.N)},
      {"scatter.M", std::to_string(c.M)},
      {"scatter.mode", c.mode},
      {"scatter.tau", num(c.tau_value())},
      {"reconstruct.r_min", num(c.r_min)},
      {"reconstruct.r_max", num(c.r_max ? *c.r_max : c.beta() + c.sigma + 0.1)},
      {"reconstruct.r_count", std::to_string(c.r_count)},
      {"reconstruct.rays", std::to_string(c.rays)},
      {"ode.rel_tol", num(c.ode.rel_tol)},
      {"ode.abs_tol", num(c.ode.abs_tol)},
      {"ode.max_step", num(c.ode.max_step)},
      {"ode.initial_step", num(c.ode.initial_step)},
      {"ode.max_steps", std::to_string(c.ode.max_steps)},
      {"run.seed", std::to_string(c.seed)},
      {"figures.eps_ladder", list(c.eps_ladder)},
  };
}

}  // namespace dipole
