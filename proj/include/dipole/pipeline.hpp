#pragma once

// Command implementations behind the CLI verbs. Each command reads a validated
// RunConfig, writes its files into an output directory and prints a short
// report. Return values are process exit codes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "dipole/config.hpp"
#include "dipole/dynamics.hpp"
#include "dipole/io.hpp"
#include "dipole/reconstruction.hpp"
#include "dipole/scattering.hpp"
#include "dipole/verification.hpp"

namespace dipole {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kCheckFailure = 2 };

inline std::string output_path(const std::string &dir, const std::string &name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

// ---------------------------------------------------------------------------
// simulate

struct PairSimulation {
  TrajectoryColumns columns;
  double energy_drift = 0.0;
  double transverse_displacement = 0.0;
  std::size_t steps = 0;
};

/// Integrates the raw vortex pair on [0, T] and samples it at `samples`
/// uniform times. Energy is the reduced Hamiltonian of (x, xi).
inline PairSimulation simulate_pair(const PotentialSpec &p, const Vec2 &a_plus, const Vec2 &a_minus,
                                    double T, int samples, const IntegratorConfig &cfg = {}) {
  auto rhs = [&](double, const State<4> &y) {
    const auto [vp, vm] = dipole_pair_rhs({y[0], y[1]}, {y[2], y[3]}, p);
    return State<4>{vp.x, vp.y, vm.x, vm.y};
  };
  const auto sol = solve_dopri45<4>(rhs, 0.0, State<4>{a_plus.x, a_plus.y, a_minus.x, a_minus.y}, T, cfg);
  auto phase = [](const State<4> &y) { return phase_from_pair({y[0], y[1]}, {y[2], y[3]}); };

  PairSimulation out;
  out.steps = sol.step_count();
  out.columns.names = {"a_plus", "a_minus", "center"};
  const PhaseState X0 = phase(sol.nodes().front());
  const double h0 = hamiltonian(X0, p);
  for (const auto &y : sol.nodes()) out.energy_drift = std::max(out.energy_drift, std::abs(hamiltonian(phase(y), p) - h0));
  for (int k = 0; k < samples; ++k) {
    const double t = T * k / (samples - 1);
    const State<4> y = sol(t);
    const PhaseState X = phase(y);
    out.energy_drift = std::max(out.energy_drift, std::abs(hamiltonian(X, p) - h0));
    out.columns.times.push_back(t);
    out.columns.points.push_back({{y[0], y[1]}, {y[2], y[3]}, X.x});
  }
  const PhaseState XT = phase(sol.final_state());
  const Vec2 d = XT.x - free_flow(T, X0).x;
  const Vec2 u = (1.0 / norm(X0.xi)) * X0.xi;
  out.transverse_displacement = norm(d - dot(d, u) * u);
  return out;
}

inline int cmd_simulate(const RunConfig &cfg, std::ostream &report) {
  const PotentialSpec p = make_potential(cfg);
  const auto &s = cfg.simulate;
  const PairSimulation sim = simulate_pair(p, s.a_plus, s.a_minus, s.T, s.samples, cfg.ode);
  const std::string traj = output_path(cfg.out, "trajectory.csv");
  write_file(traj, trajectory_to_text(sim.columns, "potential = " + describe(p)));
  nlohmann::json summary = {{"potential", describe(p)},
                            {"a_plus", {s.a_plus.x, s.a_plus.y}},
                            {"a_minus", {s.a_minus.x, s.a_minus.y}},
                            {"T", s.T},
                            {"steps", sim.steps},
                            {"energy_drift", sim.energy_drift},
                            {"transverse_displacement", sim.transverse_displacement}};
  write_file(output_path(cfg.out, "simulate_summary.json"), summary.dump(2) + "\n");
  report << "simulate: " << sim.columns.times.size() << " samples, " << sim.steps << " steps -> " << traj << '\n'
         << "  energy drift            " << fmt17(sim.energy_drift) << '\n'
         << "  transverse displacement " << fmt17(sim.transverse_displacement) << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------
// scatter

inline ScatteringTable build_configured_table(const RunConfig &cfg, const PotentialSpec &p) {
  if (cfg.mode == "angular")
    return angular_table(p, cfg.sigma, cfg.rho(), cfg.N, cfg.M, cfg.tau_value(), cfg.ode, cfg.threads);
  return radial_table(p, cfg.sigma, cfg.rho(), cfg.N, cfg.tau_value(), cfg.ode, cfg.threads);
}

struct TableDiagnostics {
  double boundary_max = 0.0;  // max |S| over |alpha| >= beta
  double moment_max = 0.0;    // max |Simpson int S0| over theta rows
  double s0_max = 0.0;
  std::size_t failures = 0;
};

inline TableDiagnostics diagnose(const ScatteringTable &t) {
  TableDiagnostics d;
  d.failures = t.failures.size();
  for (const auto &s : t.samples)
    if (std::abs(s.alpha) >= t.beta * (1.0 - 1e-15)) d.boundary_max = std::max(d.boundary_max, norm(s.as_phase()));
  if (d.failures == 0) {
    const S0Series s0 = s0_series(t, t.sigma);
    d.moment_max = moment_check(s0);
    d.s0_max = s0_sup(s0);
  }
  return d;
}

inline int cmd_scatter(const RunConfig &cfg, std::ostream &report) {
  const PotentialSpec p = make_potential(cfg);
  const ScatteringTable t = build_configured_table(cfg, p);
  const std::string text = output_path(cfg.out, "scatter_table.csv");
  save_table(t, text);
  save_table(t, output_path(cfg.out, "scatter_table.json"));
  const TableDiagnostics d = diagnose(t);
  report << "scatter: " << mode_name(t.mode) << " table, " << t.samples.size() << " samples (N=" << t.N
         << ", M=" << t.theta_count() << ", beta=" << fmt17(t.beta) << ", tau=" << fmt17(t.tau) << ") -> "
         << text << '\n'
         << "  max |S| for |alpha| >= beta   " << fmt17(d.boundary_max) << '\n'
         << "  max |int S0| / max |S0|       "
         << fmt17(d.s0_max > 0.0 ? d.moment_max / d.s0_max : d.moment_max) << '\n'
         << "  failed samples                " << d.failures << '\n';
  for (const auto &f : t.failures)
    report << "    theta[" << f.theta_index << "] alpha[" << f.alpha_index << "]: " << f.message << '\n';
  return d.failures ? kCheckFailure : kSuccess;
}

// ---------------------------------------------------------------------------
// reconstruct

inline void require_consistent(const ScatteringTable &t, const RunConfig &cfg, const PotentialSpec &p) {
  if (std::abs(t.sigma - cfg.sigma) > 1e-15 * std::max(1.0, cfg.sigma))
    throw MetadataMismatchError("table sigma " + fmt17(t.sigma) + " differs from configured " + fmt17(cfg.sigma));
  if (std::abs(t.rho - cfg.rho()) > 1e-12 * cfg.rho())
    throw MetadataMismatchError("table rho " + fmt17(t.rho) + " differs from configured " + fmt17(cfg.rho()));
  if (t.potential != describe(p))
    throw MetadataMismatchError("table potential '" + t.potential + "' differs from configured '" + describe(p) + "'");
}

inline ReconstructionResult reconstruct_table(const ScatteringTable &t, const RunConfig &cfg) {
  const S0Series s0 = s0_series(t, cfg.sigma);
  const auto radii = cfg.radii();
  if (t.mode == TableMode::Radial)
    return reconstruct_radial(s0, cfg.sigma, cfg.rho(), cfg.potential.q, radii, cfg.threads);
  std::vector<Vec2> pts;
  for (int k = 0; k < cfg.rays; ++k) {
    const double phi = kTwoPi * k / cfg.rays;
    for (double r : radii) pts.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return reconstruct_general(s0, cfg.sigma, cfg.rho(), cfg.potential.q, pts, cfg.threads);
}

inline int cmd_reconstruct(const RunConfig &cfg, const std::string &table_path, std::ostream &report) {
  const PotentialSpec p = make_potential(cfg);
  const ScatteringTable t = load_table(table_path);
  require_consistent(t, cfg, p);
  ReconstructionResult r = reconstruct_table(t, cfg);
  r.attach_exact(p);
  const std::string path = output_path(cfg.out, "reconstruction.csv");
  write_file(path, reconstruction_to_text(r));
  const double eps = cfg.potential.epsilon;
  report << "reconstruct: " << r.values.size() << " points (" << r.quadrature << ") -> " << path << '\n'
         << "  sup |Q_rec - Q_exact|        " << fmt17(r.sup_error()) << '\n';
  if (eps > 0.0) report << "  sup |Q_rec - Q_exact| / eps  " << fmt17(r.sup_error(eps)) << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------
// verify

/// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
inline double unit_uniform(std::mt19937_64 &g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

struct Launch {
  double theta = 0.0;
  double alpha = 0.0;
};

inline std::vector<Launch> seeded_launches(std::uint64_t seed, int count, double beta) {
  std::mt19937_64 g(seed);
  std::vector<Launch> out;
  for (int i = 0; i < count; ++i) {
    const double theta = kTwoPi * unit_uniform(g);
    const double alpha = beta * (2.0 * unit_uniform(g) - 1.0);
    out.push_back({theta, alpha});
  }
  return out;
}

struct CheckOutcome {
  std::string name;
  bool passed = true;
  bool skipped = false;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct VerificationSummary {
  std::vector<CheckOutcome> checks;
  bool passed() const {
    for (const auto &c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Runs the identity, linearization, conservation and covariance checks,
/// appending one record per measurement to `log` when given.
inline VerificationSummary run_verification(const RunConfig &cfg, JsonLinesLog *log = nullptr) {
  const PotentialSpec p = make_potential(cfg);
  const auto &v = cfg.verify;
  const double sigma = cfg.sigma, rho = cfg.rho(), tau = cfg.tau_value();
  const auto launches = seeded_launches(cfg.seed, v.launches, cfg.beta());
  auto record = [&](nlohmann::json j) {
    if (log) log->append(j);
  };
  VerificationSummary out;

  struct LaunchResult {
    IdentityReport base, tight;
    double drift = 0.0;
  };
  const auto results = parallel_map<LaunchResult>(
      launches.size(),
      [&](std::size_t i) {
        const auto &l = launches[i];
        LaunchResult r;
        r.base = su_identity_residual(p, l.theta, l.alpha, sigma, rho, tau, cfg.ode);
        r.tight = su_identity_residual(p, l.theta, l.alpha, sigma, rho, tau, cfg.ode.tightened(0.1));
        r.drift = conservation_report(integrate(launch(l.theta, l.alpha, sigma, rho), p, tau, cfg.ode), p);
        return r;
      },
      cfg.threads);

  double worst_rel = 0.0, sum_base = 0.0, sum_tight = 0.0, worst_drift = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto &r = results[i];
    worst_rel = std::max(worst_rel, r.base.relative_residual);
    worst_drift = std::max(worst_drift, r.drift);
    sum_base += r.base.residual;
    sum_tight += r.tight.residual;
    record({{"check", "su_identity"},
            {"theta", launches[i].theta},
            {"alpha", launches[i].alpha},
            {"residual", r.base.residual},
            {"relative_residual", r.base.relative_residual},
            {"rhs_norm", norm(r.base.rhs)},
            {"residual_tight", r.tight.residual},
            {"energy_drift", r.drift}});
  }
  out.checks.push_back({"su_identity_relative_residual", worst_rel <= v.su_bound, false, worst_rel, v.su_bound,
                        "max over " + std::to_string(launches.size()) + " seeded launches"});
  const double shrink = sum_tight > 0.0 ? sum_base / sum_tight : 0.0;
  CheckOutcome sc{"su_identity_tolerance_shrink", true, sum_base == 0.0, shrink, v.su_shrink,
                  "sum of residuals at tol / at tol/10"};
  if (!sc.skipped) sc.passed = shrink >= v.su_shrink;
  out.checks.push_back(sc);
  out.checks.push_back({"energy_drift", worst_drift <= v.energy_bound, false, worst_drift, v.energy_bound,
                        "max |H(X(s)) - H(X(0))| over the seeded launches"});

  const auto family = [&](double eps) { return make_potential(cfg.potential, eps, cfg.ball_radius); };
  const auto lin = linearization_order(family, v.theta, v.alpha, sigma, rho, tau, cfg.ode, v.eps_list);
  bool lin_zero = true;
  for (const auto &pt : lin) {
    lin_zero = lin_zero && pt.err == 0.0;
    record({{"check", "linearization"}, {"eps", pt.eps}, {"err", pt.err}, {"scattering_norm", pt.scattering_norm}});
  }
  if (lin_zero) {
    out.checks.push_back({"linearization_slope", true, true, 0.0, 2.0, "error identically zero"});
  } else {
    const PowerLawFit fit = fit_power_law(lin);
    out.checks.push_back({"linearization_slope", std::abs(fit.slope - 2.0) <= v.slope_tolerance, false, fit.slope,
                          2.0, "log-log slope, tolerance " + fmt17(v.slope_tolerance)});
    out.checks.push_back({"linearization_r_squared", fit.r_squared >= 0.99, false, fit.r_squared, 0.99, "fit quality"});
    record({{"check", "linearization_fit"}, {"slope", fit.slope}, {"r_squared", fit.r_squared}});
  }

  if (is_radial(p)) {
    const ScatteringTable t = angular_table(p, sigma, rho, cfg.N, v.angles, tau, cfg.ode, cfg.threads);
    const double rot = rotation_residual(t);
    const double scal = scaling_residual(p, v.theta, v.alpha, sigma, rho, v.scale, tau, cfg.ode);
    out.checks.push_back({"rotation_covariance", rot <= v.covariance_bound, false, rot, v.covariance_bound,
                          std::to_string(v.angles) + " angles"});
    out.checks.push_back({"scaling_covariance", scal <= v.covariance_bound, false, scal, v.covariance_bound,
                          "c = " + fmt17(v.scale)});
    record({{"check", "covariance"}, {"rotation", rot}, {"scaling", scal}, {"angles", v.angles}, {"c", v.scale}});
  } else {
    out.checks.push_back({"rotation_covariance", true, true, 0.0, v.covariance_bound, "potential not radial"});
  }
  for (const auto &c : out.checks)
    record({{"check", "summary"}, {"name", c.name}, {"passed", c.passed}, {"skipped", c.skipped},
            {"value", c.value}, {"bound", c.bound}});
  return out;
}

inline void print_summary(const VerificationSummary &s, std::ostream &report) {
  char line[256];
  for (const auto &c : s.checks) {
    std::snprintf(line, sizeof line, "  %-32s %-4s value=%-12.4g bound=%-10.4g %s\n", c.name.c_str(),
                  c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL"), c.value, c.bound, c.detail.c_str());
    report << line;
  }
}

inline int cmd_verify(const RunConfig &cfg, std::ostream &report) {
  const std::string path = output_path(cfg.out, "verification_log.jsonl");
  JsonLinesLog log(path);
  const VerificationSummary s = run_verification(cfg, &log);
  report << "verify: " << describe(make_potential(cfg)) << " -> " << path << '\n';
  print_summary(s, report);
  return s.passed() ? kSuccess : kCheckFailure;
}

// ---------------------------------------------------------------------------
// figures

namespace detail {

inline nlohmann::json geometry_json(const RunConfig &cfg) {
  return {{"sigma", cfg.sigma}, {"rho_over_2pi", cfg.ball_radius}, {"rho", cfg.rho()}, {"beta", cfg.beta()},
          {"N", cfg.N},         {"tau", cfg.tau_value()},          {"rel_tol", cfg.ode.rel_tol},
          {"abs_tol", cfg.ode.abs_tol}};
}

struct LadderColumn {
  double eps;
  ReconstructionResult result;
};

/// Radial reconstructions of family(eps) over the ladder, written as one
/// wide table of (Q - q)/eps columns.
inline std::vector<LadderColumn> ladder(const RunConfig &cfg,
                                        const std::function<PotentialSpec(double)> &family) {
  std::vector<LadderColumn> cols;
  for (double eps : cfg.eps_ladder) {
    const PotentialSpec p = family(eps);
    const ScatteringTable t = radial_table(p, cfg.sigma, cfg.rho(), cfg.N, cfg.tau_value(), cfg.ode, cfg.threads);
    if (!t.failures.empty()) throw StepFailureError("figure table for eps=" + fmt17(eps) + " has failed samples");
    ReconstructionResult r = reconstruct_radial(s0_series(t, cfg.sigma), cfg.sigma, cfg.rho(), cfg.potential.q,
                                                cfg.radii(), cfg.threads);
    r.attach_exact(p);
    cols.push_back({eps, std::move(r)});
  }
  return cols;
}

inline std::string ladder_text(const std::vector<LadderColumn> &cols, double q, const std::string &comment) {
  std::ostringstream o;
  o << "# " << comment << '\n' << "r,Q_exact_over_eps";
  for (const auto &c : cols) o << ",Q_rec_over_eps_" << fmt17(c.eps);
  o << '\n';
  const auto &first = cols.front().result;
  for (std::size_t i = 0; i < first.values.size(); ++i) {
    o << fmt17(first.radius(i)) << ',' << fmt17((first.exact[i] - q) / cols.front().eps);
    for (const auto &c : cols) o << ',' << fmt17((c.result.values[i] - q) / c.eps);
    o << '\n';
  }
  return o.str();
}

/// Largest radius at which |Q_rec - q| exceeds frac * eps.
inline double support_radius(const ReconstructionResult &r, double eps, double frac = 1e-3) {
  double out = 0.0;
  for (std::size_t i = 0; i < r.values.size(); ++i)
    if (std::abs(r.values[i] - r.q) > frac * eps) out = std::max(out, r.radius(i));
  return out;
}

}  // namespace detail

inline int cmd_figures(const RunConfig &cfg, std::ostream &report) {
  const double q = cfg.potential.q;
  const double omega = cfg.potential.omega;
  nlohmann::json manifest;
  manifest["geometry"] = detail::geometry_json(cfg);
  manifest["eps_ladder"] = cfg.eps_ladder;
  manifest["datasets"] = nlohmann::json::array();
  auto add = [&](const std::string &name, const std::string &file, const std::string &what,
                 nlohmann::json params, nlohmann::json diagnostics) {
    manifest["datasets"].push_back({{"name", name}, {"file", file}, {"description", what},
                                    {"parameters", std::move(params)}, {"diagnostics", std::move(diagnostics)}});
    report << "  " << name << " -> " << file << '\n';
  };
  report << "figures -> " << cfg.out << '\n';

  // Scattering relation and S0 for the eps = 0.01, kappa = 8 polynomial.
  const PotentialSpec poly = PotentialSpec::compact_polynomial(0.01, omega, 8.0, q);
  const ScatteringTable t3 = radial_table(poly, cfg.sigma, cfg.rho(), cfg.N, cfg.tau_value(), cfg.ode, cfg.threads);
  if (!t3.failures.empty()) throw StepFailureError("scattering table has failed samples");
  {
    std::ostringstream o;
    o << "# scattering relation S(0, alpha), " << describe(poly) << '\n' << "alpha,Sx1,Sx2,Sxi1,Sxi2\n";
    for (const auto &s : t3.samples)
      o << fmt17(s.alpha) << ',' << fmt17(s.s_x.x) << ',' << fmt17(s.s_x.y) << ',' << fmt17(s.s_xi.x) << ','
        << fmt17(s.s_xi.y) << '\n';
    write_file(output_path(cfg.out, "fig3_scattering.csv"), o.str());
    const TableDiagnostics d = diagnose(t3);
    add("fig3", "fig3_scattering.csv", "scattering relation S(0, alpha)",
        {{"potential", describe(poly)}, {"epsilon", 0.01}, {"omega", omega}, {"kappa", 8}},
        {{"boundary_max", d.boundary_max}});
  }
  {
    const S0Series s0 = s0_series(t3, cfg.sigma);
    std::ostringstream o;
    o << "# S0(alpha), " << describe(poly) << '\n' << "alpha,S0\n";
    for (std::size_t j = 0; j < s0.alphas.size(); ++j) o << fmt17(s0.alphas[j]) << ',' << fmt17(s0.values[0][j]) << '\n';
    write_file(output_path(cfg.out, "fig4_s0.csv"), o.str());
    add("fig4", "fig4_s0.csv", "S0(alpha) from central differences",
        {{"potential", describe(poly)}, {"epsilon", 0.01}, {"omega", omega}, {"kappa", 8}},
        {{"moment_relative", moment_check(s0) / s0_sup(s0)}});
  }

  auto ladder_figure = [&](const std::string &name, const std::string &file, const std::string &what,
                           const std::function<PotentialSpec(double)> &family, nlohmann::json params,
                           double err_r_hi) {
    const auto cols = detail::ladder(cfg, family);
    write_file(output_path(cfg.out, file), detail::ladder_text(cols, q, what));
    nlohmann::json diag = nlohmann::json::array();
    for (const auto &c : cols)
      diag.push_back({{"epsilon", c.eps},
                      {"normalized_sup_error", c.result.sup_error(c.eps, 0.0, err_r_hi)},
                      {"support_radius", detail::support_radius(c.result, c.eps)}});
    params["potential_at_unit_strength"] = describe(family(1.0));
    params["error_radius"] = err_r_hi;
    add(name, file, what, std::move(params), {{"per_epsilon", diag}});
  };
  const double inf = std::numeric_limits<double>::max();
  ladder_figure("fig5", "fig5_kappa8.csv", "reconstruction of the kappa = 8 polynomial",
                [&](double e) { return PotentialSpec::compact_polynomial(e, omega, 8.0, q); },
                {{"omega", omega}, {"kappa", 8}}, inf);
  ladder_figure("fig6", "fig6_kappa0.csv", "reconstruction of the kappa = 0 polynomial (cusp)",
                [&](double e) { return PotentialSpec::compact_polynomial(e, omega, 0.0, q); },
                {{"omega", omega}, {"kappa", 0}}, inf);
  ladder_figure("fig7", "fig7_gaussian.csv", "reconstruction of the Gaussian potential",
                [&](double e) {
                  return PotentialSpec::gaussian(e, 10.0 / (cfg.ball_radius * cfg.ball_radius), q);
                },
                {{"exponent", 10.0}}, cfg.ball_radius);

  write_file(output_path(cfg.out, "manifest.json"), manifest.dump(2) + "\n");
  report << "  manifest -> manifest.json\n";
  return kSuccess;
}

}  // namespace dipole
