#pragma once

// Text and JSON serialization of scattering tables, reconstructions,
// trajectories and verification records. Reals are written with 17
// significant digits so that parsing reproduces every bit.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dipole/errors.hpp"
#include "dipole/reconstruction.hpp"
#include "dipole/scattering.hpp"

namespace dipole {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string &s, const char *what) {
  const char *b = s.c_str();
  char *end = nullptr;
  const double v = std::strtod(b, &end);
  while (end && *end == ' ') ++end;
  if (end == b || (end && *end != '\0'))
    throw ParseError(std::string("cannot parse ") + what + " from '" + s + "'");
  return v;
}

inline long long parse_int(const std::string &s, const char *what) {
  const char *b = s.c_str();
  char *end = nullptr;
  const long long v = std::strtoll(b, &end, 10);
  if (end == b || *end != '\0')
    throw ParseError(std::string("cannot parse ") + what + " from '" + s + "'");
  return v;
}

inline std::string mode_name(TableMode m) { return m == TableMode::Radial ? "radial" : "angular"; }
inline TableMode parse_mode(const std::string &s) {
  if (s == "radial") return TableMode::Radial;
  if (s == "angular") return TableMode::Angular;
  throw ParseError("unknown table mode '" + s + "'");
}

inline void write_file(const std::string &path, const std::string &content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw Error("write to '" + path + "' failed");
}

inline std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Scattering table, text form

inline std::string table_to_text(const ScatteringTable &t) {
  std::ostringstream o;
  o << "# dipole scattering table\n";
  o << "# mode = " << mode_name(t.mode) << '\n';
  o << "# sigma = " << fmt17(t.sigma) << '\n';
  o << "# rho = " << fmt17(t.rho) << '\n';
  o << "# beta = " << fmt17(t.beta) << '\n';
  o << "# N = " << t.N << '\n';
  o << "# M = " << t.theta_count() << '\n';
  o << "# tau = " << fmt17(t.tau) << '\n';
  o << "# potential = " << t.potential << '\n';
  o << "# rel_tol = " << fmt17(t.ode.rel_tol) << '\n';
  o << "# abs_tol = " << fmt17(t.ode.abs_tol) << '\n';
  o << "# max_step = " << fmt17(t.ode.max_step) << '\n';
  o << "# initial_step = " << fmt17(t.ode.initial_step) << '\n';
  o << "# max_steps = " << t.ode.max_steps << '\n';
  o << "# failures = " << t.failures.size() << '\n';
  for (const auto &f : t.failures)
    o << "# failure = " << f.theta_index << ' ' << f.alpha_index << ' ' << f.message << '\n';
  o << "theta,alpha,Sx1,Sx2,Sxi1,Sxi2\n";
  for (const auto &s : t.samples)
    o << fmt17(s.theta) << ',' << fmt17(s.alpha) << ',' << fmt17(s.s_x.x) << ',' << fmt17(s.s_x.y)
      << ',' << fmt17(s.s_xi.x) << ',' << fmt17(s.s_xi.y) << '\n';
  return o.str();
}

inline ScatteringTable table_from_text(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> meta;
  ScatteringTable t;
  std::size_t declared_failures = 0;
  bool header_row = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 3);
      if (key == "failure") {
        std::istringstream fs(value);
        SampleFailure f;
        if (!(fs >> f.theta_index >> f.alpha_index)) throw ParseError("malformed failure line");
        std::getline(fs >> std::ws, f.message);
        t.failures.push_back(f);
      } else {
        meta[key] = value;
      }
      continue;
    }
    if (!header_row) {
      if (line != "theta,alpha,Sx1,Sx2,Sxi1,Sxi2") throw ParseError("missing column header line");
      header_row = true;
      continue;
    }
    std::vector<std::string> cols;
    std::string c;
    std::istringstream ls(line);
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (cols.size() != 6) throw ParseError("line " + std::to_string(lineno) + ": expected 6 columns");
    ScatteringSample s;
    s.theta = parse_real(cols[0], "theta");
    s.alpha = parse_real(cols[1], "alpha");
    s.s_x = {parse_real(cols[2], "Sx1"), parse_real(cols[3], "Sx2")};
    s.s_xi = {parse_real(cols[4], "Sxi1"), parse_real(cols[5], "Sxi2")};
    t.samples.push_back(s);
  }
  auto need = [&](const char *k) -> const std::string & {
    const auto it = meta.find(k);
    if (it == meta.end()) throw ParseError(std::string("table header lacks '") + k + "'");
    return it->second;
  };
  t.mode = parse_mode(need("mode"));
  t.sigma = parse_real(need("sigma"), "sigma");
  t.rho = parse_real(need("rho"), "rho");
  t.beta = parse_real(need("beta"), "beta");
  t.N = static_cast<int>(parse_int(need("N"), "N"));
  const auto M = static_cast<std::size_t>(parse_int(need("M"), "M"));
  t.tau = parse_real(need("tau"), "tau");
  t.potential = need("potential");
  t.ode.rel_tol = parse_real(need("rel_tol"), "rel_tol");
  t.ode.abs_tol = parse_real(need("abs_tol"), "abs_tol");
  t.ode.max_step = parse_real(need("max_step"), "max_step");
  t.ode.initial_step = parse_real(need("initial_step"), "initial_step");
  t.ode.max_steps = static_cast<std::size_t>(parse_int(need("max_steps"), "max_steps"));
  declared_failures = static_cast<std::size_t>(parse_int(need("failures"), "failures"));
  if (declared_failures != t.failures.size()) throw ParseError("failure count does not match");
  if (t.N < 2 || M == 0) throw ParseError("invalid table dimensions");
  const std::size_t na = t.alpha_count();
  if (t.samples.size() != M * na)
    throw ParseError("row count " + std::to_string(t.samples.size()) + " does not equal M (2N+1)");
  for (auto &s : t.samples) s.tau_used = t.tau;
  for (std::size_t k = 0; k < M; ++k) t.thetas.push_back(t.samples[k * na].theta);
  return t;
}

// ---------------------------------------------------------------------------
// Scattering table, JSON form

inline nlohmann::json ode_to_json(const IntegratorConfig &c) {
  return {{"rel_tol", c.rel_tol},
          {"abs_tol", c.abs_tol},
          {"max_step", c.max_step},
          {"initial_step", c.initial_step},
          {"max_steps", c.max_steps}};
}

inline nlohmann::json table_to_json(const ScatteringTable &t) {
  nlohmann::json j;
  j["mode"] = mode_name(t.mode);
  j["sigma"] = t.sigma;
  j["rho"] = t.rho;
  j["beta"] = t.beta;
  j["N"] = t.N;
  j["M"] = t.theta_count();
  j["tau"] = t.tau;
  j["potential"] = t.potential;
  j["ode"] = ode_to_json(t.ode);
  j["thetas"] = t.thetas;
  auto rows = nlohmann::json::array();
  for (const auto &s : t.samples)
    rows.push_back({s.theta, s.alpha, s.s_x.x, s.s_x.y, s.s_xi.x, s.s_xi.y});
  j["samples"] = std::move(rows);
  auto fails = nlohmann::json::array();
  for (const auto &f : t.failures)
    fails.push_back({{"theta_index", f.theta_index}, {"alpha_index", f.alpha_index}, {"message", f.message}});
  j["failures"] = std::move(fails);
  return j;
}

inline ScatteringTable table_from_json(const nlohmann::json &j) {
  try {
    ScatteringTable t;
    t.mode = parse_mode(j.at("mode").get<std::string>());
    t.sigma = j.at("sigma").get<double>();
    t.rho = j.at("rho").get<double>();
    t.beta = j.at("beta").get<double>();
    t.N = j.at("N").get<int>();
    t.tau = j.at("tau").get<double>();
    t.potential = j.at("potential").get<std::string>();
    const auto &o = j.at("ode");
    t.ode.rel_tol = o.at("rel_tol").get<double>();
    t.ode.abs_tol = o.at("abs_tol").get<double>();
    t.ode.max_step = o.at("max_step").get<double>();
    t.ode.initial_step = o.at("initial_step").get<double>();
    t.ode.max_steps = o.at("max_steps").get<std::size_t>();
    t.thetas = j.at("thetas").get<std::vector<double>>();
    for (const auto &r : j.at("samples")) {
      if (!r.is_array() || r.size() != 6) throw ParseError("sample row must have 6 entries");
      std::array<double, 6> v{};
      for (std::size_t i = 0; i < 6; ++i)  // failed samples are NaN, which JSON stores as null
        v[i] = r[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : r[i].get<double>();
      t.samples.push_back({v[0], v[1], {v[2], v[3]}, {v[4], v[5]}, t.tau});
    }
    for (const auto &f : j.at("failures"))
      t.failures.push_back({f.at("theta_index").get<std::size_t>(), f.at("alpha_index").get<std::size_t>(),
                            f.at("message").get<std::string>()});
    if (t.samples.size() != t.theta_count() * t.alpha_count())
      throw ParseError("sample count does not match the theta x alpha grid");
    return t;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("malformed table JSON: ") + e.what());
  }
}

inline void save_table(const ScatteringTable &t, const std::string &path) {
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  write_file(path, json ? table_to_json(t).dump(1) + "\n" : table_to_text(t));
}

inline ScatteringTable load_table(const std::string &path) {
  const std::string content = read_file(path);
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (!json) return table_from_text(content);
  try {
    return table_from_json(nlohmann::json::parse(content));
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(std::string("invalid JSON in '") + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reconstruction

inline std::string reconstruction_to_text(const ReconstructionResult &r) {
  std::ostringstream o;
  o << "# dipole reconstruction\n";
  o << "# mode = " << mode_name(r.mode) << '\n';
  o << "# sigma = " << fmt17(r.sigma) << '\n';
  o << "# rho = " << fmt17(r.rho) << '\n';
  o << "# beta = " << fmt17(r.beta) << '\n';
  o << "# N = " << r.N << '\n';
  o << "# M = " << r.theta_count << '\n';
  o << "# q = " << fmt17(r.q) << '\n';
  o << "# quadrature = " << r.quadrature << '\n';
  const bool has_exact = r.exact.size() == r.values.size();
  const bool general = r.mode == TableMode::Angular;
  o << (general ? "x1,x2,r,phi,Q_rec" : "r,Q_rec") << (has_exact ? ",Q_exact,abs_err" : "") << '\n';
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (general)
      o << fmt17(r.points[i].x) << ',' << fmt17(r.points[i].y) << ',' << fmt17(r.radius(i)) << ','
        << fmt17(std::atan2(r.points[i].y, r.points[i].x)) << ',';
    else
      o << fmt17(r.radius(i)) << ',';
    o << fmt17(r.values[i]);
    if (has_exact) o << ',' << fmt17(r.exact[i]) << ',' << fmt17(std::abs(r.values[i] - r.exact[i]));
    o << '\n';
  }
  return o.str();
}

// ---------------------------------------------------------------------------
// Trajectories: columns t followed by named 2-vectors.

struct TrajectoryColumns {
  std::vector<std::string> names;  // e.g. {"a_plus", "a_minus", "center"}
  std::vector<double> times;
  std::vector<std::vector<Vec2>> points;  // points[row][column]
};

inline std::string trajectory_to_text(const TrajectoryColumns &tc, const std::string &comment = {}) {
  std::ostringstream o;
  if (!comment.empty()) o << "# " << comment << '\n';
  o << 't';
  for (const auto &n : tc.names) o << ',' << n << "_1," << n << "_2";
  o << '\n';
  for (std::size_t i = 0; i < tc.times.size(); ++i) {
    o << fmt17(tc.times[i]);
    for (const auto &p : tc.points[i]) o << ',' << fmt17(p.x) << ',' << fmt17(p.y);
    o << '\n';
  }
  return o.str();
}

// ---------------------------------------------------------------------------
// Verification log: one JSON object per line.

class JsonLinesLog {
 public:
  explicit JsonLinesLog(const std::string &path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open '" + path + "' for writing");
  }
  void append(const nlohmann::json &record) {
    out_ << record.dump() << '\n';
    out_.flush();
  }
  const std::string &path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace dipole
