#include <cmath>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "dipole/config.hpp"
#include "dipole/io.hpp"

using namespace dipole;
namespace fs = std::filesystem;

namespace {

ScatteringTable small_table(TableMode mode = TableMode::Radial) {
  const auto p = PotentialSpec::compact_polynomial(0.01, 0.5, 8.0);
  const double tau = free_exit_time(0.1, kTwoPi);
  return mode == TableMode::Radial ? radial_table(p, 0.1, kTwoPi, 6, tau) : angular_table(p, 0.1, kTwoPi, 4, 4, tau);
}

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / ("dipole_io_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Fmt17, RoundTripsDoubles) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.283185307179586, 0.0}) EXPECT_EQ(parse_real(fmt17(v), "v"), v);
  EXPECT_THROW(parse_real("1.0x", "v"), ParseError);
  EXPECT_THROW(parse_real("", "v"), ParseError);
  EXPECT_THROW(parse_int("3.5", "n"), ParseError);
  EXPECT_EQ(parse_int("-12", "n"), -12);
}

TEST(TableText, RoundTripIsExact) {
  for (auto mode : {TableMode::Radial, TableMode::Angular}) {
    const ScatteringTable t = small_table(mode);
    const ScatteringTable back = table_from_text(table_to_text(t));
    EXPECT_TRUE(back == t);
    EXPECT_EQ(table_to_text(back), table_to_text(t));
  }
}

TEST(TableText, HeaderAndColumns) {
  const std::string text = table_to_text(small_table());
  EXPECT_NE(text.find("# mode = radial\n"), std::string::npos);
  EXPECT_NE(text.find("# N = 6\n"), std::string::npos);
  EXPECT_NE(text.find("# potential = compact_polynomial strength=0.01 support_radius=0.5 smoothness=8 q=0\n"),
            std::string::npos);
  EXPECT_NE(text.find("\ntheta,alpha,Sx1,Sx2,Sxi1,Sxi2\n"), std::string::npos);
}

TEST(TableText, FailuresRoundTrip) {
  ScatteringTable t = small_table();
  t.failures.push_back({0, 3, "step size underflow at t=0.5"});
  const ScatteringTable back = table_from_text(table_to_text(t));
  ASSERT_EQ(back.failures.size(), 1u);
  EXPECT_EQ(back.failures[0], t.failures[0]);
}

TEST(TableText, MalformedInputIsRejected) {
  const std::string good = table_to_text(small_table());
  EXPECT_THROW(table_from_text(""), ParseError);
  std::string missing_row = good.substr(0, good.rfind('\n', good.size() - 2) + 1);
  EXPECT_THROW(table_from_text(missing_row), ParseError);
  std::string bad_header = good;
  bad_header.replace(bad_header.find("Sxi2"), 4, "Sxi3");
  EXPECT_THROW(table_from_text(bad_header), ParseError);
  std::string bad_number = good;
  bad_number.replace(bad_number.rfind(','), 1, ",zz");
  EXPECT_THROW(table_from_text(bad_number), ParseError);
  std::string no_sigma = good;
  no_sigma.erase(no_sigma.find("# sigma"), no_sigma.find('\n', no_sigma.find("# sigma")) - no_sigma.find("# sigma") + 1);
  EXPECT_THROW(table_from_text(no_sigma), ParseError);
  std::string bad_mode = good;
  bad_mode.replace(bad_mode.find("radial"), 6, "spiral");
  EXPECT_THROW(table_from_text(bad_mode), ParseError);
}

TEST(TableJson, RoundTripIsExact) {
  for (auto mode : {TableMode::Radial, TableMode::Angular}) {
    const ScatteringTable t = small_table(mode);
    const ScatteringTable back = table_from_json(nlohmann::json::parse(table_to_json(t).dump()));
    EXPECT_TRUE(back == t);
  }
}

TEST(TableJson, RejectsMalformedDocuments) {
  nlohmann::json j = table_to_json(small_table());
  j.erase("sigma");
  EXPECT_THROW(table_from_json(j), ParseError);
  j = table_to_json(small_table());
  j["samples"].erase(0);
  EXPECT_THROW(table_from_json(j), ParseError);
  j = table_to_json(small_table());
  j["samples"][0] = {1.0, 2.0};
  EXPECT_THROW(table_from_json(j), ParseError);
}

TEST(TableFiles, SaveAndLoadByExtension) {
  const fs::path d = temp_dir();
  const ScatteringTable t = small_table(TableMode::Angular);
  for (const char *name : {"t.csv", "t.json"}) {
    const std::string path = (d / name).string();
    save_table(t, path);
    EXPECT_TRUE(load_table(path) == t) << name;
  }
  write_file((d / "broken.json").string(), "{not json");
  EXPECT_THROW(load_table((d / "broken.json").string()), ParseError);
  EXPECT_THROW(load_table((d / "absent.csv").string()), ParseError);
  fs::remove_all(d);
}

TEST(ReconstructionText, Columns) {
  ReconstructionResult r;
  r.points = {{0.0, 0.0}, {0.5, 0.0}};
  r.values = {0.01, 0.0};
  EXPECT_NE(reconstruction_to_text(r).find("\nr,Q_rec\n0,0.01\n"), std::string::npos);
  r.attach_exact(PotentialSpec::compact_polynomial(0.01, 0.5, 8.0));
  EXPECT_NE(reconstruction_to_text(r).find("\nr,Q_rec,Q_exact,abs_err\n"), std::string::npos);
  r.mode = TableMode::Angular;
  EXPECT_NE(reconstruction_to_text(r).find("\nx1,x2,r,phi,Q_rec,Q_exact,abs_err\n"), std::string::npos);
}

TEST(TrajectoryText, Columns) {
  TrajectoryColumns tc{{"a_plus", "a_minus"}, {0.0, 0.5}, {{{1, 2}, {3, 4}}, {{5, 6}, {7, 8}}}};
  EXPECT_EQ(trajectory_to_text(tc, "test"),
            "# test\nt,a_plus_1,a_plus_2,a_minus_1,a_minus_2\n0,1,2,3,4\n0.5,5,6,7,8\n");
}

TEST(Config, DefaultsAreTheReferenceParameterSet) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c.potential.kind, "compact_polynomial");
  EXPECT_EQ(c.potential.epsilon, 0.01);
  EXPECT_EQ(c.potential.omega, 0.5);
  EXPECT_EQ(c.potential.kappa, 8.0);
  EXPECT_EQ(c.sigma, 0.1);
  EXPECT_EQ(c.ball_radius, 1.0);
  EXPECT_NEAR(c.rho(), kTwoPi, 1e-15);
  EXPECT_NEAR(c.beta(), 1.1, 1e-15);
  EXPECT_NEAR(c.tau_value(), 2 * 0.1 * kTwoPi, 1e-15);
  EXPECT_EQ(c.N, 400);
  EXPECT_EQ(c.ode.rel_tol, 1e-10);
  EXPECT_EQ(c.ode.abs_tol, 1e-12);
  EXPECT_EQ(c.radii().size(), 201u);
  EXPECT_NEAR(c.radii().back(), 1.3, 1e-15);
  EXPECT_EQ(describe(make_potential(c)), describe(PotentialSpec::compact_polynomial(0.01, 0.5, 8.0)));
}

TEST(Config, ParsesAllSections) {
  const RunConfig c = parse_config(R"(
[potential]
kind = gaussian_sum
bumps = 0.1,1,0,1; 0.1,-1,0,1
q = 0.5

[geometry]
sigma = 0.05
ball_radius = 2

[scatter]
N = 100
M = 16
mode = angular
tau = 3.0

[reconstruct]
r_max = 2.5
r_count = 11

[ode]
rel_tol = 1e-9

[simulate]
a_plus = -4, 0.4
T = 20

[verify]
eps_list = 0.04, 0.02

[figures]
eps_ladder = 0.02,0.01

[run]
out = results
threads = 2
seed = 7
)");
  ASSERT_EQ(c.potential.bumps.size(), 2u);
  EXPECT_EQ(c.potential.bumps[1].center, (Vec2{-1.0, 0.0}));
  EXPECT_EQ(c.sigma, 0.05);
  EXPECT_NEAR(c.rho(), 2 * kTwoPi, 1e-15);
  EXPECT_EQ(c.mode, "angular");
  EXPECT_EQ(c.M, 16);
  EXPECT_EQ(c.tau_value(), 3.0);
  EXPECT_EQ(c.radii().size(), 11u);
  EXPECT_EQ(c.radii().back(), 2.5);
  EXPECT_EQ(c.ode.rel_tol, 1e-9);
  EXPECT_EQ(c.simulate.a_plus, (Vec2{-4.0, 0.4}));
  EXPECT_EQ(c.simulate.T, 20.0);
  EXPECT_EQ(c.verify.eps_list, (std::vector<double>{0.04, 0.02}));
  EXPECT_EQ(c.eps_ladder, (std::vector<double>{0.02, 0.01}));
  EXPECT_EQ(c.out, "results");
  EXPECT_EQ(c.threads, 2u);
  EXPECT_EQ(c.seed, 7u);
  const PotentialSpec p = make_potential(c);
  EXPECT_FALSE(is_radial(p));
  EXPECT_NEAR(eval_Q(p, {1.0, 0.0}), 0.5 + 0.1 + 0.1 * std::exp(-4.0), 1e-15);
}

TEST(Config, GaussianExponentIsRelativeToTheBall) {
  const RunConfig c = parse_config("[potential]\nkind = gaussian\nepsilon = 0.02\nexponent = 10\n[geometry]\nball_radius = 2\n");
  const PotentialSpec p = make_potential(c);
  EXPECT_NEAR(eval_Q(p, {2.0, 0.0}), 0.02 * std::exp(-10.0), 1e-18);
}

TEST(Config, RejectsInvalidInput) {
  EXPECT_THROW(parse_config("[potential]\ncolour = red\n"), ConfigError);
  EXPECT_THROW(parse_config("[nonsense]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[geometry]\nsigma = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("[geometry]\nsigma = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("[scatter]\nN = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[scatter]\nmode = spiral\n"), ConfigError);
  EXPECT_THROW(parse_config("[scatter]\ntau = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("[potential]\nkind = square\n"), ConfigError);
  EXPECT_THROW(parse_config("[potential]\nkind = gaussian_sum\nbumps = 1,2,3\n"), ConfigError);
  EXPECT_THROW(parse_config("[ode]\nrel_tol = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("[simulate]\na_plus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[verify]\neps_list = 0.01\n"), ConfigError);
  EXPECT_THROW(parse_config("[potential\nkind = zero\n"), ConfigError);
  EXPECT_THROW(parse_config("stray = 1\n"), ConfigError);
}

TEST(Config, EntriesListEveryKey) {
  const auto entries = config_entries(RunConfig{});
  auto find = [&](const std::string &k) {
    for (const auto &[key, v] : entries)
      if (key == k) return v;
    return std::string("<missing>");
  };
  EXPECT_EQ(find("geometry.sigma"), "0.10000000000000001");
  EXPECT_EQ(find("scatter.N"), "400");
  EXPECT_EQ(find("run.seed"), "20140101");
  EXPECT_NE(find("scatter.tau"), "<missing>");
}
