// Command-line driver: simulate | scatter | reconstruct | verify | figures.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dipole/dipole.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

dipole::RunConfig load(const GlobalOptions &g) {
  dipole::RunConfig cfg = g.config.empty() ? dipole::RunConfig{} : dipole::parse_config(dipole::read_file(g.config));
  if (g.out) cfg.out = *g.out;
  if (g.threads) cfg.threads = *g.threads;
  if (g.seed) cfg.seed = *g.seed;
  dipole::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Vortex dipole scattering: forward simulation, scattering tables, reconstruction"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory (overrides run.out)");
  app.add_option("--threads", g.threads, "worker threads, 0 = hardware concurrency");
  app.add_option("--seed", g.seed, "seed for randomized verification launches");

  auto *simulate = app.add_subcommand("simulate", "integrate a vortex pair and write its trajectory");
  auto *scatter = app.add_subcommand("scatter", "build and write a scattering table");
  auto *reconstruct = app.add_subcommand("reconstruct", "reconstruct the potential from a scattering table");
  std::string table;
  reconstruct->add_option("--table", table, "scattering table (.csv or .json); default <out>/scatter_table.csv");
  auto *verify = app.add_subcommand("verify", "run the identity, conservation and covariance checks");
  auto *figures = app.add_subcommand("figures", "write plot-ready data for the reference experiments");
  for (auto *sub : {simulate, scatter, reconstruct, verify, figures}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dipole::kValidationFailure;
  }

  try {
    const dipole::RunConfig cfg = load(g);
    if (*simulate) return dipole::cmd_simulate(cfg, std::cout);
    if (*scatter) return dipole::cmd_scatter(cfg, std::cout);
    if (*reconstruct)
      return dipole::cmd_reconstruct(cfg, table.empty() ? dipole::output_path(cfg.out, "scatter_table.csv") : table,
                                     std::cout);
    if (*verify) return dipole::cmd_verify(cfg, std::cout);
    if (*figures) return dipole::cmd_figures(cfg, std::cout);
  } catch (const dipole::ConfigError &e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return dipole::kValidationFailure;
  } catch (const dipole::ParseError &e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return dipole::kValidationFailure;
  } catch (const dipole::MetadataMismatchError &e) {
    std::cerr << "metadata mismatch: " << e.what() << '\n';
    return dipole::kValidationFailure;
  } catch (const dipole::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return dipole::kCheckFailure;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return dipole::kCheckFailure;
  }
  return dipole::kValidationFailure;
}
