#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "dromo/io.hpp"

namespace {

using namespace dromo::cli;

ExperimentConfig resolve(const std::string& config_path, std::optional<long> seed,
                         const std::string& out_dir) {
  ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  if (seed) {
    if (*seed < 0) throw ConfigError("--seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(*seed);
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust offline model-based policy optimization on finite MDPs"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite = "all", out_file;
  std::optional<long> seed;
  std::optional<int> instances;
  std::vector<std::string> traces;

  auto* gen = app.add_subcommand("gen", "Generate an MDP file and an offline dataset");
  auto* run = app.add_subcommand("run", "Run dromo, combo or mopo on a generated dataset");
  auto* verify = app.add_subcommand("verify", "Run the property verification suites");
  auto* plot = app.add_subcommand("plotdata", "Merge trace CSVs into long format");
  for (auto* sub : {gen, run}) {
    sub->add_option("--config", config_path, "Config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out", out_dir, "Output directory");
  }
  verify->add_option("--suite", suite, "duchi, lemma1, thm2, thm4, thm5, ntk, calibration, bound_c or all");
  verify->add_option("--instances", instances, "Accepted instances per suite");
  verify->add_option("--seed", seed, "Random seed")->required();
  verify->add_option("--out", out_file, "Also write the report to this file");
  plot->add_option("traces", traces, "Trace CSV files")->required();
  plot->add_option("--out", out_file, "Also write the merged CSV to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen(resolve(config_path, seed, out_dir), std::cout);
    if (*run) return cmd_run(resolve(config_path, seed, out_dir), std::cout);
    if (*verify) {
      if (*seed < 0) throw ConfigError("--seed must be nonnegative");
      std::optional<std::string> file;
      if (!out_file.empty()) file = out_file;
      return cmd_verify(suite, instances, static_cast<std::uint64_t>(*seed), file, std::cout);
    }
    if (*plot) {
      std::optional<std::string> file;
      if (!out_file.empty()) file = out_file;
      return cmd_plotdata(traces, file, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const dromo::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAssertion;
  }
  return kUsage;
}
