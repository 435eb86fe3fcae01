#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "dromo/loop.hpp"

namespace dromo::cli {

// Bad or unknown configuration; maps to the usage exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  // Environment: builtin name (chain5, gridworld4, random6x3) or an MDP file.
  std::string env = "chain5";
  double gamma = 0.9;

  // Dataset generation.
  std::string behavior = "uniform";  // uniform | random
  long n_transitions = 1000;
  int episode_length = 100;

  // Explicit input files for `run`; default to the files `gen` writes.
  std::string mdp_file;
  std::string dataset_file;

  std::string algorithm = "dromo";  // dromo | combo | mopo
  LoopConfig loop;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

// Parses `key = value` lines; `#` starts a comment. Throws ConfigError for
// unknown keys, duplicates and malformed values.
ExperimentConfig parse_config(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::string& path);

// The recognized keys with their current values, one `key = value` per line.
std::string describe_config(const ExperimentConfig& cfg);

}  // namespace dromo::cli
