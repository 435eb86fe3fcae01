#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dromo/bounds.hpp"
#include "dromo/envs.hpp"
#include "dromo/instances.hpp"
#include "dromo/io.hpp"
#include "dromo/loop.hpp"
#include "dromo/offline_data.hpp"
#include "dromo/rng.hpp"
#include "dromo/verify.hpp"

namespace dromo::cli {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

TabularMdp make_env(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (is_builtin_name(cfg.env)) return make_builtin(cfg.env, cfg.gamma, derive_seed(seed, 0));
  if (fs::exists(cfg.env)) return load_mdp(cfg.env);
  throw ConfigError("env '" + cfg.env + "' is neither a builtin environment nor an existing file");
}

std::uint64_t require_seed(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw ConfigError("a seed is required (--seed or `seed = N` in the config)");
  return *cfg.seed;
}

}  // namespace

int cmd_gen(const ExperimentConfig& cfg, std::ostream& log) {
  std::uint64_t seed = require_seed(cfg);
  if (cfg.n_transitions < 1) throw ConfigError("n_transitions must be at least 1");
  if (cfg.episode_length < 1) throw ConfigError("episode_length must be at least 1");
  TabularMdp mdp = make_env(cfg, seed);
  PolicyTable behavior = cfg.behavior == "uniform"
                             ? PolicyTable::uniform(mdp.n_states(), mdp.n_actions())
                             : random_policy(mdp.n_states(), mdp.n_actions(), derive_seed(seed, 1));
  Dataset data = generate_dataset(mdp, behavior, cfg.n_transitions, derive_seed(seed, 2),
                                  cfg.episode_length);
  ensure_dir(cfg.out_dir);
  save_mdp(join(cfg.out_dir, "mdp.txt"), mdp);
  save_dataset(join(cfg.out_dir, "dataset.txt"), data);
  CountTable counts = CountTable::from(data);
  log << "states " << mdp.n_states() << " actions " << mdp.n_actions() << " records "
      << data.size() << '\n'
      << "coverage " << format_double(counts.coverage()) << '\n';
  return kOk;
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  std::uint64_t seed = require_seed(cfg);
  std::string mdp_path = cfg.mdp_file.empty() ? join(cfg.out_dir, "mdp.txt") : cfg.mdp_file;
  std::string data_path = cfg.dataset_file.empty() ? join(cfg.out_dir, "dataset.txt") : cfg.dataset_file;
  TabularMdp truth = load_mdp(mdp_path);
  Dataset data = load_dataset(data_path, truth.n_states(), truth.n_actions());
  LoopConfig loop = cfg.loop;
  loop.seed = seed;
  loop.gamma = truth.gamma();
  try {
    loop.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  LoopResult res = cfg.algorithm == "dromo" ? run_dromo(truth, data, loop)
                   : cfg.algorithm == "combo"
                       ? run_baseline(Algorithm::kCombo, truth, data, loop)
                       : run_baseline(Algorithm::kMopo, truth, data, loop);
  std::ostringstream trace;
  trace << "# seed=" << seed << '\n';
  if (cfg.algorithm == "mopo")
    write_mopo_trace(trace, res.trace);
  else
    write_trace(trace, res.trace);
  ensure_dir(cfg.out_dir);
  write_file_atomic(join(cfg.out_dir, "trace.csv"), trace.str());

  // Lower-bound check on the final iteration: E_{mu, pi}[Q_hat] <= J(truth, pi).
  const TraceRow& last = res.trace.back();
  bool lower_bound = last.mean_q_hat <= last.truth_q_mean + 1e-9;
  std::ostringstream report;
  report << "algorithm = " << cfg.algorithm << '\n'
         << "seed = " << seed << '\n'
         << "iterations = " << res.trace.size() << '\n'
         << "policy_converged = " << (res.policy_converged ? "true" : "false") << '\n'
         << "return_true = " << format_double(last.return_true) << '\n'
         << "return_model = " << format_double(last.return_model) << '\n'
         << "mean_q_hat = " << format_double(last.mean_q_hat) << '\n'
         << "lower_bound_holds = " << (lower_bound ? "true" : "false") << '\n';
  write_file_atomic(join(cfg.out_dir, "report.txt"), report.str());
  log << report.str();
  return kOk;
}

int cmd_verify(const std::string& suite, std::optional<int> instances, std::uint64_t seed,
               const std::optional<std::string>& out_file, std::ostream& report) {
  if (!is_suite_name(suite)) throw ConfigError("unknown suite '" + suite + "'");
  if (instances && *instances < 1) throw ConfigError("--instances must be at least 1");
  SuiteReport rep = run_suite(suite, instances, seed);
  std::ostringstream csv;
  write_report(csv, rep);
  if (out_file) write_file_atomic(*out_file, csv.str());
  report << csv.str();
  std::cerr << "checks pass " << rep.count(CheckStatus::kPass) << " fail "
            << rep.count(CheckStatus::kFail) << " reject " << rep.count(CheckStatus::kReject)
            << '\n';
  return rep.hard_failure() ? kAssertion : kOk;
}

namespace {

const std::vector<std::string> kDromoColumns = {"iter", "mean_q_hat", "return_true", "return_model",
                                                "beta", "alpha",      "f"};
const std::vector<std::string> kMopoColumns = {"iter", "alpha_t", "mean_q", "return_on_truth",
                                               "return_on_model"};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TraceTable read_trace(std::istream& in, const std::string& source, std::uint64_t fallback_seed) {
  TraceTable t;
  t.seed = fallback_seed;
  std::string line;
  bool header = false;
  std::vector<std::size_t> index;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# seed=";
      if (line.compare(0, tag.size(), tag) == 0)
        t.seed = static_cast<std::uint64_t>(parse_int(line.substr(tag.size()), source + " seed"));
      continue;
    }
    std::vector<std::string> cells = split_csv(line);
    if (!header) {
      const auto& schema =
          std::find(cells.begin(), cells.end(), "alpha_t") != cells.end() ? kMopoColumns : kDromoColumns;
      for (const auto& col : schema) {
        auto it = std::find(cells.begin(), cells.end(), col);
        if (it == cells.end()) throw IoError(source + ": missing column '" + col + "'");
        index.push_back(static_cast<std::size_t>(it - cells.begin()));
      }
      t.columns = schema;
      header = true;
      continue;
    }
    std::vector<std::string> row;
    for (std::size_t i : index) {
      if (i >= cells.size()) throw IoError(source + ": short row '" + line + "'");
      row.push_back(cells[i]);
    }
    t.rows.push_back(std::move(row));
  }
  if (!header) throw IoError(source + ": no header row");
  return t;
}

int cmd_plotdata(const std::vector<std::string>& traces, const std::optional<std::string>& out_file,
                 std::ostream& out) {
  if (traces.empty()) throw ConfigError("plotdata needs at least one trace file");
  std::ostringstream csv;
  csv << "seed,iter,metric,value\n";
  std::vector<std::string> schema;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    std::ifstream in(traces[k]);
    if (!in) throw IoError("cannot open trace '" + traces[k] + "'");
    TraceTable t = read_trace(in, traces[k], k);
    if (schema.empty()) schema = t.columns;
    if (t.columns != schema) throw IoError(traces[k] + ": trace schema differs from the first file");
    for (const auto& row : t.rows)
      for (std::size_t c = 1; c < row.size(); ++c)
        csv << t.seed << ',' << row[0] << ',' << t.columns[c] << ',' << row[c] << '\n';
  }
  if (out_file) write_file_atomic(*out_file, csv.str());
  out << csv.str();
  return kOk;
}

}  // namespace dromo::cli
