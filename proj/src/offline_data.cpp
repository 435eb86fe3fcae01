#include "dromo/offline_data.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dromo/io.hpp"
#include "dromo/rng.hpp"

namespace dromo {

Dataset::Dataset(int n_states, int n_actions, std::vector<Transition> records)
    : n_states_(n_states), n_actions_(n_actions), records_(std::move(records)) {
  if (n_states <= 0 || n_actions <= 0) throw std::invalid_argument("Dataset: empty shape");
  if (records_.empty()) throw std::invalid_argument("Dataset: no transitions");
  for (const auto& t : records_) {
    if (t.s < 0 || t.s >= n_states || t.s_next < 0 || t.s_next >= n_states || t.a < 0 ||
        t.a >= n_actions)
      throw std::invalid_argument("Dataset: id out of range");
    if (!std::isfinite(t.r)) throw std::invalid_argument("Dataset: non-finite reward");
  }
}

CountTable CountTable::from(const Dataset& dataset) {
  CountTable c;
  c.n_sa = Eigen::MatrixXi::Zero(dataset.n_states(), dataset.n_actions());
  for (const auto& t : dataset.records()) ++c.n_sa(t.s, t.a);
  c.n_s = c.n_sa.rowwise().sum();
  c.n_total = static_cast<long>(dataset.size());
  return c;
}

double CountTable::coverage() const {
  return static_cast<double>((n_sa.array() > 0).count()) / static_cast<double>(n_sa.size());
}

Dataset generate_dataset(const TabularMdp& mdp, const PolicyTable& behavior, long n_transitions,
                         std::uint64_t seed, int episode_length) {
  if (n_transitions < 1) throw std::invalid_argument("generate_dataset: need at least one transition");
  if (episode_length < 1) throw std::invalid_argument("generate_dataset: episode length must be positive");
  if (behavior.n_states() != mdp.n_states() || behavior.n_actions() != mdp.n_actions())
    throw std::invalid_argument("generate_dataset: behavior shape mismatch");
  Rng rng(seed);
  std::vector<Transition> records;
  records.reserve(n_transitions);
  int s = rng.categorical(mdp.initial_dist());
  int step = 0;
  for (long i = 0; i < n_transitions; ++i) {
    if (step == episode_length) {
      s = rng.categorical(mdp.initial_dist());
      step = 0;
    }
    int a = rng.categorical(behavior.probs().row(s).transpose());
    int s2 = rng.categorical(mdp.next_state_dist(s, a).transpose());
    records.push_back({s, a, s2, mdp.reward()(s, a)});
    s = s2;
    ++step;
  }
  return Dataset(mdp.n_states(), mdp.n_actions(), std::move(records));
}

Eigen::VectorXd dataset_start_distribution(const Dataset& dataset, InitialStateSampling mode) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dataset.n_states());
  for (const auto& t : dataset.records()) {
    if (mode == InitialStateSampling::kUniformRecords)
      w[t.s] += 1.0;
    else
      w[t.s] = 1.0;
  }
  return w / w.sum();
}

TabularMdp empirical_mdp(const Dataset& dataset, double gamma, double smoothing,
                         const std::optional<Eigen::VectorXd>& initial_dist) {
  if (smoothing < 0.0) throw std::invalid_argument("empirical_mdp: negative smoothing");
  const int ns = dataset.n_states(), na = dataset.n_actions();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns) * na, ns);
  Eigen::MatrixXd reward_sum = Eigen::MatrixXd::Zero(ns, na);
  Eigen::MatrixXd visits = Eigen::MatrixXd::Zero(ns, na);
  for (const auto& t : dataset.records()) {
    counts(static_cast<Eigen::Index>(t.s) * na + t.a, t.s_next) += 1.0;
    reward_sum(t.s, t.a) += t.r;
    visits(t.s, t.a) += 1.0;
  }
  Eigen::MatrixXd transition(counts.rows(), ns);
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    double total = counts.row(i).sum() + smoothing * ns;
    if (total > 0.0)
      transition.row(i) = (counts.row(i).array() + smoothing) / total;
    else
      transition.row(i).setConstant(1.0 / ns);
  }
  Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(ns, na);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a)
      if (visits(s, a) > 0.0) reward(s, a) = reward_sum(s, a) / visits(s, a);
  Eigen::VectorXd mu = initial_dist ? *initial_dist
                                    : dataset_start_distribution(dataset, InitialStateSampling::kUniformStates);
  return TabularMdp(ns, na, std::move(transition), std::move(reward), std::move(mu), gamma);
}

PolicyTable behavior_mle(const Dataset& dataset) {
  CountTable c = CountTable::from(dataset);
  Eigen::MatrixXd probs(c.n_states(), c.n_actions());
  for (int s = 0; s < c.n_states(); ++s) {
    if (c.n_s[s] == 0)
      probs.row(s).setConstant(1.0 / c.n_actions());
    else
      probs.row(s) = c.n_sa.row(s).cast<double>() / static_cast<double>(c.n_s[s]);
  }
  return PolicyTable(std::move(probs));
}

OccupancyVector dataset_occupancy(const CountTable& counts) {
  return OccupancyVector(counts.n_sa.cast<double>() / static_cast<double>(counts.n_total));
}

Eigen::MatrixXd sampling_error_bound(const CountTable& counts, const BoundConstants& constants) {
  constants.validate();
  Eigen::MatrixXd n = counts.n_sa.cast<double>().cwiseMax(1.0);
  return constants.c_rt_delta * n.cwiseSqrt().cwiseInverse();
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out << "# s a s_next r\n";
  for (const auto& t : dataset.records())
    out << t.s << ' ' << t.a << ' ' << t.s_next << ' ' << format_double(t.r) << '\n';
}

Dataset read_dataset(std::istream& in, int n_states, int n_actions, const std::string& source) {
  std::vector<Transition> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string w;
    while (ss >> w) tok.push_back(w);
    if (tok.empty()) continue;
    std::string ctx = source + ":" + std::to_string(line_no);
    if (tok.size() != 4) throw IoError(ctx + ": expected 's a s_next r'");
    Transition t{parse_int(tok[0], ctx), parse_int(tok[1], ctx), parse_int(tok[2], ctx),
                 parse_double(tok[3], ctx)};
    if (t.s < 0 || t.s >= n_states || t.s_next < 0 || t.s_next >= n_states || t.a < 0 ||
        t.a >= n_actions)
      throw IoError(ctx + ": id out of range");
    records.push_back(t);
  }
  if (records.empty()) throw IoError(source + ": dataset has no transitions");
  return Dataset(n_states, n_actions, std::move(records));
}

void save_dataset(const std::string& path, const Dataset& dataset) {
  std::ostringstream ss;
  write_dataset(ss, dataset);
  write_file_atomic(path, ss.str());
}

Dataset load_dataset(const std::string& path, int n_states, int n_actions) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file '" + path + "'");
  return read_dataset(in, n_states, n_actions, path);
}

}  // namespace dromo
