#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dromo/mdp.hpp"

namespace dromo {

struct Transition {
  int s;
  int a;
  int s_next;
  double r;

  bool operator==(const Transition&) const = default;
};

class Dataset {
 public:
  Dataset(int n_states, int n_actions, std::vector<Transition> records);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<Transition>& records() const { return records_; }
  const Transition& operator[](std::size_t i) const { return records_[i]; }

 private:
  int n_states_;
  int n_actions_;
  std::vector<Transition> records_;
};

struct CountTable {
  Eigen::MatrixXi n_sa;
  Eigen::VectorXi n_s;
  long n_total = 0;

  static CountTable from(const Dataset& dataset);
  int n_states() const { return static_cast<int>(n_sa.rows()); }
  int n_actions() const { return static_cast<int>(n_sa.cols()); }
  // Fraction of (s, a) pairs with at least one record.
  double coverage() const;
};

// Where model rollouts (and the model's initial distribution) start.
enum class InitialStateSampling { kUniformStates, kUniformRecords };

// Rolls out behavior on mdp, restarting from mu every episode_length steps.
Dataset generate_dataset(const TabularMdp& mdp, const PolicyTable& behavior, long n_transitions,
                         std::uint64_t seed, int episode_length = 100);

// Start-state distribution over the states that appear as s in the dataset.
Eigen::VectorXd dataset_start_distribution(const Dataset& dataset, InitialStateSampling mode);

// Transition rows (count + smoothing) / (total + smoothing |S|), uniform where
// the row has no mass; rewards are sample means, 0 where unvisited. Without an
// explicit initial distribution the uniform-over-visited-states one is used.
TabularMdp empirical_mdp(const Dataset& dataset, double gamma, double smoothing,
                         const std::optional<Eigen::VectorXd>& initial_dist = std::nullopt);

// pi^b(a|s) = n_sa / n_s, uniform on unvisited states.
PolicyTable behavior_mle(const Dataset& dataset);

// Dataset occupancy d(s, a) = n_sa / |D|.
OccupancyVector dataset_occupancy(const CountTable& counts);

// C_{r,T,delta} / sqrt(max(1, n_sa)).
Eigen::MatrixXd sampling_error_bound(const CountTable& counts, const BoundConstants& constants);

void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in, int n_states, int n_actions,
                     const std::string& source = "<stream>");
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path, int n_states, int n_actions);

}  // namespace dromo
