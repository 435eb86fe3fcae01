#pragma once

#include <Eigen/Dense>

namespace dromo {

// Largest |S||A| accepted by the dense solvers.
inline constexpr int kMaxStateActions = 10000;

// Row-major flattening of an |S| x |A| table: index s * |A| + a.
Eigen::VectorXd flatten(const Eigen::MatrixXd& table);
Eigen::MatrixXd unflatten(const Eigen::VectorXd& flat, int n_states, int n_actions);

// Validates a nonnegative matrix whose rows must each sum to one. Rows off by
// less than 1e-9 are renormalized; anything worse throws std::invalid_argument.
void check_stochastic_rows(Eigen::MatrixXd& rows, const char* what);

class TabularMdp {
 public:
  // transition has one row per (s, a) pair, ordered s * n_actions + a, and
  // n_states columns.
  TabularMdp(int n_states, int n_actions, Eigen::MatrixXd transition,
             Eigen::MatrixXd reward, Eigen::VectorXd initial_dist, double gamma);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int n_pairs() const { return n_states_ * n_actions_; }
  int pair(int s, int a) const { return s * n_actions_ + a; }
  double gamma() const { return gamma_; }

  const Eigen::MatrixXd& transition() const { return transition_; }
  auto next_state_dist(int s, int a) const { return transition_.row(pair(s, a)); }
  const Eigen::MatrixXd& reward() const { return reward_; }
  const Eigen::VectorXd& initial_dist() const { return initial_; }

  // max |r(s, a)|
  double reward_bound() const;

  TabularMdp with_reward(Eigen::MatrixXd reward) const;
  TabularMdp with_transition(Eigen::MatrixXd transition) const;
  TabularMdp with_initial_dist(Eigen::VectorXd initial_dist) const;

 private:
  int n_states_;
  int n_actions_;
  Eigen::MatrixXd transition_;
  Eigen::MatrixXd reward_;
  Eigen::VectorXd initial_;
  double gamma_;
};

class PolicyTable {
 public:
  explicit PolicyTable(Eigen::MatrixXd probs);

  static PolicyTable uniform(int n_states, int n_actions);
  // One-hot rows; actions[s] must be a valid action id.
  static PolicyTable deterministic(const Eigen::VectorXi& actions, int n_actions);

  int n_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }
  const Eigen::MatrixXd& probs() const { return probs_; }
  double operator()(int s, int a) const { return probs_(s, a); }

 private:
  Eigen::MatrixXd probs_;
};

struct QTable {
  Eigen::MatrixXd values;

  static QTable zeros(int n_states, int n_actions) {
    return QTable{Eigen::MatrixXd::Zero(n_states, n_actions)};
  }
  int n_states() const { return static_cast<int>(values.rows()); }
  int n_actions() const { return static_cast<int>(values.cols()); }
};

// Probability mass over (s, a) pairs.
class OccupancyVector {
 public:
  explicit OccupancyVector(Eigen::MatrixXd mass);

  const Eigen::MatrixXd& mass() const { return mass_; }
  double operator()(int s, int a) const { return mass_(s, a); }
  Eigen::VectorXd state_marginal() const { return mass_.rowwise().sum(); }
  int n_states() const { return static_cast<int>(mass_.rows()); }
  int n_actions() const { return static_cast<int>(mass_.cols()); }

 private:
  Eigen::MatrixXd mass_;
};

struct BoundConstants {
  double r_max = 1.0;
  double c_r_delta = 0.0;
  double c_t_delta = 0.0;
  double c_rt_delta = 0.0;
  double kappa_var = 1.0;
  double c_s = 1.0;
  double delta = 0.05;

  void validate() const;
};

// Transition matrix over (s, a) pairs under policy: P[(s,a), (s',a')] =
// T(s'|s,a) pi(a'|s').
Eigen::MatrixXd pair_transition(const TabularMdp& mdp, const PolicyTable& policy);
// State-to-state kernel sum_a pi(a|s) T(s'|s,a).
Eigen::MatrixXd state_transition(const TabularMdp& mdp, const PolicyTable& policy);

QTable exact_q(const TabularMdp& mdp, const PolicyTable& policy);
Eigen::VectorXd exact_v(const TabularMdp& mdp, const PolicyTable& policy);
QTable bellman_expectation(const TabularMdp& mdp, const PolicyTable& policy, const QTable& q);
// Normalized discounted visitation d(s) pi(a|s).
OccupancyVector occupancy(const TabularMdp& mdp, const PolicyTable& policy);
double policy_return(const TabularMdp& mdp, const PolicyTable& policy);

// Per-state expectation sum_a pi(a|s) q(s, a).
Eigen::VectorXd state_values(const PolicyTable& policy, const QTable& q);
// E_{s ~ init, a ~ pi}[q(s, a)].
double initial_value(const Eigen::VectorXd& init, const PolicyTable& policy, const QTable& q);

}  // namespace dromo
