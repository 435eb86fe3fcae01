#include "dromo/mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dromo {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kRenormTol = 1e-9;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_distribution(Eigen::Ref<Eigen::VectorXd> p, const std::string& what) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    require(std::isfinite(p[i]), what + ": non-finite probability");
    if (p[i] < 0.0) {
      require(p[i] > -kSumTol, what + ": negative probability");
      p[i] = 0.0;
    }
  }
  double total = p.sum();
  double dev = std::abs(total - 1.0);
  if (dev <= kSumTol) return;
  require(dev < kRenormTol, what + ": probabilities sum to " + std::to_string(total));
  p /= total;
}

}  // namespace

Eigen::VectorXd flatten(const Eigen::MatrixXd& table) {
  Eigen::VectorXd flat(table.size());
  const Eigen::Index cols = table.cols();
  for (Eigen::Index s = 0; s < table.rows(); ++s)
    for (Eigen::Index a = 0; a < cols; ++a) flat[s * cols + a] = table(s, a);
  return flat;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& flat, int n_states, int n_actions) {
  require(flat.size() == static_cast<Eigen::Index>(n_states) * n_actions,
          "unflatten: size mismatch");
  Eigen::MatrixXd table(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) table(s, a) = flat[s * n_actions + a];
  return table;
}

void check_stochastic_rows(Eigen::MatrixXd& rows, const char* what) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Eigen::VectorXd row = rows.row(i).transpose();
    check_distribution(row, std::string(what) + " row " + std::to_string(i));
    rows.row(i) = row.transpose();
  }
}

TabularMdp::TabularMdp(int n_states, int n_actions, Eigen::MatrixXd transition,
                       Eigen::MatrixXd reward, Eigen::VectorXd initial_dist, double gamma)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      initial_(std::move(initial_dist)),
      gamma_(gamma) {
  require(n_states > 0 && n_actions > 0, "TabularMdp: empty state or action space");
  require(static_cast<long>(n_states) * n_actions <= kMaxStateActions,
          "TabularMdp: |S||A| exceeds " + std::to_string(kMaxStateActions));
  require(gamma >= 0.0 && gamma < 1.0, "TabularMdp: gamma must lie in [0, 1)");
  require(transition_.rows() == n_pairs() && transition_.cols() == n_states,
          "TabularMdp: transition shape mismatch");
  require(reward_.rows() == n_states && reward_.cols() == n_actions,
          "TabularMdp: reward shape mismatch");
  require(initial_.size() == n_states, "TabularMdp: initial distribution size mismatch");
  require(reward_.allFinite(), "TabularMdp: non-finite reward");
  check_stochastic_rows(transition_, "transition");
  check_distribution(initial_, "initial distribution");
}

double TabularMdp::reward_bound() const { return reward_.cwiseAbs().maxCoeff(); }

TabularMdp TabularMdp::with_reward(Eigen::MatrixXd reward) const {
  return TabularMdp(n_states_, n_actions_, transition_, std::move(reward), initial_, gamma_);
}

TabularMdp TabularMdp::with_transition(Eigen::MatrixXd transition) const {
  return TabularMdp(n_states_, n_actions_, std::move(transition), reward_, initial_, gamma_);
}

TabularMdp TabularMdp::with_initial_dist(Eigen::VectorXd initial_dist) const {
  return TabularMdp(n_states_, n_actions_, transition_, reward_, std::move(initial_dist), gamma_);
}

PolicyTable::PolicyTable(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
  require(probs_.rows() > 0 && probs_.cols() > 0, "PolicyTable: empty table");
  check_stochastic_rows(probs_, "policy");
}

PolicyTable PolicyTable::uniform(int n_states, int n_actions) {
  return PolicyTable(Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions));
}

PolicyTable PolicyTable::deterministic(const Eigen::VectorXi& actions, int n_actions) {
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(actions.size(), n_actions);
  for (Eigen::Index s = 0; s < actions.size(); ++s) {
    require(actions[s] >= 0 && actions[s] < n_actions, "PolicyTable: action out of range");
    probs(s, actions[s]) = 1.0;
  }
  return PolicyTable(std::move(probs));
}

OccupancyVector::OccupancyVector(Eigen::MatrixXd mass) : mass_(std::move(mass)) {
  require(mass_.size() > 0, "OccupancyVector: empty");
  require(mass_.allFinite(), "OccupancyVector: non-finite mass");
  for (Eigen::Index i = 0; i < mass_.size(); ++i) {
    double& m = mass_.data()[i];
    if (m < 0.0) {
      require(m > -1e-12, "OccupancyVector: negative mass");
      m = 0.0;
    }
  }
  require(std::abs(mass_.sum() - 1.0) <= 1e-10, "OccupancyVector: mass does not sum to 1");
}

void BoundConstants::validate() const {
  require(r_max >= 0.0 && c_r_delta >= 0.0 && c_t_delta >= 0.0 && c_rt_delta >= 0.0,
          "BoundConstants: negative constant");
  require(kappa_var > 0.0 && c_s > 0.0, "BoundConstants: kappa_var and c_s must be positive");
  require(delta > 0.0 && delta < 1.0, "BoundConstants: delta must lie in (0, 1)");
}

namespace {

void check_shapes(const TabularMdp& mdp, const PolicyTable& policy) {
  require(policy.n_states() == mdp.n_states() && policy.n_actions() == mdp.n_actions(),
          "policy shape does not match MDP");
}

}  // namespace

Eigen::MatrixXd pair_transition(const TabularMdp& mdp, const PolicyTable& policy) {
  check_shapes(mdp, policy);
  const int n = mdp.n_pairs();
  const int na = mdp.n_actions();
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i)
    for (int s2 = 0; s2 < mdp.n_states(); ++s2) {
      double t = mdp.transition()(i, s2);
      for (int a2 = 0; a2 < na; ++a2) p(i, s2 * na + a2) = t * policy(s2, a2);
    }
  return p;
}

Eigen::MatrixXd state_transition(const TabularMdp& mdp, const PolicyTable& policy) {
  check_shapes(mdp, policy);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(mdp.n_states(), mdp.n_states());
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a)
      p.row(s) += policy(s, a) * mdp.next_state_dist(s, a);
  return p;
}

QTable exact_q(const TabularMdp& mdp, const PolicyTable& policy) {
  Eigen::MatrixXd p = pair_transition(mdp, policy);
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(p.rows(), p.cols()) - mdp.gamma() * p;
  Eigen::VectorXd q = system.partialPivLu().solve(flatten(mdp.reward()));
  return QTable{unflatten(q, mdp.n_states(), mdp.n_actions())};
}

Eigen::VectorXd state_values(const PolicyTable& policy, const QTable& q) {
  require(q.values.rows() == policy.n_states() && q.values.cols() == policy.n_actions(),
          "Q table shape does not match policy");
  return policy.probs().cwiseProduct(q.values).rowwise().sum();
}

Eigen::VectorXd exact_v(const TabularMdp& mdp, const PolicyTable& policy) {
  return state_values(policy, exact_q(mdp, policy));
}

QTable bellman_expectation(const TabularMdp& mdp, const PolicyTable& policy, const QTable& q) {
  check_shapes(mdp, policy);
  Eigen::VectorXd v = state_values(policy, q);
  Eigen::VectorXd next = mdp.transition() * v;
  Eigen::MatrixXd out = mdp.reward() + mdp.gamma() * unflatten(next, mdp.n_states(), mdp.n_actions());
  return QTable{std::move(out)};
}

OccupancyVector occupancy(const TabularMdp& mdp, const PolicyTable& policy) {
  Eigen::MatrixXd p = state_transition(mdp, policy);
  const int n = mdp.n_states();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - mdp.gamma() * p.transpose();
  Eigen::VectorXd d = system.partialPivLu().solve((1.0 - mdp.gamma()) * mdp.initial_dist());
  d = d.cwiseMax(0.0);
  d /= d.sum();
  Eigen::MatrixXd mass = policy.probs().array().colwise() * d.array();
  return OccupancyVector(std::move(mass));
}

double policy_return(const TabularMdp& mdp, const PolicyTable& policy) {
  OccupancyVector w = occupancy(mdp, policy);
  return w.mass().cwiseProduct(mdp.reward()).sum() / (1.0 - mdp.gamma());
}

double initial_value(const Eigen::VectorXd& init, const PolicyTable& policy, const QTable& q) {
  require(init.size() == policy.n_states(), "initial distribution size mismatch");
  return init.dot(state_values(policy, q));
}

}  // namespace dromo
