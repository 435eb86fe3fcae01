#include "dromo/dynamics_model.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dromo/io.hpp"

namespace dromo {

LearnedModel fit_model(const Dataset& dataset, double gamma, double smoothing,
                       const std::optional<Eigen::VectorXd>& initial_dist) {
  return LearnedModel{empirical_mdp(dataset, gamma, smoothing, initial_dist),
                      CountTable::from(dataset)};
}

namespace {

void require_same_shape(const TabularMdp& a, const TabularMdp& b) {
  if (a.n_states() != b.n_states() || a.n_actions() != b.n_actions())
    throw std::invalid_argument("MDP shapes differ");
}

}  // namespace

Eigen::MatrixXd tv_distance(const TabularMdp& a, const TabularMdp& b) {
  require_same_shape(a, b);
  Eigen::VectorXd tv = 0.5 * (a.transition() - b.transition()).cwiseAbs().rowwise().sum();
  return unflatten(tv, a.n_states(), a.n_actions());
}

Eigen::MatrixXd tv_distance(const LearnedModel& model, const TabularMdp& truth) {
  return tv_distance(model.mdp_hat, truth);
}

Eigen::MatrixXd row_entropy(const TabularMdp& mdp) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(mdp.n_pairs());
  for (int i = 0; i < mdp.n_pairs(); ++i)
    for (int s2 = 0; s2 < mdp.n_states(); ++s2) {
      double p = mdp.transition()(i, s2);
      if (p > 0.0) h[i] -= p * std::log(p);
    }
  return unflatten(h, mdp.n_states(), mdp.n_actions());
}

Eigen::MatrixXd uncertainty(const LearnedModel& model) { return row_entropy(model.mdp_hat); }

double l1_calibration_error(const TabularMdp& model, const TabularMdp& truth,
                            const OccupancyVector& visit, int bins) {
  require_same_shape(model, truth);
  if (bins < 1) throw std::invalid_argument("l1_calibration_error: bins must be positive");
  if (visit.n_states() != model.n_states() || visit.n_actions() != model.n_actions())
    throw std::invalid_argument("l1_calibration_error: visit shape mismatch");
  const int ns = model.n_states();
  Eigen::MatrixXd residual = Eigen::MatrixXd::Zero(ns, bins);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < model.n_actions(); ++a) {
      double w = visit(s, a);
      if (w == 0.0) continue;
      int i = model.pair(s, a);
      for (int y = 0; y < ns; ++y) {
        double p = model.transition()(i, y);
        int b = std::min(bins - 1, static_cast<int>(p * bins));
        residual(y, b) += w * (truth.transition()(i, y) - p);
      }
    }
  return residual.cwiseAbs().sum();
}

double l1_calibration_error(const LearnedModel& model, const TabularMdp& truth,
                            const OccupancyVector& visit, int bins) {
  return l1_calibration_error(model.mdp_hat, truth, visit, bins);
}

CalibrationReport calibration_value_gap_check(const TabularMdp& model, const TabularMdp& truth,
                                              const PolicyTable& policy,
                                              const BoundConstants& constants, int bins) {
  require_same_shape(model, truth);
  constants.validate();
  if (constants.r_max < truth.reward_bound())
    throw std::invalid_argument("calibration_value_gap_check: r_max below the reward bound");
  if (model.gamma() != truth.gamma())
    throw std::invalid_argument("calibration_value_gap_check: discount factors differ");
  TabularMdp virtual_mdp = truth.with_transition(model.transition());
  const double g = truth.gamma();
  CalibrationReport rep;
  rep.gap = std::abs(policy_return(virtual_mdp, policy) - policy_return(truth, policy));
  rep.calibration = l1_calibration_error(model, truth, occupancy(truth, policy), bins);
  rep.slack = constants.r_max * g / (1.0 - g) / (2.0 * bins);
  rep.bound = g * constants.r_max / (1.0 - g) * rep.calibration + rep.slack;
  rep.pass = rep.gap <= rep.bound;
  return rep;
}

CalibrationReport calibration_value_gap_check(const LearnedModel& model, const TabularMdp& truth,
                                              const PolicyTable& policy,
                                              const BoundConstants& constants, int bins) {
  return calibration_value_gap_check(model.mdp_hat, truth, policy, constants, bins);
}

void write_model_diagnostics(std::ostream& out, const LearnedModel& model, const TabularMdp& truth) {
  Eigen::MatrixXd tv = tv_distance(model, truth);
  Eigen::MatrixXd h = uncertainty(model);
  out << "s,a,tv,entropy,count\n";
  for (int s = 0; s < truth.n_states(); ++s)
    for (int a = 0; a < truth.n_actions(); ++a)
      out << s << ',' << a << ',' << format_double(tv(s, a)) << ',' << format_double(h(s, a)) << ','
          << model.source_counts.n_sa(s, a) << '\n';
}

}  // namespace dromo
