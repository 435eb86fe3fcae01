#include "dromo/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dromo {

DeviationTerms truth_deviation(const TabularMdp& model, const TabularMdp& truth) {
  Eigen::MatrixXd tv = tv_distance(model, truth);
  return {(model.reward() - truth.reward()).cwiseAbs().maxCoeff(), tv.maxCoeff()};
}

DeviationTerms concentration_deviation(const CountTable& counts, const BoundConstants& constants) {
  constants.validate();
  double n_min = std::max(1, counts.n_sa.minCoeff());
  double root = std::sqrt(n_min);
  return {constants.c_r_delta / root, std::min(1.0, constants.c_t_delta / root)};
}

PenaltyDirection penalty_direction(const InterpolatedWorld& world) {
  PenaltyDirection out;
  for (int s = 0; s < world.n_states(); ++s)
    for (int a = 0; a < world.n_actions(); ++a) {
      double w = world.d_f(s, a);
      if (!(w > 0.0)) continue;
      double phi = (world.rho(s, a) - world.d(s, a)) / w;
      out.on_rho += world.rho(s, a) * phi;
      out.on_data += world.d(s, a) * phi;
    }
  return out;
}

double cql_divergence(const InterpolatedWorld& world) {
  Eigen::VectorXd rho_s = world.rho.state_marginal();
  Eigen::VectorXd db = world.behavior_state_marginal();
  return (rho_s.array().square() / db.array()).sum() - 1.0;
}

double policy_spread(const InterpolatedWorld& world, double tv_weight) {
  double worst = 0.0;
  for (int s = 0; s < world.n_states(); ++s) {
    auto pi = world.policy.probs().row(s);
    double tv = 0.5 * (pi - world.behavior.probs().row(s)).cwiseAbs().sum();
    worst = std::max(worst, 1.0 - pi.squaredNorm() + tv_weight * tv);
  }
  return worst;
}

ThresholdReport beta_threshold(const InterpolatedWorld& world, const CriticConfig& cfg,
                               const DeviationTerms& deviation, const BoundConstants& constants) {
  constants.validate();
  cfg.validate();
  const double g = world.gamma;
  const double rmax = constants.r_max;
  const double n_total = static_cast<double>(world.counts.n_total);
  ThresholdReport rep;
  rep.nu = penalty_direction(world).on_rho;
  rep.d_cql = cql_divergence(world);
  rep.reward_term = deviation.reward_gap;
  rep.tv_term = 2.0 * g * rmax / (1.0 - g) * deviation.tv_gap;
  rep.sampling_term = constants.c_rt_delta * rmax / ((1.0 - g) * std::sqrt(n_total));
  rep.alpha_term = cfg.alpha * policy_spread(world, 1.0) * rmax *
                   std::sqrt(constants.kappa_var * world.n_states() * (rep.d_cql + 1.0)) /
                   ((1.0 - g) * std::sqrt(n_total));
  const int na = world.n_actions();
  rep.alpha_max = na > 1 ? (1.0 - g) *
                               std::sqrt(world.clamped_state_counts().minCoeff() / constants.kappa_var) /
                               ((na - 1) * rmax)
                         : std::numeric_limits<double>::infinity();
  rep.alpha_ok = cfg.alpha <= rep.alpha_max;
  if (!(rep.nu > 1e-14)) {
    rep.degenerate = true;
    rep.threshold = 0.0;
    rep.note = "on-support regime; any beta suffices";
    return rep;
  }
  rep.threshold = (rep.reward_term + rep.tv_term + rep.sampling_term + rep.alpha_term) / rep.nu;
  return rep;
}

GapReport check_gap_expanding(const QTable& q_hat, const QTable& q_reference,
                              const InterpolatedWorld& world) {
  Eigen::MatrixXd diff = world.d.mass() - world.rho.mass();
  GapReport rep;
  rep.gap_penalized = diff.cwiseProduct(q_hat.values).sum();
  rep.gap_reference = diff.cwiseProduct(q_reference.values).sum();
  rep.degenerate = diff.cwiseAbs().maxCoeff() == 0.0;
  rep.pass = rep.degenerate ? std::abs(rep.gap_penalized - rep.gap_reference) <= 1e-10
                            : rep.gap_penalized > rep.gap_reference;
  return rep;
}

LambdaBoundReport lambda_expectation_bound(const InterpolatedWorld& world, const CriticConfig& cfg,
                                           const BoundConstants& constants, const QTable& q) {
  constants.validate();
  LambdaBoundReport rep;
  Eigen::VectorXd var = policy_variance(world.pi_f, q);
  rep.min_variance = var.minCoeff();
  rep.assumption_ok = rep.min_variance >= 1.0 / constants.kappa_var;
  const double n_total = static_cast<double>(world.counts.n_total);
  rep.rhs = cfg.alpha * policy_spread(world, world.f) *
            std::sqrt(constants.kappa_var * world.n_states() * (cql_divergence(world) + 1.0) / n_total);
  if (!rep.assumption_ok) return rep;
  Eigen::VectorXd counts = world.clamped_state_counts();
  for (int s = 0; s < world.n_states(); ++s) {
    double root = std::sqrt(var[s] * counts[s]);
    for (int a = 0; a < world.n_actions(); ++a)
      rep.lhs += world.rho(s, a) * cfg.alpha * (1.0 - world.pi_f(s, a)) / root;
  }
  rep.pass = rep.lhs <= rep.rhs;
  return rep;
}

SlackTerms lower_bound_slack_terms(const InterpolatedWorld& world, const TabularMdp& model,
                                   const TabularMdp& truth, const BoundConstants& constants) {
  constants.validate();
  const int ns = truth.n_states(), na = truth.n_actions();
  const double g = truth.gamma();
  Eigen::MatrixXd p = pair_transition(truth, world.policy);
  auto solver = (Eigen::MatrixXd::Identity(p.rows(), p.cols()) - g * p).partialPivLu();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(ns, na);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a)
      if (world.d_f(s, a) > 0.0) phi(s, a) = (world.rho(s, a) - world.d(s, a)) / world.d_f(s, a);
  Eigen::MatrixXd model_dev = (model.reward() - truth.reward()).cwiseAbs() +
                              2.0 * g * constants.r_max / (1.0 - g) * tv_distance(model, truth);
  Eigen::MatrixXd sampling = constants.c_rt_delta * constants.r_max / (1.0 - g) *
                             world.counts.n_sa.cast<double>().cwiseMax(1.0).cwiseSqrt().cwiseInverse();
  auto accumulate = [&](const Eigen::MatrixXd& x) {
    return unflatten(solver.solve(flatten(x)), ns, na);
  };
  return {accumulate(phi), constants.c_s * accumulate(model_dev), constants.c_s * accumulate(sampling)};
}

}  // namespace dromo
