#include "dromo/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace dromo {

void MopoConfig::validate() const {
  if (!(eta_alpha > 0.0)) throw std::invalid_argument("MopoConfig: eta_alpha must be positive");
  if (!(lambda_pen >= 0.0)) throw std::invalid_argument("MopoConfig: lambda_pen must be nonnegative");
  if (max_temp_steps < 1) throw std::invalid_argument("MopoConfig: max_temp_steps must be positive");
}

QTable combo_critic_update(const QTable& q_prev, const InterpolatedWorld& world,
                           const CriticConfig& cfg, const LearnedModel& model,
                           const TabularMdp& empirical) {
  cfg.validate();
  QTable backup = mixed_backup(q_prev, model.mdp_hat, empirical, world.policy, cfg.f);
  return QTable{penalized_target(backup, world, cfg.beta)};
}

TabularMdp mopo_penalized_mdp(const LearnedModel& model, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("mopo_penalized_mdp: negative penalty");
  const TabularMdp& m = model.mdp_hat;
  if (lambda == 0.0) return m;
  return m.with_reward(m.reward() - lambda * row_entropy(m));
}

double expected_log_likelihood(const TabularMdp& model, const OccupancyVector& visit,
                               const Dataset& samples) {
  const int ns = model.n_states(), na = model.n_actions();
  if (samples.n_states() != ns || samples.n_actions() != na || visit.n_states() != ns ||
      visit.n_actions() != na)
    throw std::invalid_argument("expected_log_likelihood: shape mismatch");
  Eigen::MatrixXd log_sum = Eigen::MatrixXd::Zero(ns, na);
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(ns, na);
  for (const auto& t : samples.records()) {
    double p = model.transition()(model.pair(t.s, t.a), t.s_next);
    if (!(p > 0.0))
      throw std::domain_error("expected_log_likelihood: model assigns zero probability to a record");
    log_sum(t.s, t.a) += std::log(p);
    n(t.s, t.a) += 1.0;
  }
  Eigen::MatrixXd weight = (n.array() > 0.0).select(visit.mass(), 0.0);
  if (!(weight.sum() > 0.0)) weight = n;
  weight /= weight.sum();
  double e = 0.0;
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a)
      if (n(s, a) > 0.0) e += weight(s, a) * log_sum(s, a) / n(s, a);
  return e;
}

double mopo_temperature_step(double alpha_t, const LearnedModel& model,
                             const OccupancyVector& visit, const Dataset& samples,
                             const MopoConfig& cfg) {
  cfg.validate();
  if (!(alpha_t >= 0.0)) throw std::invalid_argument("mopo_temperature_step: alpha_t must be nonnegative");
  double grad = expected_log_likelihood(model.mdp_hat, visit, samples) + cfg.delta_t;
  return std::max(0.0, alpha_t - cfg.eta_alpha * grad);
}

}  // namespace dromo
