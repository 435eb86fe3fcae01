#pragma once

#include "dromo/critic.hpp"
#include "dromo/dynamics_model.hpp"
#include "dromo/offline_data.hpp"

namespace dromo {

struct MopoConfig {
  double lambda_pen = 0.0;  // initial penalty temperature
  double delta_t = 1.0;     // entropy budget
  double eta_alpha = 0.01;  // dual step size
  bool auto_temp = false;
  int max_temp_steps = 1000;

  void validate() const;
};

// Q = T_hat Q_prev - beta (rho - d) / d_f; alpha is ignored.
QTable combo_critic_update(const QTable& q_prev, const InterpolatedWorld& world,
                           const CriticConfig& cfg, const LearnedModel& model,
                           const TabularMdp& empirical);

// Model MDP with reward r_hat - lambda * entropy(T_hat(.|s, a)).
TabularMdp mopo_penalized_mdp(const LearnedModel& model, double lambda);

// E[log T_hat(s'|s, a)] over dataset records, each (s, a) weighted by visit
// restricted to pairs that have records. Falls back to record frequencies when
// visit has no mass on the dataset support.
double expected_log_likelihood(const TabularMdp& model, const OccupancyVector& visit,
                               const Dataset& samples);

// alpha <- max(0, alpha - eta (E[log T_hat] + delta_t)).
double mopo_temperature_step(double alpha_t, const LearnedModel& model,
                             const OccupancyVector& visit, const Dataset& samples,
                             const MopoConfig& cfg);

}  // namespace dromo
