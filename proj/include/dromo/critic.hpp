#pragma once

#include <Eigen/Dense>

#include "dromo/dynamics_model.hpp"
#include "dromo/mdp.hpp"
#include "dromo/offline_data.hpp"

namespace dromo {

// Which side f weights in d_f. kVerbatim: d_f = f rho + (1 - f) d.
// kDataWeighted: d_f = f d + (1 - f) rho. pi_f and the mixed backup are the
// same under both.
enum class InterpConvention { kVerbatim, kDataWeighted };

// kExactMinimizer solves the per-state critic problem to stationarity.
// kClosedForm iterates the shrink-toward-zero formula with
// lambda = alpha (1 - pi_f(a|s)) to its own fixed point; it is kept for
// comparison and is not a stationary point of the objective in general.
enum class CriticRule { kExactMinimizer, kClosedForm };

struct CriticConfig {
  double alpha = 0.0;
  double beta = 0.0;
  double f = 0.5;
  // Budget for the closed-form fixed point (sweeps, max |dQ|).
  int inner_iters = 50;
  double inner_tol = 1e-10;
  CriticRule rule = CriticRule::kExactMinimizer;

  void validate() const;
};

struct InterpolatedWorld {
  OccupancyVector rho;
  OccupancyVector d;
  OccupancyVector d_f;
  PolicyTable pi_f;
  PolicyTable policy;
  PolicyTable behavior;
  CountTable counts;
  Eigen::VectorXd initial_dist;
  double gamma;
  double f;
  InterpConvention convention;

  int n_states() const { return rho.n_states(); }
  int n_actions() const { return rho.n_actions(); }
  // |D(s)| clamped to at least 1.
  Eigen::VectorXd clamped_state_counts() const;
  // max(1, |D(s)|) / |D|, the behavior state marginal used in sqrt-denominators.
  Eigen::VectorXd behavior_state_marginal() const;
};

// Worlds with rho supplied by the caller (analytic occupancy or buffer counts).
InterpolatedWorld make_world(OccupancyVector rho, const CountTable& counts,
                             const PolicyTable& policy, const PolicyTable& behavior, double f,
                             const Eigen::VectorXd& initial_dist, double gamma,
                             InterpConvention convention = InterpConvention::kVerbatim);

// rho is the occupancy of policy on the model MDP.
InterpolatedWorld build_world(const LearnedModel& model, const PolicyTable& policy,
                              const PolicyTable& behavior, double f,
                              InterpConvention convention = InterpConvention::kVerbatim);

// f T^pi_empirical q + (1 - f) T^pi_model q.
QTable mixed_backup(const QTable& q, const TabularMdp& model, const TabularMdp& empirical,
                    const PolicyTable& policy, double f);

// backup - beta (rho - d) / d_f where d_f > 0; backup elsewhere.
Eigen::MatrixXd penalized_target(const QTable& backup, const InterpolatedWorld& world, double beta);

// 1/2 E_{d_f}[(Q - backup)^2]
//   + alpha sum_s d_f(s) sqrt(Var_{pi_f}(Q(s,.)) / max(1, |D(s)|))
//   + beta (E_rho[Q] - E_d[Q]).
double critic_objective(const QTable& q, const InterpolatedWorld& world, const CriticConfig& cfg,
                        const QTable& backup);

// Analytic gradient of critic_objective; at Var = 0 the variance term
// contributes its minimal-norm subgradient 0.
Eigen::MatrixXd critic_objective_gradient(const QTable& q, const InterpolatedWorld& world,
                                          const CriticConfig& cfg, const QTable& backup);

struct CriticStep {
  QTable q;
  bool converged = true;
  // kExactMinimizer: largest |gradient| over entries with d_f > 0, ignoring
  // states whose pi_f-variance collapsed to 0 (a kink of the objective).
  // kClosedForm: last max |dQ| of the fixed-point sweep.
  double residual = 0.0;
};

// Minimizes critic_objective for a given backup. Entries with d_f = 0 stay at
// the backup.
CriticStep critic_update_from_backup(const QTable& backup, const InterpolatedWorld& world,
                                     const CriticConfig& cfg, const QTable& q_prev);

// One critic step: backup with world.policy, then critic_update_from_backup.
CriticStep critic_update(const QTable& q_prev, const InterpolatedWorld& world,
                         const CriticConfig& cfg, const LearnedModel& model,
                         const TabularMdp& empirical);

struct CriticRun {
  QTable q;
  bool converged = false;
  int iterations = 0;
  double last_change = 0.0;
};

CriticRun run_critic(const QTable& q0, const InterpolatedWorld& world, const CriticConfig& cfg,
                     const LearnedModel& model, const TabularMdp& empirical, int k_max, double tol);

// Var_{pi}(q(s, .)) per state.
Eigen::VectorXd policy_variance(const PolicyTable& pi, const QTable& q);

}  // namespace dromo
