#pragma once

#include <string>

#include <Eigen/Dense>

#include "dromo/critic.hpp"

namespace dromo {

// Worst-case model error over all (s, a): max |r - r_model| and max TV.
struct DeviationTerms {
  double reward_gap = 0.0;
  double tv_gap = 0.0;
};

// Measured against the true MDP (checkers only).
DeviationTerms truth_deviation(const TabularMdp& model, const TabularMdp& truth);
// Offline substitute from the concentration constants:
// C_{r,delta} / sqrt(max(1, n_sa)) and min(1, C_{T,delta} / sqrt(max(1, n_sa))).
DeviationTerms concentration_deviation(const CountTable& counts, const BoundConstants& constants);

// nu = E_rho[(rho - d) / d_f] and its dataset counterpart E_d[(rho - d) / d_f].
struct PenaltyDirection {
  double on_rho = 0.0;
  double on_data = 0.0;
};
PenaltyDirection penalty_direction(const InterpolatedWorld& world);

// sum_s rho(s)^2 / d_b(s) - 1 with d_b = behavior_state_marginal().
double cql_divergence(const InterpolatedWorld& world);

// max_s (1 - ||pi(.|s)||^2 + weight * TV(pi(.|s), pi_b(.|s))).
double policy_spread(const InterpolatedWorld& world, double tv_weight);

struct ThresholdReport {
  double threshold = 0.0;
  double nu = 0.0;
  double reward_term = 0.0;
  double tv_term = 0.0;
  double sampling_term = 0.0;
  double alpha_term = 0.0;
  double d_cql = 0.0;
  // nu <= 0: no beta is needed on this world.
  bool degenerate = false;
  // alpha <= (1 - gamma) sqrt(min_s |D(s)| / kappa) / ((|A| - 1) R_max).
  double alpha_max = 0.0;
  bool alpha_ok = true;
  std::string note;
};

ThresholdReport beta_threshold(const InterpolatedWorld& world, const CriticConfig& cfg,
                               const DeviationTerms& deviation, const BoundConstants& constants);

struct GapReport {
  double gap_penalized = 0.0;  // E_d[Q_hat] - E_rho[Q_hat]
  double gap_reference = 0.0;  // E_d[Q] - E_rho[Q]
  bool degenerate = false;     // rho == d
  bool pass = false;
};

// q_reference must come from the same predecessor with alpha = beta = 0.
GapReport check_gap_expanding(const QTable& q_hat, const QTable& q_reference,
                              const InterpolatedWorld& world);

struct LambdaBoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double min_variance = 0.0;
  bool assumption_ok = false;  // min_s Var_{pi_f} Q(s, .) >= 1 / kappa
  bool pass = false;
};

// lhs = E_rho[alpha (1 - pi_f(a|s)) / sqrt(Var_{pi_f} Q(s, .) |D(s)|)],
// rhs = alpha * policy_spread(world, f) * sqrt(kappa |S| (D_CQL + 1) / |D|).
LambdaBoundReport lambda_expectation_bound(const InterpolatedWorld& world, const CriticConfig& cfg,
                                           const BoundConstants& constants, const QTable& q);

// Pointwise slack terms with the accumulation operator c_s (I - gamma P^pi)^-1
// on the true dynamics: xi1 = (I - gamma P)^-1 (rho - d) / d_f,
// xi2 = S [|r - r_model| + 2 gamma R_max / (1 - gamma) TV],
// xi3 = S [C_{r,T,delta} R_max / ((1 - gamma) sqrt(max(1, n_sa)))].
struct SlackTerms {
  Eigen::MatrixXd xi1;
  Eigen::MatrixXd xi2;
  Eigen::MatrixXd xi3;
};
SlackTerms lower_bound_slack_terms(const InterpolatedWorld& world, const TabularMdp& model,
                                   const TabularMdp& truth, const BoundConstants& constants);

}  // namespace dromo
