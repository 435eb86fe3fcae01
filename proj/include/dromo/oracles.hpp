#pragma once

// Slow reference solvers used only by tests and the verification harness.
// They share no numerical code path with the solvers they check.

#include <cstdint>

#include <Eigen/Dense>

#include "dromo/critic.hpp"
#include "dromo/dro_surrogate.hpp"
#include "dromo/linear.hpp"
#include "dromo/mdp.hpp"

namespace dromo::oracle {

// Q^pi by fixed-point iteration until the sup-norm change is below tol.
QTable value_iteration_q(const TabularMdp& mdp, const PolicyTable& policy, double tol = 1e-13,
                         int max_iters = 1000000);

// Average discounted return of `episodes` rollouts truncated at `horizon`.
double monte_carlo_return(const TabularMdp& mdp, const PolicyTable& policy, int episodes,
                          int horizon, std::uint64_t seed);

// Howard policy iteration with iterative evaluation; greedy steps keep the
// lowest action index among exact ties.
PolicyTable policy_iteration(const TabularMdp& mdp);

// sum_{t < horizon} discount^t nu_t(s) pi(a|s), normalized, where nu_0 = start
// and nu_{t+1} = nu_t P^pi.
OccupancyVector truncated_occupancy(const TabularMdp& mdp, const PolicyTable& policy,
                                    const Eigen::VectorXd& start, int horizon, double discount);

// Sup of E_p[Z] over the chi-square ball by searching directions in the
// zero-sum subspace and walking each to the feasible boundary.
double brute_force_sup(const ChiSquareBall& ball, int grid = 21, int rounds = 40);

// Minimizer of critic_objective by cyclic exact line searches over
// coordinates, the per-state all-ones direction, and pairwise differences.
// Stops once a sweep lowers the objective by at most tol (relative).
QTable coordinate_descent_critic(const InterpolatedWorld& world, const CriticConfig& cfg,
                                 const QTable& backup, const QTable& start, int max_sweeps = 20000,
                                 double tol = 1e-15);

// critic_objective written as explicit loops.
double sum_critic_objective(const QTable& q, const InterpolatedWorld& world,
                            const CriticConfig& cfg, const QTable& backup);

// strict_objective written as explicit loops.
double sum_strict_objective(const Eigen::VectorXd& omega, const FeatureMap& features,
                            const InterpolatedWorld& world, const CriticConfig& cfg,
                            const QTable& backup);

}  // namespace dromo::oracle
