#pragma once

// Seeded random problem generators shared by the verification suites and the
// tests. Every generator is a pure function of its seed.

#include <cstdint>

#include "dromo/critic.hpp"
#include "dromo/dro_surrogate.hpp"
#include "dromo/linear.hpp"

namespace dromo {

struct InstanceShape {
  int min_states = 2;
  int max_states = 6;
  int min_actions = 2;
  int max_actions = 4;
  long min_records = 40;
  long max_records = 400;
  double gamma = 0.9;
  double model_smoothing = 0.5;
};

// A true MDP, an offline dataset from a random behavior policy, the model and
// empirical MDPs fitted to it (both started from the truth's mu so that
// occupancies line up with E_{mu, pi}), and a random target policy.
struct OfflineInstance {
  TabularMdp truth;
  Dataset dataset;
  LearnedModel model;
  TabularMdp empirical;
  PolicyTable behavior;  // maximum-likelihood estimate from the dataset
  PolicyTable policy;
};

OfflineInstance make_offline_instance(std::uint64_t seed, const InstanceShape& shape = {});

// Random policy with Dirichlet(1) rows.
PolicyTable random_policy(int n_states, int n_actions, std::uint64_t seed);

// Constants with C_{r,T,delta} chosen as the smallest value for which
// C R_max / ((1 - gamma) sqrt|D|) covers |r - r_emp| + 2 gamma R_max / (1 - gamma) TV
// at every (s, a). r_max is the truth's reward bound.
BoundConstants calibrated_constants(const TabularMdp& truth, const TabularMdp& empirical,
                                    long n_records);

// World whose rho is the occupancy of the instance policy on the model.
InterpolatedWorld instance_world(const OfflineInstance& inst, double f,
                                 InterpConvention convention = InterpConvention::kVerbatim);

// Random Q table with entries in [-scale, scale].
QTable random_q(int n_states, int n_actions, double scale, std::uint64_t seed);

// Random finite distribution with the given support size; values in [-5, 5].
FiniteDistribution random_distribution(int support, std::uint64_t seed);

// Gaussian feature matrix, re-drawn until the d_f-weighted Gram matrix has
// condition number below 1e8.
FeatureMap random_features(int rows, int dim, const Eigen::VectorXd& d_f, std::uint64_t seed);

}  // namespace dromo
