#include "dromo/instances.hpp"

#include <cmath>

#include "dromo/envs.hpp"
#include "dromo/rng.hpp"

namespace dromo {

PolicyTable random_policy(int n_states, int n_actions, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd p(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) p.row(s) = rng.dirichlet(n_actions).transpose();
  return PolicyTable(std::move(p));
}

OfflineInstance make_offline_instance(std::uint64_t seed, const InstanceShape& shape) {
  Rng rng(seed);
  int ns = shape.min_states + rng.below(shape.max_states - shape.min_states + 1);
  int na = shape.min_actions + rng.below(shape.max_actions - shape.min_actions + 1);
  long n = shape.min_records +
           static_cast<long>(rng.uniform() * static_cast<double>(shape.max_records - shape.min_records + 1));
  TabularMdp truth = make_random_mdp(ns, na, shape.gamma, derive_seed(seed, 1));
  PolicyTable generating = random_policy(ns, na, derive_seed(seed, 2));
  Dataset data = generate_dataset(truth, generating, n, derive_seed(seed, 3), 20);
  LearnedModel model = fit_model(data, shape.gamma, shape.model_smoothing, truth.initial_dist());
  TabularMdp empirical = empirical_mdp(data, shape.gamma, 0.0, truth.initial_dist());
  PolicyTable behavior = behavior_mle(data);
  PolicyTable policy = random_policy(ns, na, derive_seed(seed, 4));
  return OfflineInstance{std::move(truth), std::move(data),     std::move(model),
                         std::move(empirical), std::move(behavior), std::move(policy)};
}

BoundConstants calibrated_constants(const TabularMdp& truth, const TabularMdp& empirical,
                                    long n_records) {
  BoundConstants c;
  c.r_max = std::max(truth.reward_bound(), 1e-12);
  const double g = truth.gamma();
  Eigen::MatrixXd tv(truth.n_states(), truth.n_actions());
  for (int s = 0; s < truth.n_states(); ++s)
    for (int a = 0; a < truth.n_actions(); ++a)
      tv(s, a) = 0.5 * (truth.next_state_dist(s, a) - empirical.next_state_dist(s, a)).cwiseAbs().sum();
  Eigen::MatrixXd dev = (truth.reward() - empirical.reward()).cwiseAbs() + 2.0 * g * c.r_max / (1.0 - g) * tv;
  c.c_rt_delta = dev.maxCoeff() * (1.0 - g) * std::sqrt(static_cast<double>(n_records)) / c.r_max;
  return c;
}

InterpolatedWorld instance_world(const OfflineInstance& inst, double f, InterpConvention convention) {
  return build_world(inst.model, inst.policy, inst.behavior, f, convention);
}

QTable random_q(int n_states, int n_actions, double scale, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd q(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) q(s, a) = rng.uniform(-scale, scale);
  return QTable{q};
}

FiniteDistribution random_distribution(int support, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd z(support);
  for (int i = 0; i < support; ++i) z(i) = rng.uniform(-5.0, 5.0);
  return FiniteDistribution(z, rng.dirichlet(support));
}

FeatureMap random_features(int rows, int dim, const Eigen::VectorXd& d_f, std::uint64_t seed) {
  Rng rng(seed);
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd f(rows, dim);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < dim; ++j) f(i, j) = rng.normal();
    FeatureMap map(std::move(f));
    if (map.condition_number(d_f) < 1e8 || attempt == 50) return map;
  }
}

}  // namespace dromo
