#include <cmath>

#include "doctest.h"
#include "dromo/critic.hpp"
#include "dromo/instances.hpp"
#include "dromo/oracles.hpp"

using namespace dromo;

namespace {

OfflineInstance small_instance(std::uint64_t seed, int states = 4, int actions = 2) {
  InstanceShape shape;
  shape.min_states = shape.max_states = states;
  shape.min_actions = shape.max_actions = actions;
  return make_offline_instance(seed, shape);
}

QTable backup_for(const OfflineInstance& inst, const InterpolatedWorld& world, const QTable& q,
                  double f) {
  return mixed_backup(q, inst.model.mdp_hat, inst.empirical, world.policy, f);
}

// Largest central-difference partial over entries with d_f > 0.
double max_partial(const QTable& q, const InterpolatedWorld& world, const CriticConfig& cfg,
                   const QTable& backup) {
  double worst = 0.0;
  for (int s = 0; s < q.n_states(); ++s) {
    for (int a = 0; a < q.n_actions(); ++a) {
      if (!(world.d_f(s, a) > 0.0)) continue;
      const double h = 1e-6 * std::max(1.0, std::abs(q.values(s, a)));
      QTable up = q, down = q;
      up.values(s, a) += h;
      down.values(s, a) -= h;
      const double g = (oracle::sum_critic_objective(up, world, cfg, backup) -
                        oracle::sum_critic_objective(down, world, cfg, backup)) /
                       (2.0 * h);
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("interpolation endpoints") {
  const OfflineInstance inst = small_instance(1);
  const InterpolatedWorld w1 = instance_world(inst, 1.0);
  CHECK(w1.d_f.mass() == w1.rho.mass());
  CHECK(w1.pi_f.probs() == inst.behavior.probs());
  const InterpolatedWorld w0 = instance_world(inst, 0.0);
  CHECK(w0.d_f.mass() == w0.d.mass());
  CHECK(w0.pi_f.probs() == inst.policy.probs());
  const InterpolatedWorld flipped = instance_world(inst, 1.0, InterpConvention::kDataWeighted);
  CHECK(flipped.d_f.mass() == flipped.d.mass());
}

TEST_CASE("interpolation midpoint on a hand dataset") {
  // Two states, one action; records (0 -> 1) x3 and (1 -> 1) x1.
  const Dataset data(2, 1, {{0, 0, 1, 0.0}, {0, 0, 1, 0.0}, {0, 0, 1, 0.0}, {1, 0, 1, 0.0}});
  const CountTable counts = CountTable::from(data);
  Eigen::MatrixXd rho(2, 1);
  rho << 0.2, 0.8;
  Eigen::MatrixXd pi(2, 1);
  pi << 1.0, 1.0;
  const InterpolatedWorld w = make_world(OccupancyVector(rho), counts, PolicyTable(pi),
                                         PolicyTable(pi), 0.5, Eigen::Vector2d(1.0, 0.0), 0.9);
  CHECK(w.d(0, 0) == doctest::Approx(0.75));
  CHECK(w.d_f(0, 0) == doctest::Approx(0.475));
  CHECK(w.d_f(1, 0) == doctest::Approx(0.525));
  CHECK(w.behavior_state_marginal()[1] == doctest::Approx(0.25));
  CHECK_THROWS(make_world(OccupancyVector(rho), counts, PolicyTable(pi), PolicyTable(pi), 1.5,
                          Eigen::Vector2d(1.0, 0.0), 0.9));
}

TEST_CASE("critic objective examples") {
  const OfflineInstance inst = small_instance(2);
  const InterpolatedWorld world = instance_world(inst, 0.5);
  const QTable backup = random_q(4, 2, 3.0, 5);
  CriticConfig cfg;
  CHECK(critic_objective(backup, world, cfg, backup) == 0.0);

  cfg.beta = 1.0;
  const QTable c{Eigen::MatrixXd::Constant(4, 2, 1.7)};
  const double fit = 0.5 * world.d_f.mass().cwiseProduct((c.values - backup.values).cwiseAbs2()).sum();
  CHECK(critic_objective(c, world, cfg, backup) == doctest::Approx(fit).epsilon(1e-12));

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const OfflineInstance i = make_offline_instance(seed);
    const InterpolatedWorld w = instance_world(i, 0.3);
    CriticConfig k;
    k.alpha = 0.8;
    k.beta = 0.4;
    const QTable q = random_q(i.truth.n_states(), i.truth.n_actions(), 4.0, seed + 1);
    const QTable b = random_q(i.truth.n_states(), i.truth.n_actions(), 4.0, seed + 2);
    CHECK(critic_objective(q, w, k, b) ==
          doctest::Approx(oracle::sum_critic_objective(q, w, k, b)).epsilon(1e-12));
  }
}

TEST_CASE("critic objective gradient matches finite differences away from kinks") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const OfflineInstance inst = make_offline_instance(seed);
    const InterpolatedWorld w = instance_world(inst, 0.4);
    CriticConfig cfg;
    cfg.alpha = 1.2;
    cfg.beta = 0.7;
    const QTable q = random_q(inst.truth.n_states(), inst.truth.n_actions(), 2.0, seed + 40);
    const QTable b = random_q(inst.truth.n_states(), inst.truth.n_actions(), 2.0, seed + 41);
    const Eigen::MatrixXd g = critic_objective_gradient(q, w, cfg, b);
    for (int s = 0; s < q.n_states(); ++s) {
      for (int a = 0; a < q.n_actions(); ++a) {
        const double h = 1e-6;
        QTable up = q, down = q;
        up.values(s, a) += h;
        down.values(s, a) -= h;
        const double fd = (critic_objective(up, w, cfg, b) - critic_objective(down, w, cfg, b)) / (2 * h);
        CHECK(std::abs(fd - g(s, a)) < 1e-6);
      }
    }
  }
}

TEST_CASE("critic update without penalties is the backup") {
  const OfflineInstance inst = small_instance(3);
  const InterpolatedWorld w = instance_world(inst, 0.5);
  const QTable q0 = random_q(4, 2, 1.0, 9);
  CriticConfig cfg;
  const CriticStep step = critic_update(q0, w, cfg, inst.model, inst.empirical);
  CHECK((step.q.values - backup_for(inst, w, q0, 0.5).values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("critic update matches a coordinate-descent minimizer") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const OfflineInstance inst = small_instance(100 + seed);
    const InterpolatedWorld w = instance_world(inst, 0.5);
    CriticConfig cfg;
    cfg.alpha = 0.5;
    cfg.beta = 0.3;
    cfg.f = 0.5;
    const QTable q0 = random_q(4, 2, 2.0, seed);
    const QTable backup = backup_for(inst, w, q0, cfg.f);
    const CriticStep step = critic_update_from_backup(backup, w, cfg, q0);
    CHECK(step.converged);
    const QTable ref = oracle::coordinate_descent_critic(w, cfg, backup, backup);
    CHECK((step.q.values - ref.values).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK(critic_objective(step.q, w, cfg, backup) <= critic_objective(ref, w, cfg, backup) + 1e-12);
    // Stationarity away from collapsed-variance states.
    const Eigen::VectorXd var = policy_variance(w.pi_f, step.q);
    if (var.minCoeff() > 1e-8) CHECK(max_partial(step.q, w, cfg, backup) <= 1e-5);
  }
}

TEST_CASE("a fully confident action is not shrunk by the closed form") {
  const OfflineInstance inst = small_instance(4, 3, 2);
  Eigen::MatrixXd pi = inst.policy.probs();
  Eigen::MatrixXd beh = inst.behavior.probs();
  pi.row(0) << 1.0, 0.0;
  beh.row(0) << 1.0, 0.0;
  const InterpolatedWorld w =
      make_world(occupancy(inst.model.mdp_hat, PolicyTable(pi)), inst.model.source_counts,
                 PolicyTable(pi), PolicyTable(beh), 0.5, inst.truth.initial_dist(), 0.9);
  CriticConfig cfg;
  cfg.alpha = 2.0;
  cfg.rule = CriticRule::kClosedForm;
  const QTable backup = random_q(3, 2, 3.0, 11);
  const CriticStep step = critic_update_from_backup(backup, w, cfg, backup);
  if (w.d_f(0, 0) > 0.0) CHECK(step.q.values(0, 0) == backup.values(0, 0));
}

TEST_CASE("closed-form shrink factor lies in (0, 1]") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const OfflineInstance inst = make_offline_instance(seed);
    const InterpolatedWorld w = instance_world(inst, 0.5);
    CriticConfig cfg;
    cfg.alpha = 1.0;
    cfg.beta = 0.2;
    cfg.rule = CriticRule::kClosedForm;
    const QTable backup = random_q(inst.truth.n_states(), inst.truth.n_actions(), 5.0, seed);
    const Eigen::MatrixXd target = penalized_target(backup, w, cfg.beta);
    const CriticStep step = critic_update_from_backup(backup, w, cfg, backup);
    for (int s = 0; s < backup.n_states(); ++s)
      for (int a = 0; a < backup.n_actions(); ++a) {
        const double ratio = target(s, a) == 0.0 ? 1.0 : step.q.values(s, a) / target(s, a);
        CHECK(ratio > 0.0);
        CHECK(ratio <= 1.0 + 1e-15);
      }
  }
}

TEST_CASE("exact update variance is nonincreasing in alpha") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const OfflineInstance inst = make_offline_instance(200 + seed);
    const InterpolatedWorld w = instance_world(inst, 0.5);
    const QTable backup = random_q(inst.truth.n_states(), inst.truth.n_actions(), 3.0, seed);
    Eigen::VectorXd prev = policy_variance(w.pi_f, backup);
    for (double alpha : {0.05, 0.2, 0.8, 3.0}) {
      CriticConfig cfg;
      cfg.alpha = alpha;
      cfg.beta = 0.1;
      const Eigen::VectorXd var =
          policy_variance(w.pi_f, critic_update_from_backup(backup, w, cfg, backup).q);
      if (alpha > 0.05) {
        for (int s = 0; s < var.size(); ++s) CHECK(var[s] <= prev[s] + 1e-9);
      }
      prev = var;
    }
  }
}

TEST_CASE("fitted evaluation reductions") {
  InstanceShape shape;
  shape.min_records = shape.max_records = 4000;
  shape.model_smoothing = 0.0;
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const OfflineInstance inst = make_offline_instance(300 + seed, shape);
    if (CountTable::from(inst.dataset).coverage() < 1.0) continue;
    ++covered;
    const CriticConfig cfg;
    for (double f : {0.0, 1.0}) {
      const InterpolatedWorld w = instance_world(inst, f);
      CriticConfig k = cfg;
      k.f = f;
      const CriticRun run = run_critic(QTable::zeros(inst.truth.n_states(), inst.truth.n_actions()),
                                       w, k, inst.model, inst.empirical, 5000, 1e-12);
      CHECK(run.converged);
      const QTable ref = exact_q(inst.empirical, inst.policy);
      CHECK((run.q.values - ref.values).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  CHECK(covered >= 3);
  // With a smoothed model the backup weights the empirical MDP by f.
  const OfflineInstance inst = make_offline_instance(42);
  CriticConfig k;
  k.f = 0.0;
  const CriticRun on_model = run_critic(QTable::zeros(inst.truth.n_states(), inst.truth.n_actions()),
                                        instance_world(inst, 0.0), k, inst.model, inst.empirical,
                                        5000, 1e-12);
  CHECK((on_model.q.values - exact_q(inst.model.mdp_hat, inst.policy).values).cwiseAbs().maxCoeff() <
        1e-8);
  k.f = 1.0;
  const CriticRun on_data = run_critic(QTable::zeros(inst.truth.n_states(), inst.truth.n_actions()),
                                       instance_world(inst, 1.0), k, inst.model, inst.empirical,
                                       5000, 1e-12);
  CHECK((on_data.q.values - exact_q(inst.empirical, inst.policy).values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("entries without interpolated mass stay at the backup") {
  // Pair (1, 1) is never visited by the data and never chosen by the policy.
  const Dataset data(2, 2, {{0, 0, 1, 1.0}, {1, 0, 0, 0.0}, {0, 1, 0, 0.5}});
  const LearnedModel model = fit_model(data, 0.9, 0.0, Eigen::Vector2d(0.5, 0.5));
  Eigen::MatrixXd pi(2, 2);
  pi << 0.5, 0.5, 1.0, 0.0;
  const InterpolatedWorld w = build_world(model, PolicyTable(pi), behavior_mle(data), 0.5);
  REQUIRE(w.d_f(1, 1) == 0.0);
  CriticConfig cfg;
  cfg.alpha = 0.7;
  cfg.beta = 0.4;
  const QTable backup = random_q(2, 2, 2.0, 3);
  const CriticStep step = critic_update_from_backup(backup, w, cfg, backup);
  CHECK(step.q.values(1, 1) == backup.values(1, 1));
}

TEST_CASE("config validation") {
  CriticConfig cfg;
  cfg.alpha = -1.0;
  CHECK_THROWS(cfg.validate());
  cfg.alpha = 0.0;
  cfg.f = 1.1;
  CHECK_THROWS(cfg.validate());
}
