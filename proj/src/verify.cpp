#include "dromo/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "dromo/baselines.hpp"
#include "dromo/bounds.hpp"
#include "dromo/instances.hpp"
#include "dromo/io.hpp"
#include "dromo/loop.hpp"
#include "dromo/oracles.hpp"
#include "dromo/rng.hpp"

namespace dromo {

int SuiteReport::count(CheckStatus status) const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(),
                                        [&](const CheckRecord& c) { return c.status == status; }));
}

bool SuiteReport::hard_failure() const { return count(CheckStatus::kFail) > 0; }

SuiteReport SuiteReport::filter(const std::string& prefix) const {
  SuiteReport out;
  for (const auto& c : checks)
    if (c.name.compare(0, prefix.size(), prefix) == 0) out.checks.push_back(c);
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"duchi", "lemma1", "thm2",        "thm4",
                                                 "thm5",  "ntk",    "calibration", "bound_c"};
  return names;
}

bool is_suite_name(const std::string& name) {
  if (name == "all") return true;
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

int default_instances(const std::string& suite) {
  if (suite == "duchi") return 200;
  if (suite == "thm5" || suite == "ntk" || suite == "calibration") return 50;
  return 100;
}

namespace {

using Emit = std::function<void(const std::string&, double, double, CheckStatus)>;

CheckStatus verdict(bool ok) { return ok ? CheckStatus::kPass : CheckStatus::kFail; }

std::string key(const std::string& suite, int i, const std::string& check) {
  return suite + "/" + std::to_string(i) + "/" + check;
}

// Runs draw(attempt, accepted_index) until n instances were accepted; draw
// returns false for a rejected instance.
void sweep(int n, const std::function<bool(std::uint64_t, int)>& draw, std::uint64_t seed) {
  int accepted = 0;
  for (int attempt = 0; accepted < n && attempt < 20 * n; ++attempt)
    if (draw(derive_seed(seed, static_cast<std::uint64_t>(attempt)), accepted)) ++accepted;
}

// ---- duchi ----------------------------------------------------------------

void suite_duchi(int n, std::uint64_t seed, const Emit& emit) {
  static const double radii[] = {1e-3, 1e-2, 1e-1, 1.0};
  sweep(n, [&](std::uint64_t s, int i) {
    Rng rng(s);
    int k = 1 + rng.below(8);
    double r = radii[i % 4];
    FiniteDistribution dist = random_distribution(k, derive_seed(s, 1));
    RobustSup sup = robust_sup({dist, r});
    double sur = variance_surrogate(dist, r);
    double tol = 1e-12 * std::max(1.0, std::abs(sur));
    emit(key("duchi", i, "sup_le_surrogate"), sup.value, sur, verdict(sup.value <= sur + tol));
    double div = chi2_divergence(sup.argmax, dist);
    emit(key("duchi", i, "argmax_feasible"), div, r, verdict(div <= r * (1.0 + 1e-9) + 1e-15));
    if (k <= 4) {
      double brute = oracle::brute_force_sup({dist, r});
      double err = std::abs(brute - sup.value);
      emit(key("duchi", i, "dual_vs_brute"), err, 1e-4, verdict(err <= 1e-4));
    }
    return true;
  }, seed);
}

// ---- lemma1 ---------------------------------------------------------------

void suite_lemma1(int n, std::uint64_t seed, const Emit& emit) {
  sweep(n, [&](std::uint64_t s, int i) {
    Rng rng(s);
    OfflineInstance inst = make_offline_instance(derive_seed(s, 1));
    CriticConfig cfg;
    cfg.f = rng.uniform();
    cfg.alpha = rng.uniform(0.05, 2.0);
    cfg.beta = rng.uniform(0.0, 1.0);
    InterpolatedWorld world = instance_world(inst, cfg.f);
    const int ns = world.n_states(), na = world.n_actions();
    QTable q_prev = random_q(ns, na, 5.0, derive_seed(s, 2));
    QTable backup = mixed_backup(q_prev, inst.model.mdp_hat, inst.empirical, world.policy, cfg.f);
    CriticStep step = critic_update_from_backup(backup, world, cfg, q_prev);

    Eigen::VectorXd var = policy_variance(world.pi_f, step.q);
    auto objective = [&](const QTable& q) { return critic_objective(q, world, cfg, backup); };
    const double f0 = objective(step.q);
    double worst = 0.0;
    for (int st = 0; st < ns; ++st) {
      bool kink = var[st] <= 1e-10;
      for (int a = 0; a < na; ++a) {
        if (!(world.d_f(st, a) > 0.0)) continue;
        double h = 1e-6 * std::max(1.0, std::abs(step.q.values(st, a)));
        QTable up = step.q, down = step.q;
        up.values(st, a) += h;
        down.values(st, a) -= h;
        double fu = objective(up), fd = objective(down);
        if (kink) {
          // At a collapsed row only descent directions matter.
          worst = std::max({worst, -(fu - f0) / h, -(fd - f0) / h});
        } else {
          worst = std::max(worst, std::abs(fu - fd) / (2.0 * h));
        }
      }
      if (kink) {
        double h = 1e-6;
        QTable up = step.q, down = step.q;
        for (int a = 0; a < na; ++a)
          if (world.d_f(st, a) > 0.0) {
            up.values(st, a) += h;
            down.values(st, a) -= h;
          }
        worst = std::max(worst, std::abs(objective(up) - objective(down)) / (2.0 * h));
      }
    }
    emit(key("lemma1", i, "fd_stationarity"), worst, 1e-5, verdict(worst <= 1e-5));

    QTable cd = oracle::coordinate_descent_critic(world, cfg, backup, backup);
    double diff = 0.0;
    for (int st = 0; st < ns; ++st)
      for (int a = 0; a < na; ++a) diff = std::max(diff, std::abs(cd.values(st, a) - step.q.values(st, a)));
    emit(key("lemma1", i, "matches_coordinate_descent"), diff, 1e-5, verdict(diff <= 1e-5));
    return true;
  }, seed);
}

// ---- thm2 -----------------------------------------------------------------

struct LowerBoundOutcome {
  double estimate = 0.0;
  double truth = 0.0;
  bool rejected = false;
  std::string reason;
};

// Critic fixed point with beta = factor * threshold. kappa is read off the
// output (with a 10% margin on the variance floor) and the run repeated until
// the variance floor holds for the kappa that set beta.
LowerBoundOutcome lower_bound_run(const OfflineInstance& inst, CriticConfig cfg, double factor,
                                  bool fixed_beta) {
  InterpolatedWorld world = instance_world(inst, cfg.f);
  BoundConstants constants =
      calibrated_constants(inst.truth, inst.empirical, static_cast<long>(inst.dataset.size()));
  DeviationTerms dev = truth_deviation(inst.model.mdp_hat, inst.truth);
  const int ns = world.n_states(), na = world.n_actions();
  LowerBoundOutcome out;
  out.truth = initial_value(inst.truth.initial_dist(), inst.policy, exact_q(inst.truth, inst.policy));

  CriticRun run{};
  bool consistent = cfg.alpha == 0.0 || fixed_beta;
  for (int pass = 0; pass < 5; ++pass) {
    if (!fixed_beta) {
      ThresholdReport thr = beta_threshold(world, cfg, dev, constants);
      if (thr.degenerate) {
        out.rejected = true;
        out.reason = "degenerate";
        return out;
      }
      cfg.beta = factor * std::max(0.0, thr.threshold);
    }
    run = run_critic(QTable::zeros(ns, na), world, cfg, inst.model, inst.empirical, 20000, 1e-11);
    if (consistent) break;
    double min_var = policy_variance(world.pi_f, run.q).minCoeff();
    if (!(min_var > 0.0)) break;
    if (pass > 0 && min_var >= 1.0 / constants.kappa_var) {
      consistent = true;
      break;
    }
    constants.kappa_var = 1.0 / (0.9 * min_var);
  }
  if (!consistent) {
    out.rejected = true;
    out.reason = "variance";
    return out;
  }
  out.estimate = initial_value(world.initial_dist, inst.policy, run.q);
  return out;
}

// Two states, one dataset pair; the unseen action has true reward -1 while
// the model and the empirical MDP both report 0 for it.
OfflineInstance adversarial_instance() {
  const double g = 0.9;
  Eigen::MatrixXd t(4, 2);
  t << 1, 0,  //
      0, 1,   //
      0, 1,   //
      0, 1;
  Eigen::MatrixXd r(2, 2);
  r << 0, -1,  //
      0, -1;
  Eigen::VectorXd mu(2);
  mu << 1, 0;
  TabularMdp truth(2, 2, t, r, mu, g);
  std::vector<Transition> rec(20, Transition{0, 0, 0, 0.0});
  Dataset data(2, 2, rec);
  LearnedModel model = fit_model(data, g, 0.5, mu);
  TabularMdp empirical = empirical_mdp(data, g, 0.0, mu);
  Eigen::MatrixXd pi(2, 2);
  pi << 0.2, 0.8,  //
      0.5, 0.5;
  return OfflineInstance{truth, data, model, empirical, behavior_mle(data), PolicyTable(pi)};
}

void suite_thm2(int n, std::uint64_t seed, const Emit& emit) {
  sweep(n, [&](std::uint64_t s, int i) {
    Rng rng(s);
    OfflineInstance inst = make_offline_instance(derive_seed(s, 1));
    CriticConfig cfg;
    cfg.f = rng.uniform();
    cfg.alpha = rng.uniform(0.0, 0.5);
    LowerBoundOutcome o = lower_bound_run(inst, cfg, 2.0, false);
    if (o.rejected) {
      emit(key("thm2", i, "rejected_" + o.reason), 0.0, 0.0, CheckStatus::kReject);
      return false;
    }
    emit(key("thm2", i, "lower_bound"), o.estimate, o.truth, verdict(o.estimate <= o.truth + 1e-9));
    return true;
  }, seed);

  OfflineInstance adv = adversarial_instance();
  CriticConfig cfg;
  cfg.f = 0.5;
  LowerBoundOutcome zero = lower_bound_run(adv, cfg, 0.0, true);
  emit("thm2/adversarial/beta0_violates", zero.estimate, zero.truth,
       verdict(zero.estimate > zero.truth));
  LowerBoundOutcome safe = lower_bound_run(adv, cfg, 2.0, false);
  emit("thm2/adversarial/threshold_restores", safe.estimate, safe.truth,
       verdict(!safe.rejected && safe.estimate <= safe.truth + 1e-9));
}

// ---- thm4 -----------------------------------------------------------------

void suite_thm4(int n, std::uint64_t seed, const Emit& emit) {
  sweep(n, [&](std::uint64_t s, int i) {
    Rng rng(s);
    OfflineInstance inst = make_offline_instance(derive_seed(s, 1));
    CriticConfig cfg;
    cfg.f = rng.uniform();
    cfg.alpha = rng.uniform(0.0, 0.5);
    InterpolatedWorld world = instance_world(inst, cfg.f);
    if ((world.rho.mass() - world.d.mass()).cwiseAbs().maxCoeff() == 0.0) {
      emit(key("thm4", i, "rejected_rho_equals_d"), 0.0, 0.0, CheckStatus::kReject);
      return false;
    }
    BoundConstants constants =
        calibrated_constants(inst.truth, inst.empirical, static_cast<long>(inst.dataset.size()));
    DeviationTerms dev = truth_deviation(inst.model.mdp_hat, inst.truth);
    const int ns = world.n_states(), na = world.n_actions();
    double scale = constants.r_max / (1.0 - world.gamma);
    QTable q = random_q(ns, na, scale, derive_seed(s, 2));
    CriticConfig zero = cfg;
    zero.alpha = 0.0;
    zero.beta = 0.0;
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_equal = 0.0;
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd var = policy_variance(world.pi_f, q);
      constants.kappa_var = var.minCoeff() > 0.0 ? 1.0 / var.minCoeff() : 1.0;
      ThresholdReport thr = beta_threshold(world, cfg, dev, constants);
      cfg.beta = 2.0 * std::max(0.0, thr.threshold);
      QTable next = critic_update(q, world, cfg, inst.model, inst.empirical).q;
      QTable ref = critic_update(q, world, zero, inst.model, inst.empirical).q;
      GapReport gap = check_gap_expanding(next, ref, world);
      worst_margin = std::min(worst_margin, gap.gap_penalized - gap.gap_reference);
      GapReport same = check_gap_expanding(ref, ref, world);
      worst_equal = std::max(worst_equal, std::abs(same.gap_penalized - same.gap_reference));
      q = std::move(next);
    }
    emit(key("thm4", i, "gap_expands_every_iteration"), worst_margin, 0.0, verdict(worst_margin > 0.0));
    emit(key("thm4", i, "zero_penalty_gap_equal"), worst_equal, 1e-10, verdict(worst_equal <= 1e-10));
    return true;
  }, seed);
}

// ---- thm5 -----------------------------------------------------------------

InstanceShape linear_shape() {
  InstanceShape shape;
  shape.max_states = 5;
  shape.max_actions = 3;
  return shape;
}

// Weights whose values stay within 0.9 R_max / (1 - gamma).
Eigen::VectorXd bounded_weights(const FeatureMap& features, double bound, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd w(features.dim());
  for (int j = 0; j < w.size(); ++j) w(j) = rng.normal();
  double peak = (features.matrix() * w).cwiseAbs().maxCoeff();
  return peak > 0.0 ? Eigen::VectorXd(w * (0.9 * bound / peak)) : w;
}

void suite_thm5(int n, std::uint64_t seed, const Emit& emit) {
  sweep(n, [&](std::uint64_t s, int i) {
    Rng rng(s);
    OfflineInstance inst = make_offline_instance(derive_seed(s, 1), linear_shape());
    CriticConfig cfg;
    cfg.f = rng.uniform(0.1, 0.9);
    cfg.alpha = rng.uniform(0.0, 1.0);
    InterpolatedWorld world = instance_world(inst, cfg.f);
    const int ns = world.n_states(), na = world.n_actions(), pairs = ns * na;
    Eigen::VectorXd d_f = flatten(world.d_f.mass());
    FeatureMap features = random_features(pairs, (pairs + 1) / 2, d_f, derive_seed(s, 2));
    BoundConstants constants =
        calibrated_constants(inst.truth, inst.empirical, static_cast<long>(inst.dataset.size()));
    DeviationTerms dev = truth_deviation(inst.model.mdp_hat, inst.truth);
    Eigen::VectorXd omega_k =
        bounded_weights(features, constants.r_max / (1.0 - world.gamma), derive_seed(s, 3));
    QTable q_k = features.evaluate(omega_k, ns, na);
    QTable backup = mixed_backup(q_k, inst.model.mdp_hat, inst.empirical, world.policy, cfg.f);
    LinearThresholdReport thr = theorem5_threshold(world, cfg, features, omega_k, constants, dev, backup);
    if (thr.degenerate) {
      emit(key("thm5", i, "rejected_nonpositive_star"), thr.star, 0.0, CheckStatus::kReject);
      return false;
    }
    cfg.beta = 1.5 * std::max(0.0, thr.threshold);
    QTable q_lin = features.evaluate(linear_update(features, world, cfg, backup, omega_k), ns, na);
    QTable q_tab = bellman_expectation(inst.truth, world.policy, q_k);
    double lhs = initial_value(world.initial_dist, world.policy, q_lin);
    double rhs = initial_value(world.initial_dist, world.policy, q_tab);
    emit(key("thm5", i, "linear_below_tabular"), lhs, rhs, verdict(lhs <= rhs + 1e-9));

    // Identity features with alpha = 0 reproduce the tabular penalized target.
    CriticConfig plain = cfg;
    plain.alpha = 0.0;
    FeatureMap eye = FeatureMap::identity(pairs);
    QTable lin_id = eye.evaluate(linear_update(eye, world, plain, backup, flatten(q_k.values)), ns, na);
    QTable combo = combo_critic_update(q_k, world, plain, inst.model, inst.empirical);
    double diff = (lin_id.values - combo.values).cwiseAbs().maxCoeff();
    emit(key("thm5", i, "identity_matches_combo"), diff, 1e-6, verdict(diff <= 1e-6));
    return true;
  }, seed);
}

// ---- ntk ------------------------------------------------------------------

void suite_ntk(int n, std::uint64_t seed, const Emit& emit) {
  sweep(n, [&](std::uint64_t s, int i) {
    Rng rng(s);
    OfflineInstance inst = make_offline_instance(derive_seed(s, 1), linear_shape());
    CriticConfig cfg;
    cfg.f = rng.uniform(0.1, 0.9);
    cfg.alpha = rng.uniform(0.0, 1.0);
    cfg.beta = rng.uniform(0.0, 1.0);
    InterpolatedWorld world = instance_world(inst, cfg.f);
    const int ns = world.n_states(), na = world.n_actions(), pairs = ns * na;
    int dim = 1 + rng.below(pairs);
    FeatureMap features = random_features(pairs, dim, flatten(world.d_f.mass()), derive_seed(s, 2));
    BoundConstants constants =
        calibrated_constants(inst.truth, inst.empirical, static_cast<long>(inst.dataset.size()));
    DeviationTerms dev = truth_deviation(inst.model.mdp_hat, inst.truth);
    double bound = constants.r_max / (1.0 - world.gamma);
    LinearCritic critic{bounded_weights(features, bound, derive_seed(s, 3)), 0.0};
    QTable q_k = features.evaluate(critic.weights, ns, na);
    QTable backup = mixed_backup(q_k, inst.model.mdp_hat, inst.empirical, world.policy, cfg.f);
    QTable true_backup = bellman_expectation(inst.truth, world.policy, q_k);
    double eta = rng.uniform(0.01, 0.5);
    double xi = backup_slack(world, constants, dev);

    NtkReport rep = ntk_one_step_check(critic, features, world, cfg, backup, true_backup, eta, xi);
    emit(key("ntk", i, "decomposition"), rep.max_abs_diff, 1e-8, verdict(rep.max_abs_diff <= 1e-8));
    emit(key("ntk", i, "literal_alpha_form_deviation"), rep.literal_alpha_deviation, 0.0,
         CheckStatus::kInfo);
    if (std::isfinite(rep.beta_condition)) {
      cfg.beta = 1.5 * std::max(0.0, rep.beta_condition);
      NtkReport safe = ntk_one_step_check(critic, features, world, cfg, backup, true_backup, eta, xi);
      emit(key("ntk", i, "penalized_below_unpenalized"), safe.lhs, safe.rhs,
           verdict(safe.lhs <= safe.rhs + 1e-9));
    } else {
      emit(key("ntk", i, "beta_condition_undefined"), 0.0, 0.0, CheckStatus::kInfo);
    }
    return true;
  }, seed);
}

// ---- calibration ----------------------------------------------------------

void suite_calibration(int n, std::uint64_t seed, const Emit& emit) {
  sweep(n, [&](std::uint64_t s, int i) {
    OfflineInstance inst = make_offline_instance(derive_seed(s, 1));
    BoundConstants constants;
    constants.r_max = inst.truth.reward_bound();
    CalibrationReport rep =
        calibration_value_gap_check(inst.model, inst.truth, inst.policy, constants);
    emit(key("calibration", i, "value_gap_bound"), rep.gap, rep.bound, verdict(rep.pass));
    return true;
  }, seed);
}

// ---- bound_c --------------------------------------------------------------

void suite_bound_c(int n, std::uint64_t seed, const Emit& emit) {
  sweep(n, [&](std::uint64_t s, int i) {
    Rng rng(s);
    OfflineInstance inst = make_offline_instance(derive_seed(s, 1));
    CriticConfig cfg;
    cfg.f = rng.uniform();
    cfg.alpha = rng.uniform(0.01, 1.0);
    cfg.beta = rng.uniform(0.0, 1.0);
    InterpolatedWorld world = instance_world(inst, cfg.f);
    const int ns = world.n_states(), na = world.n_actions();
    QTable q_prev = random_q(ns, na, 10.0, derive_seed(s, 2));
    QTable q = critic_update(q_prev, world, cfg, inst.model, inst.empirical).q;
    BoundConstants constants;
    constants.kappa_var = 10.0;
    LambdaBoundReport rep = lambda_expectation_bound(world, cfg, constants, q);
    if (!rep.assumption_ok) {
      emit(key("bound_c", i, "rejected_variance_floor"), rep.min_variance, 1.0 / constants.kappa_var,
           CheckStatus::kReject);
      return false;
    }
    emit(key("bound_c", i, "lambda_bound"), rep.lhs, rep.rhs, verdict(rep.pass));
    return true;
  }, seed);
}

}  // namespace

SuiteReport run_suite(const std::string& suite, std::optional<int> n_instances, std::uint64_t seed) {
  if (!is_suite_name(suite)) throw std::invalid_argument("unknown suite '" + suite + "'");
  if (n_instances && *n_instances < 1) throw std::invalid_argument("instance count must be >= 1");
  SuiteReport report;
  Emit emit = [&](const std::string& name, double lhs, double rhs, CheckStatus st) {
    report.checks.push_back({name, lhs, rhs, st});
  };
  const auto& names = suite_names();
  for (std::size_t idx = 0; idx < names.size(); ++idx) {
    const std::string& name = names[idx];
    if (suite != "all" && suite != name) continue;
    int n = n_instances.value_or(default_instances(name));
    std::uint64_t s = derive_seed(seed, idx);
    if (name == "duchi") suite_duchi(n, s, emit);
    else if (name == "lemma1") suite_lemma1(n, s, emit);
    else if (name == "thm2") suite_thm2(n, s, emit);
    else if (name == "thm4") suite_thm4(n, s, emit);
    else if (name == "thm5") suite_thm5(n, s, emit);
    else if (name == "ntk") suite_ntk(n, s, emit);
    else if (name == "calibration") suite_calibration(n, s, emit);
    else if (name == "bound_c") suite_bound_c(n, s, emit);
  }
  return report;
}

void write_report(std::ostream& out, const SuiteReport& report) {
  out << "check_name,lhs,rhs,pass\n";
  for (const auto& c : report.checks) {
    const char* st = c.status == CheckStatus::kPass     ? "pass"
                     : c.status == CheckStatus::kFail   ? "fail"
                     : c.status == CheckStatus::kReject ? "reject"
                                                        : "info";
    out << c.name << ',' << format_double(c.lhs) << ',' << format_double(c.rhs) << ',' << st << '\n';
  }
}

// ---- reductions and temperature -------------------------------------------

namespace {

bool same_trace(const std::vector<TraceRow>& a, const std::vector<TraceRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const TraceRow &x = a[i], &y = b[i];
    if (x.iter != y.iter || x.mean_q_hat != y.mean_q_hat || x.return_true != y.return_true ||
        x.return_model != y.return_model || x.beta != y.beta || x.alpha != y.alpha || x.f != y.f)
      return false;
  }
  return true;
}

}  // namespace

SuiteReport check_reductions(std::uint64_t seed) {
  SuiteReport report;
  auto emit = [&](const std::string& name, double lhs, double rhs, bool ok) {
    report.checks.push_back({name, lhs, rhs, verdict(ok)});
  };
  for (int trial = 0; trial < 5; ++trial) {
    std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(trial));
    OfflineInstance inst = make_offline_instance(s);
    for (RhoMode mode : {RhoMode::kAnalytic, RhoMode::kBuffer}) {
      LoopConfig cfg;
      cfg.seed = s;
      cfg.max_iters = 8;
      cfg.critic.f = 0.5;
      cfg.critic.beta = 0.3;
      cfg.entropy_weight = 0.5;
      cfg.tau = 0.7;
      cfg.model_smoothing = 0.5;
      cfg.rho_mode = mode;
      cfg.rollouts = 20;
      cfg.horizon = 10;
      LoopConfig dromo_cfg = cfg;
      dromo_cfg.critic.alpha = 0.0;
      LoopConfig combo_cfg = cfg;
      combo_cfg.critic.alpha = 0.7;  // ignored by COMBO
      LoopResult a = run_dromo(inst.truth, inst.dataset, dromo_cfg);
      LoopResult b = run_baseline(Algorithm::kCombo, inst.truth, inst.dataset, combo_cfg);
      bool same = same_trace(a.trace, b.trace) && a.state.q.values == b.state.q.values &&
                  a.state.policy.probs() == b.state.policy.probs();
      std::string tag = mode == RhoMode::kAnalytic ? "analytic" : "buffer";
      emit("reduction/" + std::to_string(trial) + "/combo_equals_dromo_alpha0_" + tag,
           static_cast<double>(a.trace.size()), static_cast<double>(b.trace.size()), same);
    }

    // COMBO with beta = 0 is fitted evaluation; with full coverage and f = 0
    // it converges to exact_q of the empirical MDP.
    InstanceShape shape;
    shape.min_records = 4000;
    shape.max_records = 4000;
    OfflineInstance full = make_offline_instance(derive_seed(s, 99), shape);
    const CountTable& counts = full.model.source_counts;
    if (counts.coverage() < 1.0) {
      report.checks.push_back({"reduction/" + std::to_string(trial) + "/rejected_partial_coverage",
                               counts.coverage(), 1.0, CheckStatus::kReject});
      continue;
    }
    CriticConfig cfg;
    cfg.f = 0.0;
    InterpolatedWorld world = instance_world(full, 0.0);
    LearnedModel unsmoothed = fit_model(full.dataset, full.truth.gamma(), 0.0, full.truth.initial_dist());
    QTable q = QTable::zeros(world.n_states(), world.n_actions());
    for (int k = 0; k < 5000; ++k) {
      QTable next = combo_critic_update(q, world, cfg, unsmoothed, full.empirical);
      double change = (next.values - q.values).cwiseAbs().maxCoeff();
      q = std::move(next);
      if (change < 1e-12) break;
    }
    QTable exact = exact_q(full.empirical, full.policy);
    double err = (q.values - exact.values).cwiseAbs().maxCoeff();
    emit("reduction/" + std::to_string(trial) + "/combo_beta0_is_fitted_evaluation", err, 1e-8,
         err <= 1e-8);
  }
  return report;
}

namespace {

// Action 0 returns to state 0 with reward 0; action 1 moves to a uniformly
// random state with reward 1, so its model row has entropy ln 2.
std::pair<TabularMdp, Dataset> entropy_chain() {
  Eigen::MatrixXd t(4, 2);
  t << 1, 0,      //
      0.5, 0.5,   //
      1, 0,       //
      0.5, 0.5;
  Eigen::MatrixXd r(2, 2);
  r << 0, 1,  //
      0, 1;
  TabularMdp truth(2, 2, t, r, Eigen::VectorXd::Constant(2, 0.5), 0.9);
  std::vector<Transition> rec;
  for (int s = 0; s < 2; ++s) {
    rec.push_back({s, 0, 0, 0.0});
    rec.push_back({s, 0, 0, 0.0});
    rec.push_back({s, 1, 0, 1.0});
    rec.push_back({s, 1, 1, 1.0});
  }
  return {truth, Dataset(2, 2, rec)};
}

}  // namespace

SuiteReport check_mopo_temperature() {
  SuiteReport report;
  auto [truth, data] = entropy_chain();
  for (double delta : {0.3, 0.5, 1.0}) {
    LoopConfig cfg;
    cfg.max_iters = 5000;
    cfg.entropy_weight = 0.5;
    cfg.mopo.auto_temp = true;
    cfg.mopo.delta_t = delta;
    cfg.mopo.eta_alpha = 1.0;
    cfg.mopo.lambda_pen = 0.0;
    LoopResult res = run_baseline(Algorithm::kMopo, truth, data, cfg);
    double alpha = res.trace.back().alpha;
    LearnedModel model = fit_model(data, cfg.gamma, 0.0, dataset_start_distribution(data, cfg.init_sampling));
    double neg_ll = -expected_log_likelihood(model.mdp_hat, occupancy(model.mdp_hat, res.state.policy), data);
    // Final temperature: one more step from the last traced value.
    double next_alpha = mopo_temperature_step(alpha, model, occupancy(model.mdp_hat, res.state.policy), data, cfg.mopo);
    std::string tag = "mopo/delta_" + format_double(delta);
    if (delta < std::log(2.0)) {
      double gap = std::abs(neg_ll - delta);
      report.checks.push_back({tag + "/entropy_meets_budget", gap, 1e-3, verdict(gap <= 1e-3 && next_alpha > 0.0)});
    } else {
      report.checks.push_back({tag + "/temperature_vanishes", next_alpha, 0.0, verdict(next_alpha == 0.0)});
    }
  }
  return report;
}

}  // namespace dromo
