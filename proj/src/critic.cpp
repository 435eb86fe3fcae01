#include "dromo/critic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dromo {

namespace {

constexpr double kRootFloor = 1e-8;
constexpr int kThetaBisectionIters = 200;
constexpr int kThetaBracketDoublings = 2000;

}  // namespace

void CriticConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0))
    throw std::invalid_argument("CriticConfig: alpha and beta must be nonnegative");
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("CriticConfig: f must lie in [0, 1]");
  if (inner_iters < 1 || !(inner_tol > 0.0))
    throw std::invalid_argument("CriticConfig: inner_iters and inner_tol must be positive");
}

Eigen::VectorXd InterpolatedWorld::clamped_state_counts() const {
  return counts.n_s.cast<double>().cwiseMax(1.0);
}

Eigen::VectorXd InterpolatedWorld::behavior_state_marginal() const {
  return clamped_state_counts() / static_cast<double>(counts.n_total);
}

InterpolatedWorld make_world(OccupancyVector rho, const CountTable& counts,
                             const PolicyTable& policy, const PolicyTable& behavior, double f,
                             const Eigen::VectorXd& initial_dist, double gamma,
                             InterpConvention convention) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("make_world: f must lie in [0, 1]");
  const int ns = rho.n_states(), na = rho.n_actions();
  if (counts.n_states() != ns || counts.n_actions() != na || policy.n_states() != ns ||
      policy.n_actions() != na || behavior.n_states() != ns || behavior.n_actions() != na ||
      initial_dist.size() != ns)
    throw std::invalid_argument("make_world: shape mismatch");
  OccupancyVector d = dataset_occupancy(counts);
  Eigen::MatrixXd d_f = convention == InterpConvention::kVerbatim
                            ? Eigen::MatrixXd(f * rho.mass() + (1.0 - f) * d.mass())
                            : Eigen::MatrixXd(f * d.mass() + (1.0 - f) * rho.mass());
  Eigen::MatrixXd pi_f = f * behavior.probs() + (1.0 - f) * policy.probs();
  return InterpolatedWorld{std::move(rho),  std::move(d), OccupancyVector(std::move(d_f)),
                           PolicyTable(std::move(pi_f)), policy,  behavior,
                           counts,          initial_dist, gamma,
                           f,               convention};
}

InterpolatedWorld build_world(const LearnedModel& model, const PolicyTable& policy,
                              const PolicyTable& behavior, double f, InterpConvention convention) {
  return make_world(occupancy(model.mdp_hat, policy), model.source_counts, policy, behavior, f,
                    model.mdp_hat.initial_dist(), model.mdp_hat.gamma(), convention);
}

QTable mixed_backup(const QTable& q, const TabularMdp& model, const TabularMdp& empirical,
                    const PolicyTable& policy, double f) {
  QTable out{(1.0 - f) * bellman_expectation(model, policy, q).values};
  if (f != 0.0) out.values += f * bellman_expectation(empirical, policy, q).values;
  return out;
}

Eigen::MatrixXd penalized_target(const QTable& backup, const InterpolatedWorld& world, double beta) {
  Eigen::MatrixXd t = backup.values;
  if (beta == 0.0) return t;
  for (int s = 0; s < world.n_states(); ++s)
    for (int a = 0; a < world.n_actions(); ++a) {
      double w = world.d_f(s, a);
      if (w > 0.0) t(s, a) -= beta * (world.rho(s, a) - world.d(s, a)) / w;
    }
  return t;
}

Eigen::VectorXd policy_variance(const PolicyTable& pi, const QTable& q) {
  Eigen::VectorXd var(pi.n_states());
  for (int s = 0; s < pi.n_states(); ++s) {
    double m = pi.probs().row(s).dot(q.values.row(s));
    var[s] = pi.probs().row(s).dot((q.values.row(s).array() - m).square().matrix());
  }
  return var;
}

double critic_objective(const QTable& q, const InterpolatedWorld& world, const CriticConfig& cfg,
                        const QTable& backup) {
  const Eigen::MatrixXd& w = world.d_f.mass();
  double fit = 0.5 * w.cwiseProduct((q.values - backup.values).cwiseAbs2()).sum();
  double var_term = 0.0;
  if (cfg.alpha != 0.0) {
    Eigen::VectorXd var = policy_variance(world.pi_f, q);
    Eigen::VectorXd ns = world.clamped_state_counts();
    Eigen::VectorXd ws = w.rowwise().sum();
    for (int s = 0; s < world.n_states(); ++s) var_term += ws[s] * std::sqrt(var[s] / ns[s]);
  }
  double shift = (world.rho.mass() - world.d.mass()).cwiseProduct(q.values).sum();
  return fit + cfg.alpha * var_term + cfg.beta * shift;
}

Eigen::MatrixXd critic_objective_gradient(const QTable& q, const InterpolatedWorld& world,
                                          const CriticConfig& cfg, const QTable& backup) {
  const Eigen::MatrixXd& w = world.d_f.mass();
  Eigen::MatrixXd g = w.cwiseProduct(q.values - backup.values) +
                      cfg.beta * (world.rho.mass() - world.d.mass());
  if (cfg.alpha == 0.0) return g;
  Eigen::VectorXd ns = world.clamped_state_counts();
  for (int s = 0; s < world.n_states(); ++s) {
    const auto pi = world.pi_f.probs().row(s);
    double m = pi.dot(q.values.row(s));
    double var = pi.dot((q.values.row(s).array() - m).square().matrix());
    if (var <= 0.0) continue;
    double c = cfg.alpha * w.row(s).sum() / std::sqrt(ns[s]);
    double sigma = std::sqrt(var);
    for (int a = 0; a < world.n_actions(); ++a) g(s, a) += c * pi[a] * (q.values(s, a) - m) / sigma;
  }
  return g;
}

namespace {

// One state of the critic problem:
//   min_Q 1/2 sum_a w_a (Q_a - t_a)^2 + c sqrt(sum_a pi_a (Q_a - m)^2),
// Q_a fixed at t_a where w_a = 0. Stationarity gives, for a multiplier
// theta = c / sigma, Q_a = (w_a t_a + theta pi_a m) / (w_a + theta pi_a) with m
// the pi-mean of Q; the scalar theta solves theta sigma(theta) = c.
struct StateSolution {
  Eigen::VectorXd q;
  bool collapsed = false;
  bool converged = true;
};

struct ThetaEval {
  Eigen::VectorXd q;
  double m;
  double sigma;
};

ThetaEval eval_theta(const Eigen::VectorXd& w, const Eigen::VectorXd& t, const Eigen::VectorXd& pi,
                     double theta) {
  const Eigen::Index n = t.size();
  double num = 0.0, den = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (pi[a] <= 0.0) continue;
    double omega = w[a] > 0.0 ? pi[a] * w[a] / (w[a] + theta * pi[a]) : pi[a];
    num += omega * t[a];
    den += omega;
  }
  ThetaEval e{t, num / den, 0.0};
  double var = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (pi[a] <= 0.0) continue;
    if (w[a] > 0.0) e.q[a] = (w[a] * t[a] + theta * pi[a] * e.m) / (w[a] + theta * pi[a]);
    var += pi[a] * (e.q[a] - e.m) * (e.q[a] - e.m);
  }
  e.sigma = std::sqrt(var);
  return e;
}

StateSolution solve_state(const Eigen::VectorXd& w, const Eigen::VectorXd& t,
                          const Eigen::VectorXd& pi, double c) {
  StateSolution out{t};
  int support = 0;
  bool fixed_in_support = false;
  for (Eigen::Index a = 0; a < t.size(); ++a)
    if (pi[a] > 0.0) {
      ++support;
      if (!(w[a] > 0.0)) fixed_in_support = true;
    }
  if (c <= 0.0 || support <= 1) return out;
  ThetaEval at_zero = eval_theta(w, t, pi, 0.0);
  if (at_zero.sigma == 0.0) return out;

  if (!fixed_in_support) {
    // theta -> infinity collapses the supported entries onto their w-mean.
    double sw = 0.0, swt = 0.0;
    for (Eigen::Index a = 0; a < t.size(); ++a)
      if (pi[a] > 0.0) {
        sw += w[a];
        swt += w[a] * t[a];
      }
    double m_inf = swt / sw;
    double h_inf = 0.0;
    for (Eigen::Index a = 0; a < t.size(); ++a)
      if (pi[a] > 0.0) h_inf += w[a] * w[a] * (t[a] - m_inf) * (t[a] - m_inf) / pi[a];
    h_inf = std::sqrt(h_inf);
    if (c >= h_inf) {
      for (Eigen::Index a = 0; a < t.size(); ++a)
        if (pi[a] > 0.0) out.q[a] = m_inf;
      out.collapsed = true;
      return out;
    }
  }

  double hi = c / at_zero.sigma;
  int doublings = 0;
  while (hi * eval_theta(w, t, pi, hi).sigma < c) {
    hi *= 2.0;
    if (++doublings > kThetaBracketDoublings) {
      out.converged = false;
      return out;
    }
  }
  double lo = 0.0;
  for (int it = 0; it < kThetaBisectionIters && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid * eval_theta(w, t, pi, mid).sigma < c)
      lo = mid;
    else
      hi = mid;
  }
  out.q = eval_theta(w, t, pi, 0.5 * (lo + hi)).q;
  return out;
}

CriticStep exact_update(const QTable& backup, const InterpolatedWorld& world,
                        const CriticConfig& cfg) {
  const int ns = world.n_states();
  const Eigen::MatrixXd& w = world.d_f.mass();
  Eigen::MatrixXd t = penalized_target(backup, world, cfg.beta);
  CriticStep step{QTable{t}};
  if (cfg.alpha == 0.0) return step;
  Eigen::VectorXd counts = world.clamped_state_counts();
  std::vector<bool> kink(ns, false);
  for (int s = 0; s < ns; ++s) {
    double c = cfg.alpha * w.row(s).sum() / std::sqrt(counts[s]);
    StateSolution sol = solve_state(w.row(s).transpose(), t.row(s).transpose(),
                                    world.pi_f.probs().row(s).transpose(), c);
    step.q.values.row(s) = sol.q.transpose();
    step.converged = step.converged && sol.converged;
    kink[s] = sol.collapsed;
  }
  Eigen::MatrixXd g = critic_objective_gradient(step.q, world, cfg, backup);
  for (int s = 0; s < ns; ++s) {
    if (kink[s]) continue;
    for (int a = 0; a < world.n_actions(); ++a)
      if (w(s, a) > 0.0) step.residual = std::max(step.residual, std::abs(g(s, a)));
  }
  return step;
}

CriticStep closed_form_update(const QTable& backup, const InterpolatedWorld& world,
                              const CriticConfig& cfg, const QTable& q_prev) {
  Eigen::MatrixXd t = penalized_target(backup, world, cfg.beta);
  CriticStep step{QTable{t}};
  if (cfg.alpha == 0.0) return step;
  const Eigen::MatrixXd& pif = world.pi_f.probs();
  Eigen::VectorXd counts = world.clamped_state_counts();
  Eigen::VectorXd var = policy_variance(world.pi_f, q_prev);
  step.converged = false;
  for (int sweep = 0; sweep < cfg.inner_iters; ++sweep) {
    Eigen::MatrixXd next = t;
    for (int s = 0; s < world.n_states(); ++s) {
      double root = std::max(kRootFloor, std::sqrt(var[s] * counts[s]));
      for (int a = 0; a < world.n_actions(); ++a) {
        if (!(world.d_f(s, a) > 0.0)) continue;
        double lambda = cfg.alpha * (1.0 - pif(s, a));
        next(s, a) = (1.0 - lambda / (lambda + root)) * t(s, a);
      }
    }
    step.residual = (next - step.q.values).cwiseAbs().maxCoeff();
    step.q.values = std::move(next);
    var = policy_variance(world.pi_f, step.q);
    if (step.residual < cfg.inner_tol) {
      step.converged = true;
      break;
    }
  }
  return step;
}

}  // namespace

CriticStep critic_update_from_backup(const QTable& backup, const InterpolatedWorld& world,
                                     const CriticConfig& cfg, const QTable& q_prev) {
  cfg.validate();
  if (backup.n_states() != world.n_states() || backup.n_actions() != world.n_actions())
    throw std::invalid_argument("critic_update: backup shape mismatch");
  return cfg.rule == CriticRule::kExactMinimizer ? exact_update(backup, world, cfg)
                                                 : closed_form_update(backup, world, cfg, q_prev);
}

CriticStep critic_update(const QTable& q_prev, const InterpolatedWorld& world,
                         const CriticConfig& cfg, const LearnedModel& model,
                         const TabularMdp& empirical) {
  QTable backup = mixed_backup(q_prev, model.mdp_hat, empirical, world.policy, cfg.f);
  return critic_update_from_backup(backup, world, cfg, q_prev);
}

CriticRun run_critic(const QTable& q0, const InterpolatedWorld& world, const CriticConfig& cfg,
                     const LearnedModel& model, const TabularMdp& empirical, int k_max, double tol) {
  CriticRun run{q0};
  for (int k = 0; k < k_max; ++k) {
    CriticStep step = critic_update(run.q, world, cfg, model, empirical);
    run.last_change = (step.q.values - run.q.values).cwiseAbs().maxCoeff();
    run.q = std::move(step.q);
    run.iterations = k + 1;
    if (run.last_change < tol) {
      run.converged = true;
      break;
    }
  }
  return run;
}

}  // namespace dromo
