#include "dromo/linear.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dromo {

FeatureMap::FeatureMap(Eigen::MatrixXd features) : f_(std::move(features)) {
  if (f_.rows() == 0 || f_.cols() == 0) throw std::invalid_argument("FeatureMap: empty matrix");
  if (f_.cols() > f_.rows()) throw std::invalid_argument("FeatureMap: dim exceeds number of pairs");
  if (!f_.allFinite()) throw std::invalid_argument("FeatureMap: non-finite entry");
}

FeatureMap FeatureMap::identity(int n_pairs) {
  return FeatureMap(Eigen::MatrixXd::Identity(n_pairs, n_pairs));
}

QTable FeatureMap::evaluate(const Eigen::VectorXd& omega, int n_states, int n_actions) const {
  if (omega.size() != dim()) throw std::invalid_argument("FeatureMap::evaluate: weight size mismatch");
  if (n_states * n_actions != rows())
    throw std::invalid_argument("FeatureMap::evaluate: table shape mismatch");
  return QTable{unflatten(f_ * omega, n_states, n_actions)};
}

Eigen::MatrixXd FeatureMap::gram(const Eigen::VectorXd& weights) const {
  return f_.transpose() * weights.asDiagonal() * f_;
}

double FeatureMap::condition_number(const Eigen::VectorXd& weights) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram(weights), Eigen::EigenvaluesOnly);
  double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

namespace {

struct Flat {
  Eigen::VectorXd d_f, rho, d, mu_pi;
};

Flat flat_world(const InterpolatedWorld& world, const FeatureMap& features) {
  if (features.rows() != world.n_states() * world.n_actions())
    throw std::invalid_argument("linear critic: feature rows do not match |S||A|");
  Flat out{flatten(world.d_f.mass()), flatten(world.rho.mass()), flatten(world.d.mass()), {}};
  Eigen::MatrixXd mu_pi = world.initial_dist.asDiagonal() * world.policy.probs();
  out.mu_pi = flatten(mu_pi);
  return out;
}

double dataset_size(const InterpolatedWorld& world) {
  return static_cast<double>(std::max<long>(1, world.counts.n_total));
}

// Var_{d_f}(q) and the d_f-weighted centered vector D_f (q - mean).
struct Spread {
  double var;
  Eigen::VectorXd weighted_centered;
};

Spread spread(const Eigen::VectorXd& q, const Eigen::VectorXd& d_f) {
  double mean = d_f.dot(q);
  Eigen::VectorXd centered = q.array() - mean;
  double var = d_f.dot(centered.cwiseAbs2());
  return {std::max(0.0, var), d_f.cwiseProduct(centered)};
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& g) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (!lu.isInvertible()) throw std::domain_error("linear critic: singular normal matrix F^T D_f F");
  return lu.inverse();
}

// alpha |D|^{-1/2} D_f (q - mean) / sigma, or 0 under the variance floor.
Eigen::VectorXd variance_direction(const Eigen::VectorXd& q, const Flat& w,
                                   const InterpolatedWorld& world, double alpha) {
  Spread sp = spread(q, w.d_f);
  if (alpha == 0.0 || sp.var <= kVarianceFloor) return Eigen::VectorXd::Zero(q.size());
  return alpha / std::sqrt(dataset_size(world)) * sp.weighted_centered / std::sqrt(sp.var);
}

}  // namespace

double strict_objective(const Eigen::VectorXd& omega, const FeatureMap& features,
                        const InterpolatedWorld& world, const CriticConfig& cfg,
                        const QTable& backup) {
  Flat w = flat_world(world, features);
  Eigen::VectorXd q = features.matrix() * omega;
  Eigen::VectorXd resid = q - flatten(backup.values);
  double fit = 0.5 * w.d_f.dot(resid.cwiseAbs2());
  double var = spread(q, w.d_f).var;
  return fit + cfg.alpha * std::sqrt(var / dataset_size(world)) + cfg.beta * (w.rho - w.d).dot(q);
}

Eigen::VectorXd strict_objective_gradient(const Eigen::VectorXd& omega,
                                          const FeatureMap& features,
                                          const InterpolatedWorld& world,
                                          const CriticConfig& cfg, const QTable& backup) {
  Flat w = flat_world(world, features);
  const Eigen::MatrixXd& f = features.matrix();
  Eigen::VectorXd q = f * omega;
  Eigen::VectorXd per_pair = w.d_f.cwiseProduct(q - flatten(backup.values)) +
                             cfg.beta * (w.rho - w.d) +
                             variance_direction(q, w, world, cfg.alpha);
  return f.transpose() * per_pair;
}

LinearCritic gradient_step(const LinearCritic& critic, const FeatureMap& features,
                           const InterpolatedWorld& world, const CriticConfig& cfg,
                           const QTable& backup) {
  if (!(critic.step_size >= 0.0)) throw std::invalid_argument("gradient_step: negative step size");
  LinearCritic next = critic;
  if (critic.step_size == 0.0) return next;
  next.weights -= critic.step_size *
                  strict_objective_gradient(critic.weights, features, world, cfg, backup);
  return next;
}

QTable lstd_q(const InterpolatedWorld& world, const FeatureMap& features, const QTable& backup) {
  Flat w = flat_world(world, features);
  const Eigen::MatrixXd& f = features.matrix();
  Eigen::MatrixXd g_inv = checked_inverse(features.gram(w.d_f));
  Eigen::VectorXd omega = g_inv * (f.transpose() * w.d_f.cwiseProduct(flatten(backup.values)));
  return QTable{unflatten(f * omega, world.n_states(), world.n_actions())};
}

Eigen::VectorXd linear_update(const FeatureMap& features, const InterpolatedWorld& world,
                              const CriticConfig& cfg, const QTable& backup,
                              const Eigen::VectorXd& omega_k) {
  Flat w = flat_world(world, features);
  const Eigen::MatrixXd& f = features.matrix();
  Eigen::VectorXd q_k = f * omega_k;
  Eigen::VectorXd rhs = f.transpose() * (w.d_f.cwiseProduct(flatten(backup.values)) -
                                         cfg.beta * (w.rho - w.d) -
                                         variance_direction(q_k, w, world, cfg.alpha));
  return checked_inverse(features.gram(w.d_f)) * rhs;
}

double backup_slack(const InterpolatedWorld& world, const BoundConstants& constants,
                    const DeviationTerms& deviation) {
  const double g = world.gamma, rm = constants.r_max;
  double model_part = deviation.reward_gap + 2.0 * g * rm / (1.0 - g) * deviation.tv_gap;
  double data_part = constants.c_rt_delta * rm / ((1.0 - g) * std::sqrt(dataset_size(world)));
  return (1.0 - world.f) * model_part + world.f * data_part;
}

LinearThresholdReport theorem5_threshold(const InterpolatedWorld& world, const CriticConfig& cfg,
                                         const FeatureMap& features,
                                         const Eigen::VectorXd& omega_k,
                                         const BoundConstants& constants,
                                         const DeviationTerms& deviation, const QTable& backup) {
  constants.validate();
  Flat w = flat_world(world, features);
  const Eigen::MatrixXd& f = features.matrix();
  Eigen::MatrixXd g_inv = checked_inverse(features.gram(w.d_f));
  // Row vector (mu pi)^T F G^{-1}, shared by every term.
  Eigen::RowVectorXd lead = w.mu_pi.transpose() * f * g_inv;
  Eigen::VectorXd b = flatten(backup.values);

  LinearThresholdReport rep;
  rep.condition = features.condition_number(w.d_f);
  rep.projection_term = lead * (f.transpose() * w.d_f.cwiseProduct(b)) - w.mu_pi.dot(b);
  rep.slack_term = backup_slack(world, constants, deviation);
  Eigen::VectorXd var_dir = variance_direction(f * omega_k, w, world, cfg.alpha);
  rep.alpha_term = lead * (f.transpose() * var_dir);
  rep.star = lead * (f.transpose() * (w.rho - w.d));
  if (!(rep.star > 0.0)) {
    rep.degenerate = true;
    rep.threshold = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  rep.threshold = (rep.projection_term + rep.slack_term - rep.alpha_term) / rep.star;
  return rep;
}

NtkReport ntk_one_step_check(const LinearCritic& critic, const FeatureMap& features,
                             const InterpolatedWorld& world, const CriticConfig& cfg,
                             const QTable& backup, const QTable& true_backup, double eta,
                             double xi) {
  if (!(eta >= 0.0)) throw std::invalid_argument("ntk_one_step_check: negative eta");
  Flat w = flat_world(world, features);
  const int ns = world.n_states(), na = world.n_actions();
  const Eigen::MatrixXd& f = features.matrix();
  Eigen::MatrixXd kernel = f * f.transpose();
  Eigen::VectorXd q = f * critic.weights;
  Eigen::VectorXd b = flatten(backup.values), tb = flatten(true_backup.values);

  LinearCritic stepped{critic.weights, eta};
  stepped = gradient_step(stepped, features, world, cfg, backup);
  Eigen::VectorXd q_next = f * stepped.weights;

  Eigen::VectorXd var_dir = variance_direction(q, w, world, cfg.alpha);
  Eigen::VectorXd kd_f_resid = kernel * w.d_f.cwiseProduct(tb - q);
  Eigen::VectorXd alpha_part = eta * (kernel * var_dir);
  Eigen::VectorXd unpen = eta * kd_f_resid;
  Eigen::VectorXd pen = -eta * cfg.beta * (kernel * (w.rho - w.d)) - alpha_part;
  Eigen::VectorXd over = eta * (kernel * w.d_f.cwiseProduct(b - tb));
  Eigen::VectorXd q_dec = q + unpen + pen + over;

  NtkReport rep;
  rep.q_next = QTable{unflatten(q_next, ns, na)};
  rep.q_decomposed = QTable{unflatten(q_dec, ns, na)};
  rep.unpenalized = unflatten(unpen, ns, na);
  rep.penalty = unflatten(pen, ns, na);
  rep.overestimation = unflatten(over, ns, na);
  rep.max_abs_diff = (q_next - q_dec).cwiseAbs().maxCoeff();

  Spread sp = spread(q, w.d_f);
  if (cfg.alpha != 0.0 && sp.var > kVarianceFloor) {
    Eigen::VectorXd dd = w.d_f - w.d_f.cwiseAbs2();
    Eigen::VectorXd literal = eta * cfg.alpha / std::sqrt(dataset_size(world)) *
                              dd.cwiseProduct(kernel * q) / std::sqrt(sp.var);
    rep.literal_alpha_deviation = (literal - alpha_part).cwiseAbs().maxCoeff();
  }

  Eigen::RowVectorXd lead = w.mu_pi.transpose() * kernel;
  double denom = lead.dot(w.rho - w.d);
  double over_bound = xi * (lead * w.d_f.asDiagonal()).cwiseAbs().sum();
  double alpha_scalar = lead.dot(var_dir);
  rep.beta_condition = denom > 0.0 ? (over_bound - alpha_scalar) / denom
                                   : std::numeric_limits<double>::infinity();
  rep.beta_ok = denom > 0.0 && cfg.beta >= rep.beta_condition;
  rep.lhs = w.mu_pi.dot(q_next);
  rep.rhs = w.mu_pi.dot(q + unpen);
  rep.pass = rep.max_abs_diff <= 1e-8 && (!rep.beta_ok || rep.lhs <= rep.rhs + 1e-12);
  return rep;
}

}  // namespace dromo
