#pragma once

#include <Eigen/Dense>

#include "dromo/bounds.hpp"
#include "dromo/critic.hpp"

namespace dromo {

// Rows indexed by flattened (s, a) pairs.
class FeatureMap {
 public:
  explicit FeatureMap(Eigen::MatrixXd features);
  static FeatureMap identity(int n_pairs);

  const Eigen::MatrixXd& matrix() const { return f_; }
  int rows() const { return static_cast<int>(f_.rows()); }
  int dim() const { return static_cast<int>(f_.cols()); }

  QTable evaluate(const Eigen::VectorXd& omega, int n_states, int n_actions) const;
  // F^T diag(weights) F
  Eigen::MatrixXd gram(const Eigen::VectorXd& weights) const;
  // Ratio of extreme singular values of the weighted Gram matrix.
  double condition_number(const Eigen::VectorXd& weights) const;

 private:
  Eigen::MatrixXd f_;
};

struct LinearCritic {
  Eigen::VectorXd weights;
  double step_size = 0.1;
};

// Variances below this floor make the variance penalty's gradient 0.
inline constexpr double kVarianceFloor = 1e-12;

// 1/2 E_{d_f}[(F w - backup)^2] + alpha sqrt(Var_{d_f}(F w) / |D|)
//   + beta (E_rho[F w] - E_d[F w]).
double strict_objective(const Eigen::VectorXd& omega, const FeatureMap& features,
                        const InterpolatedWorld& world, const CriticConfig& cfg,
                        const QTable& backup);
Eigen::VectorXd strict_objective_gradient(const Eigen::VectorXd& omega,
                                          const FeatureMap& features,
                                          const InterpolatedWorld& world,
                                          const CriticConfig& cfg, const QTable& backup);

LinearCritic gradient_step(const LinearCritic& critic, const FeatureMap& features,
                           const InterpolatedWorld& world, const CriticConfig& cfg,
                           const QTable& backup);

// F (F^T D_f F)^{-1} F^T D_f backup. Throws std::domain_error when the Gram
// matrix is singular.
QTable lstd_q(const InterpolatedWorld& world, const FeatureMap& features, const QTable& backup);

// Stationary point of the strict objective with the variance gradient frozen
// at omega_k:
// G w = F^T D_f backup - beta F^T (rho - d) - alpha |D|^{-1/2} Cov_k / sigma_k.
Eigen::VectorXd linear_update(const FeatureMap& features, const InterpolatedWorld& world,
                              const CriticConfig& cfg, const QTable& backup,
                              const Eigen::VectorXd& omega_k);

struct LinearThresholdReport {
  double threshold = 0.0;
  double projection_term = 0.0;  // (mu pi)^T (F G^{-1} F^T D_f - I) backup
  double slack_term = 0.0;       // xi
  double alpha_term = 0.0;       // alpha C
  double star = 0.0;             // (mu pi)^T F G^{-1} F^T (rho - d)
  double condition = 0.0;
  bool degenerate = false;       // star <= 0
};

// beta >= [projection_term + xi - alpha C] / star, where xi bounds the
// distance between the mixed backup and the true Bellman backup.
LinearThresholdReport theorem5_threshold(const InterpolatedWorld& world, const CriticConfig& cfg,
                                         const FeatureMap& features,
                                         const Eigen::VectorXd& omega_k,
                                         const BoundConstants& constants,
                                         const DeviationTerms& deviation, const QTable& backup);

struct NtkReport {
  QTable q_next;                // F (w - eta grad)
  QTable q_decomposed;          // Q + term1 + term2 + term3
  Eigen::MatrixXd unpenalized;  // eta K D_f (T Q - Q)
  Eigen::MatrixXd penalty;      // -eta beta K (rho - d) - eta alpha |D|^{-1/2} K D_f (Q - Qbar) / sigma
  Eigen::MatrixXd overestimation;  // eta K D_f Delta, Delta = backup - T Q
  double max_abs_diff = 0.0;
  // max |difference| between the penalty's alpha part and the
  // (D_f - D_f^2) K Q / sigma form.
  double literal_alpha_deviation = 0.0;
  double beta_condition = 0.0;
  double lhs = 0.0;  // (mu pi)^T q_next
  double rhs = 0.0;  // (mu pi)^T (Q + unpenalized)
  bool beta_ok = false;
  bool pass = false;
};

// One gradient step of the strict objective for a linear-in-parameter critic
// compared with its kernel decomposition. true_backup is T^pi Q on the truth;
// xi bounds |backup - true_backup| (pass the slack from theorem5_threshold).
NtkReport ntk_one_step_check(const LinearCritic& critic, const FeatureMap& features,
                             const InterpolatedWorld& world, const CriticConfig& cfg,
                             const QTable& backup, const QTable& true_backup, double eta,
                             double xi);

// xi = (1 - f)[reward_gap + 2 gamma R_max / (1 - gamma) tv_gap]
//      + f C_{r,T,delta} R_max / ((1 - gamma) sqrt|D|)
double backup_slack(const InterpolatedWorld& world, const BoundConstants& constants,
                    const DeviationTerms& deviation);

}  // namespace dromo
