#pragma once

#include <Eigen/Dense>

namespace dromo {

class FiniteDistribution {
 public:
  FiniteDistribution(Eigen::VectorXd values, Eigen::VectorXd probs);

  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::VectorXd& probs() const { return probs_; }
  Eigen::Index size() const { return values_.size(); }
  double mean() const { return probs_.dot(values_); }
  // Population variance sum_i p_i (Z_i - mean)^2.
  double variance() const;

 private:
  Eigen::VectorXd values_;
  Eigen::VectorXd probs_;
};

struct ChiSquareBall {
  FiniteDistribution center;
  double radius;
};

// sum_i p_i^2 / q_i - 1 over the shared support; throws std::domain_error when
// p puts mass where q has none.
double chi2_divergence(const FiniteDistribution& p, const FiniteDistribution& q);

struct RobustSup {
  double value;
  FiniteDistribution argmax;
};

// Exact sup of E_p[Z] over {p : chi2(p || q) <= radius}. The maximizer is
// p_i proportional to q_i max(0, Z_i - eta); eta is found in closed form when
// no weight is clipped and by bisection otherwise.
RobustSup robust_sup(const ChiSquareBall& ball);

// E_q[Z] + sqrt(radius * Var_q(Z)).
double variance_surrogate(const FiniteDistribution& dist, double radius);

}  // namespace dromo
