#include "dromo/dro_surrogate.hpp"

#include <cmath>
#include <stdexcept>

namespace dromo {

namespace {

constexpr int kMaxBisection = 200;
constexpr double kEtaTol = 1e-12;

}  // namespace

FiniteDistribution::FiniteDistribution(Eigen::VectorXd values, Eigen::VectorXd probs)
    : values_(std::move(values)), probs_(std::move(probs)) {
  if (values_.size() == 0 || values_.size() != probs_.size())
    throw std::invalid_argument("FiniteDistribution: values and probabilities must match in size");
  if (!values_.allFinite() || !probs_.allFinite())
    throw std::invalid_argument("FiniteDistribution: non-finite entry");
  if ((probs_.array() < 0.0).any()) throw std::invalid_argument("FiniteDistribution: negative probability");
  double total = probs_.sum();
  if (std::abs(total - 1.0) > 1e-12) {
    if (std::abs(total - 1.0) >= 1e-9)
      throw std::invalid_argument("FiniteDistribution: probabilities do not sum to 1");
    probs_ /= total;
  }
}

double FiniteDistribution::variance() const {
  double m = mean();
  return probs_.dot((values_.array() - m).square().matrix());
}

double chi2_divergence(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (p.size() != q.size()) throw std::invalid_argument("chi2_divergence: support sizes differ");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double pi = p.probs()[i], qi = q.probs()[i];
    if (qi == 0.0) {
      if (pi > 0.0) throw std::domain_error("chi2_divergence: p is not absolutely continuous w.r.t. q");
      continue;
    }
    acc += pi * pi / qi;
  }
  return std::max(0.0, acc - 1.0);
}

RobustSup robust_sup(const ChiSquareBall& ball) {
  const FiniteDistribution& q = ball.center;
  const double r = ball.radius;
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("robust_sup: radius must be finite and nonnegative");
  const Eigen::VectorXd& z = q.values();
  const Eigen::VectorXd& w = q.probs();
  const Eigen::Index n = z.size();

  double zmin = INFINITY, zmax = -INFINITY;
  for (Eigen::Index i = 0; i < n; ++i)
    if (w[i] > 0.0) {
      zmin = std::min(zmin, z[i]);
      zmax = std::max(zmax, z[i]);
    }
  const double mean = q.mean();
  const double var = q.variance();
  if (r == 0.0 || zmax == zmin || var == 0.0) return {mean, q};

  auto tilt = [&](double eta) {
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = w[i] * std::max(0.0, z[i] - eta);
    return p;
  };

  // No clipping: eta = mean - sqrt(var / r) keeps every weight nonnegative.
  double eta0 = mean - std::sqrt(var / r);
  if (eta0 <= zmin) {
    Eigen::VectorXd p = tilt(eta0);
    p /= p.sum();
    return {p.dot(z), FiniteDistribution(z, p)};
  }

  // Ball large enough to reach the point mass on the top values.
  double top_mass = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (w[i] > 0.0 && z[i] == zmax) top_mass += w[i];
  if (r >= 1.0 / top_mass - 1.0) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
      if (w[i] > 0.0 && z[i] == zmax) p[i] = w[i] / top_mass;
    return {zmax, FiniteDistribution(z, p)};
  }

  // chi2 of the tilted distribution grows with eta; keep lo on the feasible side.
  auto chi2_at = [&](double eta) {
    double m1 = 0.0, m2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double e = std::max(0.0, z[i] - eta);
      m1 += w[i] * e;
      m2 += w[i] * e * e;
    }
    return m2 / (m1 * m1) - 1.0;
  };
  double lo = zmin, hi = zmax;
  const double scale = std::max(1.0, std::max(std::abs(zmin), std::abs(zmax)));
  for (int it = 0; it < kMaxBisection && hi - lo > kEtaTol * scale; ++it) {
    double mid = 0.5 * (lo + hi);
    if (chi2_at(mid) <= r)
      lo = mid;
    else
      hi = mid;
  }
  Eigen::VectorXd p = tilt(lo);
  p /= p.sum();
  return {p.dot(z), FiniteDistribution(z, p)};
}

double variance_surrogate(const FiniteDistribution& dist, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("variance_surrogate: negative radius");
  return dist.mean() + std::sqrt(radius * dist.variance());
}

}  // namespace dromo
