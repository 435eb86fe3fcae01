#include <cmath>

#include "doctest.h"
#include "dromo/dro_surrogate.hpp"
#include "dromo/instances.hpp"
#include "dromo/oracles.hpp"
#include "dromo/rng.hpp"

using namespace dromo;

namespace {

FiniteDistribution dist2(double z0, double z1, double p0) {
  return FiniteDistribution(Eigen::Vector2d(z0, z1), Eigen::Vector2d(p0, 1.0 - p0));
}

}  // namespace

TEST_CASE("chi2 divergence examples") {
  const FiniteDistribution q = dist2(0, 1, 0.5);
  CHECK(chi2_divergence(q, q) == doctest::Approx(0.0));
  CHECK(chi2_divergence(dist2(0, 1, 1.0), q) == doctest::Approx(1.0));
  CHECK(chi2_divergence(dist2(0, 1, 0.75), q) == doctest::Approx(0.25));
  CHECK_THROWS_AS(chi2_divergence(q, dist2(0, 1, 1.0)), std::domain_error);
}

TEST_CASE("robust_sup degenerate balls") {
  const FiniteDistribution q = random_distribution(5, 3);
  const RobustSup zero = robust_sup({q, 0.0});
  CHECK(zero.value == doctest::Approx(q.mean()).epsilon(1e-12));
  CHECK((zero.argmax.probs() - q.probs()).cwiseAbs().maxCoeff() < 1e-12);

  const FiniteDistribution flat(Eigen::VectorXd::Constant(4, 2.5), q.probs().head(4) / q.probs().head(4).sum());
  for (double r : {1e-3, 0.3, 5.0}) CHECK(robust_sup({flat, r}).value == doctest::Approx(2.5));
  CHECK_THROWS(robust_sup({q, -1.0}));
}

TEST_CASE("robust_sup two-point case against a dense grid") {
  const FiniteDistribution q = dist2(0, 1, 0.5);
  const double radius = 0.5;
  double best = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double p1 = i * 1e-4;
    const double chi = (0.5 - p1) * (0.5 - p1) / 0.5 * 2.0;  // sum (p - q)^2 / q
    if (chi <= radius) best = std::max(best, p1);
  }
  const RobustSup sup = robust_sup({q, radius});
  CHECK(std::abs(sup.value - best) <= 1e-4);
  CHECK(chi2_divergence(sup.argmax, q) <= radius + 1e-9);
}

TEST_CASE("robust_sup agrees with brute force on small supports") {
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const int k = 2 + static_cast<int>(seed % 3);
    const FiniteDistribution q = random_distribution(k, seed);
    const double radius = std::pow(10.0, rng.uniform(-3.0, 0.0));
    const RobustSup sup = robust_sup({q, radius});
    CHECK(std::abs(sup.value - oracle::brute_force_sup({q, radius})) <= 1e-4);
    CHECK(sup.argmax.probs().minCoeff() >= 0.0);
    CHECK(chi2_divergence(sup.argmax, q) <= radius + 1e-9);
    CHECK(sup.argmax.probs().dot(q.values()) == doctest::Approx(sup.value).epsilon(1e-9));
  }
}

TEST_CASE("variance surrogate") {
  const FiniteDistribution q = dist2(0, 1, 0.5);
  CHECK(variance_surrogate(q, 0.0) == doctest::Approx(0.5));
  CHECK(variance_surrogate(q, 0.5) == doctest::Approx(0.5 + std::sqrt(0.125)).epsilon(1e-12));
  CHECK(variance_surrogate(FiniteDistribution(Eigen::Vector3d(4, 4, 4), Eigen::Vector3d(0.2, 0.3, 0.5)),
                           0.7) == doctest::Approx(4.0));
  // Population variance, so shifting Z shifts the surrogate by the same amount.
  const FiniteDistribution shifted = dist2(10, 11, 0.5);
  CHECK(variance_surrogate(shifted, 0.5) - variance_surrogate(q, 0.5) == doctest::Approx(10.0));
}

TEST_CASE("sup is below the surrogate, monotone in radius, and tightens") {
  Rng rng(9);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const int k = 2 + static_cast<int>(seed % 7);
    const FiniteDistribution q = random_distribution(k, 1000 + seed);
    const double r = std::pow(10.0, rng.uniform(-3.0, 0.0));
    const double sup = robust_sup({q, r}).value;
    CHECK(sup <= variance_surrogate(q, r) + 1e-12);
    CHECK(robust_sup({q, 2.0 * r}).value >= sup - 1e-12);
    const double gap = variance_surrogate(q, r) - sup;
    const double gap_small = variance_surrogate(q, r / 10.0) - robust_sup({q, r / 10.0}).value;
    CHECK(gap_small <= gap + 1e-12);
  }
}
