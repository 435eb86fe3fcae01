#include <cmath>

#include "doctest.h"
#include "dromo/envs.hpp"
#include "dromo/instances.hpp"
#include "dromo/mdp.hpp"
#include "dromo/oracles.hpp"
#include "dromo/rng.hpp"

using namespace dromo;

namespace {

TabularMdp single_state(double r, double gamma) {
  return TabularMdp(1, 1, Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Constant(1, 1, r),
                    Eigen::VectorXd::Ones(1), gamma);
}

}  // namespace

TEST_CASE("construction validates probability rows") {
  Eigen::MatrixXd t(2, 2);
  t << 0.5, 0.5, 0.3, 0.7;
  Eigen::VectorXd mu(2);
  mu << 1.0, 0.0;
  CHECK_NOTHROW(TabularMdp(2, 1, t, Eigen::MatrixXd::Zero(2, 1), mu, 0.9));

  Eigen::MatrixXd bad = t;
  bad(0, 0) = 0.6;
  CHECK_THROWS_AS(TabularMdp(2, 1, bad, Eigen::MatrixXd::Zero(2, 1), mu, 0.9),
                  std::invalid_argument);

  // A deviation below 1e-9 is renormalized instead of rejected.
  Eigen::MatrixXd tiny = t;
  tiny(0, 0) += 1e-11;
  const TabularMdp ok(2, 1, tiny, Eigen::MatrixXd::Zero(2, 1), mu, 0.9);
  CHECK(std::abs(ok.transition().row(0).sum() - 1.0) < 1e-15);

  CHECK_THROWS(TabularMdp(2, 1, t, Eigen::MatrixXd::Zero(2, 1), mu, 1.0));
  CHECK_THROWS(PolicyTable(Eigen::MatrixXd::Constant(1, 2, 0.7)));
}

TEST_CASE("exact_q small cases") {
  SUBCASE("zero horizon returns the reward") {
    const TabularMdp m = make_random_mdp(3, 2, 0.5, 1);
    const TabularMdp m0(3, 2, m.transition(), m.reward(), m.initial_dist(), 0.0);
    const QTable q = exact_q(m0, PolicyTable::uniform(3, 2));
    CHECK((q.values - m.reward()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("geometric series") {
    const QTable q = exact_q(single_state(1.0, 0.9), PolicyTable::uniform(1, 1));
    CHECK(q.values(0, 0) == doctest::Approx(10.0).epsilon(1e-12));
  }
}

TEST_CASE("exact_q agrees with value iteration on random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TabularMdp m = make_random_mdp(5, 3, 0.9, seed);
    const PolicyTable pi = random_policy(5, 3, seed + 100);
    const QTable q = exact_q(m, pi);
    const QTable vi = oracle::value_iteration_q(m, pi);
    CHECK((q.values - vi.values).cwiseAbs().maxCoeff() < 1e-8);
    const QTable residual = bellman_expectation(m, pi, q);
    CHECK((residual.values - q.values).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("exact_q is bounded by R_max / (1 - gamma)") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TabularMdp m = make_random_mdp(4, 3, 0.95, 1000 + seed);
    const QTable q = exact_q(m, random_policy(4, 3, seed));
    CHECK(q.values.cwiseAbs().maxCoeff() <= m.reward_bound() / (1.0 - m.gamma()) + 1e-9);
  }
}

TEST_CASE("exact_v is the policy-weighted Q") {
  const TabularMdp m = make_random_mdp(4, 2, 0.8, 3);
  Eigen::VectorXi acts(4);
  acts << 1, 0, 0, 1;
  const PolicyTable det = PolicyTable::deterministic(acts, 2);
  const QTable q = exact_q(m, det);
  const Eigen::VectorXd v = exact_v(m, det);
  for (int s = 0; s < 4; ++s) CHECK(v[s] == doctest::Approx(q.values(s, acts[s])));

  const PolicyTable uni = PolicyTable::uniform(4, 2);
  const QTable qu = exact_q(m, uni);
  const Eigen::VectorXd vu = exact_v(m, uni);
  for (int s = 0; s < 4; ++s)
    CHECK(vu[s] == doctest::Approx((qu.values(s, 0) + qu.values(s, 1)) / 2.0));
}

TEST_CASE("policy return matches a Monte-Carlo estimate") {
  const TabularMdp m = make_random_mdp(4, 2, 0.7, 11);
  const PolicyTable pi = random_policy(4, 2, 12);
  const int episodes = 400000;
  const double mc = oracle::monte_carlo_return(m, pi, episodes, 80, 99);
  // Returns lie in [-R/(1-g), R/(1-g)], so that range bounds the standard
  // deviation; truncation at 80 steps adds at most 0.7^80 R/(1-g).
  const double range = m.reward_bound() / (1.0 - m.gamma());
  const double se = range / std::sqrt(static_cast<double>(episodes));
  CHECK(std::abs(policy_return(m, pi) - mc) < 3.0 * se + std::pow(0.7, 80) * range);
}

TEST_CASE("bellman_expectation") {
  const TabularMdp m = make_random_mdp(3, 2, 0.5, 4);
  const PolicyTable pi = random_policy(3, 2, 5);
  const QTable zero = QTable::zeros(3, 2);
  CHECK((bellman_expectation(m, pi, zero).values - m.reward()).cwiseAbs().maxCoeff() < 1e-15);

  const QTable q = random_q(3, 2, 4.0, 6);
  const QTable out = bellman_expectation(m, pi, q);
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) {
      double expect = 0.0;
      for (int sn = 0; sn < 3; ++sn)
        for (int an = 0; an < 2; ++an)
          expect += m.transition()(s * 2 + a, sn) * pi(sn, an) * q.values(sn, an);
      CHECK(out.values(s, a) == doctest::Approx(m.reward()(s, a) + 0.5 * expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("bellman_expectation is a gamma contraction") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const TabularMdp m = make_random_mdp(5, 3, 0.85, seed);
    const PolicyTable pi = random_policy(5, 3, seed + 7);
    const QTable q1 = random_q(5, 3, 10.0, 2 * seed);
    const QTable q2 = random_q(5, 3, 10.0, 2 * seed + 1);
    const double lhs = (bellman_expectation(m, pi, q1).values - bellman_expectation(m, pi, q2).values)
                           .cwiseAbs()
                           .maxCoeff();
    CHECK(lhs <= 0.85 * (q1.values - q2.values).cwiseAbs().maxCoeff() + 1e-12);
  }
}

TEST_CASE("occupancy") {
  SUBCASE("single pair") {
    const OccupancyVector w = occupancy(single_state(0.3, 0.9), PolicyTable::uniform(1, 1));
    CHECK(w(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("absorbing two-state chain against a truncated series") {
    const double p = 0.3, gamma = 0.5;
    Eigen::MatrixXd t(2, 2);
    t << 1.0 - p, p, 0.0, 1.0;
    Eigen::VectorXd mu(2);
    mu << 1.0, 0.0;
    const TabularMdp m(2, 1, t, Eigen::MatrixXd::Zero(2, 1), mu, gamma);
    double series = 0.0, stay = 1.0, disc = 1.0;
    for (int k = 0; k < 200; ++k) {
      series += disc * stay;
      disc *= gamma;
      stay *= 1.0 - p;
    }
    const OccupancyVector w = occupancy(m, PolicyTable::uniform(2, 1));
    CHECK(w(0, 0) == doctest::Approx((1.0 - gamma) * series).epsilon(1e-12));
  }
  SUBCASE("agrees with the truncated oracle and with the initial-state return") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const TabularMdp m = make_random_mdp(5, 2, 0.9, 50 + seed);
      const PolicyTable pi = random_policy(5, 2, seed);
      const OccupancyVector w = occupancy(m, pi);
      CHECK(w.mass().sum() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(w.mass().minCoeff() >= 0.0);
      const OccupancyVector ref = oracle::truncated_occupancy(m, pi, m.initial_dist(), 600, 0.9);
      CHECK((w.mass() - ref.mass()).cwiseAbs().maxCoeff() < 1e-10);
      const double via_occ = (w.mass().cwiseProduct(m.reward())).sum() / (1.0 - m.gamma());
      const double via_v = m.initial_dist().dot(exact_v(m, pi));
      CHECK(std::abs(via_occ - via_v) < 1e-8);
      CHECK(std::abs(policy_return(m, pi) - via_v) < 1e-8);
    }
  }
}

TEST_CASE("occupancy is equivariant under state relabeling") {
  const int ns = 4, na = 2;
  const TabularMdp m = make_random_mdp(ns, na, 0.9, 77);
  const PolicyTable pi = random_policy(ns, na, 78);
  const int perm[ns] = {2, 0, 3, 1};  // old state s becomes perm[s]
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ns * na, ns);
  Eigen::MatrixXd r(ns, na), probs(ns, na);
  Eigen::VectorXd mu(ns);
  for (int s = 0; s < ns; ++s) {
    mu[perm[s]] = m.initial_dist()[s];
    for (int a = 0; a < na; ++a) {
      r(perm[s], a) = m.reward()(s, a);
      probs(perm[s], a) = pi(s, a);
      for (int sn = 0; sn < ns; ++sn) t(perm[s] * na + a, perm[sn]) = m.transition()(s * na + a, sn);
    }
  }
  const TabularMdp relabeled(ns, na, t, r, mu, 0.9);
  const OccupancyVector w = occupancy(m, pi);
  const OccupancyVector w2 = occupancy(relabeled, PolicyTable(probs));
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) CHECK(w2(perm[s], a) == doctest::Approx(w(s, a)).epsilon(1e-12));
}

TEST_CASE("policy_return trivial rewards") {
  const TabularMdp m = make_random_mdp(3, 2, 0.8, 9);
  const PolicyTable pi = PolicyTable::uniform(3, 2);
  CHECK(policy_return(m.with_reward(Eigen::MatrixXd::Zero(3, 2)), pi) == doctest::Approx(0.0));
  CHECK(policy_return(m.with_reward(Eigen::MatrixXd::Ones(3, 2)), pi) ==
        doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("flatten round trip") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd f = flatten(m);
  CHECK(f[4] == 5.0);
  CHECK(unflatten(f, 2, 3) == m);
}
