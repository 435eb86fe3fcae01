#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dromo/envs.hpp"
#include "dromo/instances.hpp"
#include "dromo/io.hpp"
#include "dromo/offline_data.hpp"
#include "dromo/oracles.hpp"
#include "dromo/rng.hpp"

using namespace dromo;

namespace {

double tv(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return 0.5 * (a - b).cwiseAbs().sum();
}

Eigen::MatrixXd frequencies(const Dataset& d) {
  const CountTable c = CountTable::from(d);
  return c.n_sa.cast<double>() / static_cast<double>(c.n_total);
}

}  // namespace

TEST_CASE("deterministic rollouts repeat one trajectory") {
  // Two-state cycle 0 -> 1 -> 0 under action 0.
  Eigen::MatrixXd t(4, 2);
  t << 0, 1, 0, 1, 1, 0, 1, 0;
  Eigen::MatrixXd r(2, 2);
  r << 0.5, -1, 2, -1;
  Eigen::VectorXd mu(2);
  mu << 1, 0;
  const TabularMdp m(2, 2, t, r, mu, 0.9);
  Eigen::VectorXi acts(2);
  acts << 0, 0;
  const Dataset d = generate_dataset(m, PolicyTable::deterministic(acts, 2), 9, 3, 4);
  const int expect_s[9] = {0, 1, 0, 1, 0, 1, 0, 1, 0};
  for (int i = 0; i < 9; ++i) {
    CHECK(d[i].s == expect_s[i]);
    CHECK(d[i].a == 0);
    CHECK(d[i].s_next == 1 - expect_s[i]);
    CHECK(d[i].r == r(expect_s[i], 0));
  }
}

TEST_CASE("same seed gives identical datasets") {
  const TabularMdp m = make_random_mdp(4, 2, 0.9, 1);
  const Dataset a = generate_dataset(m, PolicyTable::uniform(4, 2), 500, 17);
  const Dataset b = generate_dataset(m, PolicyTable::uniform(4, 2), 500, 17);
  std::ostringstream sa, sb;
  write_dataset(sa, a);
  write_dataset(sb, b);
  CHECK(sa.str() == sb.str());
  const Dataset c = generate_dataset(m, PolicyTable::uniform(4, 2), 500, 18);
  CHECK_FALSE(a.records() == c.records());
  CHECK_THROWS(generate_dataset(m, PolicyTable::uniform(4, 2), 0, 1));
}

TEST_CASE("record frequencies follow the per-episode visitation") {
  const TabularMdp m = make_chain(3, 0.9);
  const PolicyTable pi = random_policy(3, 2, 8);
  const int episode = 100;
  const Dataset d = generate_dataset(m, pi, 100000, 21, episode);
  // Records average the undiscounted state distribution over each episode.
  const OccupancyVector ref = oracle::truncated_occupancy(m, pi, m.initial_dist(), episode, 1.0);
  CHECK(tv(frequencies(d), ref.mass()) < 0.01);
}

TEST_CASE("record frequencies match the discounted occupancy from a stationary start") {
  const TabularMdp base = make_chain(3, 0.9);
  const PolicyTable pi = random_policy(3, 2, 9);
  // Stationary distribution of the state kernel by power iteration.
  const Eigen::MatrixXd p = state_transition(base, pi);
  Eigen::RowVectorXd nu = Eigen::RowVectorXd::Constant(3, 1.0 / 3.0);
  for (int i = 0; i < 5000; ++i) nu = nu * p;
  const TabularMdp m = base.with_initial_dist(nu.transpose() / nu.sum());
  const Dataset d = generate_dataset(m, pi, 100000, 22);
  CHECK(tv(frequencies(d), occupancy(m, pi).mass()) < 0.01);
}

TEST_CASE("count table marginals are consistent") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TabularMdp m = make_random_mdp(5, 3, 0.9, seed);
    const Dataset d = generate_dataset(m, random_policy(5, 3, seed), 300, seed);
    const CountTable c = CountTable::from(d);
    CHECK(c.n_total == 300);
    for (int s = 0; s < 5; ++s) CHECK(c.n_s[s] == c.n_sa.row(s).sum());
    CHECK(c.n_s.sum() == c.n_total);
  }
}

TEST_CASE("empirical_mdp") {
  SUBCASE("single transition") {
    const Dataset d(2, 1, {{0, 0, 1, 2.0}});
    const TabularMdp e = empirical_mdp(d, 0.9, 0.0);
    CHECK(e.transition()(0, 1) == 1.0);
    CHECK(e.reward()(0, 0) == 2.0);
    // Unvisited row falls back to uniform with reward 0.
    CHECK(e.transition()(1, 0) == 0.5);
    CHECK(e.reward()(1, 0) == 0.0);
  }
  SUBCASE("laplace smoothing of an empty row is uniform") {
    const Dataset d(3, 2, {{0, 0, 1, 1.0}, {0, 0, 2, 0.0}});
    const TabularMdp e = empirical_mdp(d, 0.9, 1.0);
    for (int sn = 0; sn < 3; ++sn) CHECK(e.transition()(1, sn) == doctest::Approx(1.0 / 3.0));
    CHECK(e.transition()(0, 1) == doctest::Approx(2.0 / 5.0));
    CHECK(e.reward()(0, 0) == doctest::Approx(0.5));
  }
  SUBCASE("smoothed rows are always valid") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const TabularMdp m = make_random_mdp(4, 3, 0.9, seed);
      const Dataset d = generate_dataset(m, random_policy(4, 3, seed), 30, seed);
      const TabularMdp e = empirical_mdp(d, 0.9, 0.3);
      CHECK(e.transition().minCoeff() >= 0.0);
      CHECK((e.transition().rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("large dataset recovers the dynamics") {
    const TabularMdp m = make_random_mdp(3, 2, 0.9, 31);
    const Dataset d = generate_dataset(m, PolicyTable::uniform(3, 2), 1000000, 32);
    const TabularMdp e = empirical_mdp(d, 0.9, 0.0);
    for (int i = 0; i < 6; ++i)
      CHECK(0.5 * (e.transition().row(i) - m.transition().row(i)).cwiseAbs().sum() < 0.01);
    CHECK((e.reward() - m.reward()).cwiseAbs().maxCoeff() < 1e-9);  // deterministic rewards, summation error only
  }
}

TEST_CASE("behavior_mle") {
  SUBCASE("uniform behavior") {
    const TabularMdp m = make_random_mdp(3, 3, 0.9, 41);
    const Dataset d = generate_dataset(m, PolicyTable::uniform(3, 3), 100000, 42);
    const PolicyTable b = behavior_mle(d);
    CHECK((b.probs().array() - 1.0 / 3.0).abs().maxCoeff() < 0.02);
  }
  SUBCASE("deterministic behavior and unvisited states") {
    const Dataset d(3, 2, {{0, 1, 1, 0.0}, {1, 0, 0, 0.0}, {0, 1, 0, 0.0}});
    const PolicyTable b = behavior_mle(d);
    CHECK(b(0, 1) == 1.0);
    CHECK(b(1, 0) == 1.0);
    CHECK(b(2, 0) == 0.5);
    CHECK(b(2, 1) == 0.5);
  }
  SUBCASE("invariant under shuffling") {
    const TabularMdp m = make_random_mdp(4, 3, 0.9, 43);
    const Dataset d = generate_dataset(m, random_policy(4, 3, 44), 2000, 45);
    std::vector<Transition> shuffled = d.records();
    Rng rng(46);
    for (std::size_t i = shuffled.size() - 1; i > 0; --i)
      std::swap(shuffled[i], shuffled[rng.below(static_cast<int>(i) + 1)]);
    CHECK(behavior_mle(Dataset(4, 3, shuffled)).probs() == behavior_mle(d).probs());
  }
}

TEST_CASE("sampling_error_bound") {
  CountTable c;
  c.n_sa.resize(1, 3);
  c.n_sa << 0, 100, 400;
  c.n_s = c.n_sa.rowwise().sum();
  c.n_total = 500;
  BoundConstants k;
  k.c_rt_delta = 1.0;
  const Eigen::MatrixXd b = sampling_error_bound(c, k);
  CHECK(b(0, 0) == doctest::Approx(1.0));
  CHECK(b(0, 1) == doctest::Approx(0.1));
  CHECK(b(0, 2) == doctest::Approx(0.05));
}

TEST_CASE("dataset file format") {
  std::istringstream in("# comment\n0 1 2 0.5\n\n2 0 0 -1e-3  # trailing\n");
  const Dataset d = read_dataset(in, 3, 2);
  REQUIRE(d.size() == 2);
  CHECK(d[1] == Transition{2, 0, 0, -1e-3});
  std::stringstream out;
  write_dataset(out, d);
  CHECK(read_dataset(out, 3, 2).records() == d.records());

  std::istringstream bad("0 2 0 1.0\n");
  CHECK_THROWS_AS(read_dataset(bad, 3, 2), IoError);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS(read_dataset(empty, 3, 2));
}

TEST_CASE("start distributions") {
  const Dataset d(4, 1, {{0, 0, 1, 0}, {0, 0, 1, 0}, {2, 0, 1, 0}});
  const Eigen::VectorXd u = dataset_start_distribution(d, InitialStateSampling::kUniformStates);
  CHECK(u[0] == 0.5);
  CHECK(u[1] == 0.0);
  const Eigen::VectorXd w = dataset_start_distribution(d, InitialStateSampling::kUniformRecords);
  CHECK(w[0] == doctest::Approx(2.0 / 3.0));
}
