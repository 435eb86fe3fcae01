#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "dromo/envs.hpp"

using namespace dromo;

TEST_CASE("chain dynamics") {
  const TabularMdp m = make_chain(5, 0.9);
  REQUIRE(m.n_states() == 5);
  REQUIRE(m.n_actions() == 2);
  const auto& t = m.transition();
  // Right from state 1: 0.9 to state 2, stays otherwise.
  CHECK(t(1 * 2 + 1, 2) == doctest::Approx(0.9));
  CHECK(t(1 * 2 + 1, 1) == doctest::Approx(0.1));
  // Left from the first state can only stay.
  CHECK(t(0, 0) == doctest::Approx(1.0));
  // Right from the last state can only stay.
  CHECK(t(4 * 2 + 1, 4) == doctest::Approx(1.0));
  CHECK(m.reward().row(4).minCoeff() == 1.0);
  CHECK(m.reward().topRows(4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.initial_dist()(0) == 1.0);
  CHECK_THROWS_AS(make_chain(1, 0.9), std::invalid_argument);
}

TEST_CASE("gridworld dynamics") {
  const int n = 3;
  const TabularMdp m = make_gridworld(n, 0.9);
  REQUIRE(m.n_states() == 9);
  REQUIRE(m.n_actions() == 4);
  const auto& t = m.transition();
  for (int i = 0; i < t.rows(); ++i) CHECK(t.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  // Up from the top-left corner: up and left bump into walls.
  CHECK(t(0 * 4 + 0, 0) == doctest::Approx(0.9 + 0.05));
  CHECK(t(0 * 4 + 0, 1) == doctest::Approx(0.025));
  CHECK(t(0 * 4 + 0, 3) == doctest::Approx(0.025));
  // Right from the center.
  CHECK(t(4 * 4 + 1, 5) == doctest::Approx(0.925));
  CHECK(t(4 * 4 + 1, 1) == doctest::Approx(0.025));
  CHECK(m.reward()(8, 2) == 1.0);
  CHECK(m.reward().sum() == 4.0);
  CHECK(m.initial_dist()(0) == 1.0);
}

TEST_CASE("random mdp is seeded") {
  const TabularMdp a = make_random_mdp(6, 3, 0.9, 11);
  const TabularMdp b = make_random_mdp(6, 3, 0.9, 11);
  const TabularMdp c = make_random_mdp(6, 3, 0.9, 12);
  CHECK(a.transition() == b.transition());
  CHECK(a.reward() == b.reward());
  CHECK(a.transition() != c.transition());
  CHECK(a.reward().cwiseAbs().maxCoeff() <= 1.0);
  CHECK(a.initial_dist().minCoeff() == doctest::Approx(1.0 / 6));
}

TEST_CASE("builtin names") {
  for (const char* name : {"chain5", "gridworld4", "random6x3"}) {
    CHECK(is_builtin_name(name));
    CHECK_NOTHROW(make_builtin(name, 0.9, 1));
  }
  CHECK(make_builtin("gridworld4", 0.9, 1).n_states() == 16);
  CHECK(make_builtin("random6x3", 0.9, 1).n_actions() == 3);
  for (const char* name : {"chain", "grid4", "random6", "chain5x", "", "Chain5"}) {
    CHECK_FALSE(is_builtin_name(name));
    CHECK_THROWS_AS(make_builtin(name, 0.9, 1), std::invalid_argument);
  }
  CHECK_THROWS_AS(make_builtin("random5000x3", 0.9, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_builtin("gridworld60", 0.9, 1), std::invalid_argument);
}
