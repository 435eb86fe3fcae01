#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "dromo/io.hpp"

using namespace dromo;
using namespace dromo::cli;

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(
      "# comment\n"
      "env = gridworld4\n"
      "gamma = 0.95   # trailing\n"
      "\n"
      "beta = auto\n"
      "f = 0.25\n"
      "critic_rule = closed_form\n"
      "rho_mode = buffer\n"
      "seed = 7\n",
      "t.cfg");
  CHECK(c.env == "gridworld4");
  CHECK(c.gamma == 0.95);
  CHECK(c.loop.gamma == 0.95);
  CHECK(c.loop.beta_auto);
  CHECK(c.loop.critic.f == 0.25);
  CHECK(c.loop.critic.rule == CriticRule::kClosedForm);
  CHECK(c.loop.rho_mode == RhoMode::kBuffer);
  REQUIRE(c.seed.has_value());
  CHECK(*c.seed == 7);

  CHECK_THROWS_AS(parse_config("colour = red\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config("f = 0.1\nf = 0.2\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config("f 0.1\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config("max_iters = 3.5\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config("algorithm = sac\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = -1\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config("buffer_capacity = 0\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config("auto_temp = maybe\n", "t"), ConfigError);
}

TEST_CASE("described config parses back to itself") {
  ExperimentConfig c = parse_config("env = random6x3\nalpha = 0.3\nbeta = 1.5\nseed = 3\n", "t");
  const std::string text = describe_config(c);
  const ExperimentConfig again = parse_config(text, "described");
  CHECK(describe_config(again) == text);
  CHECK(again.loop.critic.alpha == 0.3);
  CHECK(again.loop.critic.beta == 1.5);
}

TEST_CASE("trace reading") {
  SUBCASE("dromo schema with a seed line") {
    std::istringstream in("# seed=12\niter,mean_q_hat,return_true,return_model,beta,alpha,f\n0,1,2,3,4,5,6\n");
    const TraceTable t = read_trace(in, "a.csv", 99);
    CHECK(t.seed == 12);
    CHECK(t.columns.size() == 7);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][3] == "3");
  }
  SUBCASE("mopo schema, columns reordered, fallback seed") {
    std::istringstream in("mean_q,iter,alpha_t,return_on_model,return_on_truth\n1,0,2,3,4\n");
    const TraceTable t = read_trace(in, "b.csv", 5);
    CHECK(t.seed == 5);
    CHECK(t.columns.front() == "iter");
    CHECK(t.rows[0] == std::vector<std::string>{"0", "2", "1", "4", "3"});
  }
  SUBCASE("missing column") {
    std::istringstream in("iter,mean_q_hat\n0,1\n");
    CHECK_THROWS_AS(read_trace(in, "c.csv", 0), IoError);
  }
  SUBCASE("no header") {
    std::istringstream in("# seed=1\n");
    CHECK_THROWS_AS(read_trace(in, "d.csv", 0), IoError);
  }
}

TEST_CASE("gen then run in a scratch directory") {
  const auto dir = std::filesystem::temp_directory_path() / "dromo_unit_cli";
  std::filesystem::remove_all(dir);
  ExperimentConfig c = parse_config("env = chain5\nn_transitions = 400\nmax_iters = 5\nseed = 4\n", "t");
  c.out_dir = dir.string();
  std::ostringstream log;
  CHECK(cmd_gen(c, log) == kOk);
  CHECK(std::filesystem::exists(dir / "mdp.txt"));
  CHECK(std::filesystem::exists(dir / "dataset.txt"));
  CHECK(cmd_run(c, log) == kOk);
  std::ifstream trace(dir / "trace.csv");
  REQUIRE(trace.good());
  const TraceTable t = read_trace(trace, "trace.csv", 0);
  CHECK(t.seed == 4);
  CHECK_FALSE(t.rows.empty());

  ExperimentConfig unseeded = c;
  unseeded.seed.reset();
  CHECK_THROWS(cmd_gen(unseeded, log));
  std::filesystem::remove_all(dir);
}
