#include "dromo/envs.hpp"

#include <regex>
#include <stdexcept>

#include "dromo/rng.hpp"

namespace dromo {

namespace {

constexpr double kIntended = 0.9;

void check_size(long pairs) {
  if (pairs > kMaxStateActions)
    throw std::invalid_argument("environment exceeds " + std::to_string(kMaxStateActions) +
                                " state-action pairs");
}

}  // namespace

TabularMdp make_chain(int n, double gamma) {
  if (n < 2) throw std::invalid_argument("chain: need at least 2 states");
  check_size(2L * n);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2 * n, n);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, 2);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 2; ++a) {
      int target = a == 0 ? std::max(0, s - 1) : std::min(n - 1, s + 1);
      t(s * 2 + a, target) += kIntended;
      t(s * 2 + a, s) += 1.0 - kIntended;
    }
  }
  r.row(n - 1).setOnes();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  mu(0) = 1.0;
  return TabularMdp(n, 2, std::move(t), std::move(r), std::move(mu), gamma);
}

TabularMdp make_gridworld(int n, double gamma) {
  if (n < 2) throw std::invalid_argument("gridworld: need n >= 2");
  const int ns = n * n;
  check_size(4L * ns);
  const int dr[4] = {-1, 0, 1, 0};
  const int dc[4] = {0, 1, 0, -1};
  auto move = [&](int s, int dir) {
    int row = s / n + dr[dir], col = s % n + dc[dir];
    if (row < 0 || row >= n || col < 0 || col >= n) return s;
    return row * n + col;
  };
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(4 * ns, ns);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < 4; ++a) {
      t(s * 4 + a, move(s, a)) += kIntended;
      for (int dir = 0; dir < 4; ++dir) t(s * 4 + a, move(s, dir)) += (1.0 - kIntended) / 4.0;
    }
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(ns, 4);
  r.row(ns - 1).setOnes();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(ns);
  mu(0) = 1.0;
  return TabularMdp(ns, 4, std::move(t), std::move(r), std::move(mu), gamma);
}

TabularMdp make_random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed) {
  if (n_states < 1 || n_actions < 1) throw std::invalid_argument("random: empty state or action set");
  check_size(static_cast<long>(n_states) * n_actions);
  Rng rng(seed);
  Eigen::MatrixXd t(n_states * n_actions, n_states);
  for (int i = 0; i < t.rows(); ++i) t.row(i) = rng.dirichlet(n_states).transpose();
  Eigen::MatrixXd r(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) r(s, a) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
  return TabularMdp(n_states, n_actions, std::move(t), std::move(r), std::move(mu), gamma);
}

namespace {

const std::regex kChain(R"(chain(\d{1,6}))");
const std::regex kGrid(R"(gridworld(\d{1,4}))");
const std::regex kRandom(R"(random(\d{1,6})x(\d{1,6}))");

}  // namespace

bool is_builtin_name(const std::string& name) {
  return std::regex_match(name, kChain) || std::regex_match(name, kGrid) ||
         std::regex_match(name, kRandom);
}

TabularMdp make_builtin(const std::string& name, double gamma, std::uint64_t seed) {
  std::smatch m;
  if (std::regex_match(name, m, kChain)) return make_chain(std::stoi(m[1]), gamma);
  if (std::regex_match(name, m, kGrid)) return make_gridworld(std::stoi(m[1]), gamma);
  if (std::regex_match(name, m, kRandom))
    return make_random_mdp(std::stoi(m[1]), std::stoi(m[2]), gamma, seed);
  throw std::invalid_argument("unknown builtin environment '" + name + "'");
}

}  // namespace dromo
