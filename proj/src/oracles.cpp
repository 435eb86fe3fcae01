#include "dromo/oracles.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "dromo/rng.hpp"

namespace dromo::oracle {

QTable value_iteration_q(const TabularMdp& mdp, const PolicyTable& policy, double tol,
                         int max_iters) {
  const int ns = mdp.n_states(), na = mdp.n_actions();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(ns, na);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd v(ns);
    for (int s = 0; s < ns; ++s) {
      double acc = 0.0;
      for (int a = 0; a < na; ++a) acc += policy(s, a) * q(s, a);
      v(s) = acc;
    }
    double change = 0.0;
    for (int s = 0; s < ns; ++s) {
      for (int a = 0; a < na; ++a) {
        double next = mdp.reward()(s, a);
        for (int sp = 0; sp < ns; ++sp) next += mdp.gamma() * mdp.transition()(s * na + a, sp) * v(sp);
        change = std::max(change, std::abs(next - q(s, a)));
        q(s, a) = next;
      }
    }
    if (change < tol) break;
  }
  return QTable{q};
}

double monte_carlo_return(const TabularMdp& mdp, const PolicyTable& policy, int episodes,
                          int horizon, std::uint64_t seed) {
  Rng rng(seed);
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    int s = rng.categorical(mdp.initial_dist());
    double disc = 1.0, ret = 0.0;
    for (int t = 0; t < horizon; ++t) {
      int a = rng.categorical(policy.probs().row(s).transpose());
      ret += disc * mdp.reward()(s, a);
      disc *= mdp.gamma();
      s = rng.categorical(mdp.next_state_dist(s, a).transpose());
    }
    total += ret;
  }
  return total / episodes;
}

PolicyTable policy_iteration(const TabularMdp& mdp) {
  const int ns = mdp.n_states(), na = mdp.n_actions();
  Eigen::VectorXi actions = Eigen::VectorXi::Zero(ns);
  PolicyTable pi = PolicyTable::uniform(ns, na);
  for (int round = 0; round < 10000; ++round) {
    QTable q = value_iteration_q(mdp, pi);
    Eigen::VectorXi next(ns);
    for (int s = 0; s < ns; ++s) {
      int best = 0;
      for (int a = 1; a < na; ++a)
        if (q.values(s, a) > q.values(s, best)) best = a;
      next(s) = best;
    }
    if (round > 0 && next == actions) break;
    actions = next;
    pi = PolicyTable::deterministic(actions, na);
  }
  return pi;
}

OccupancyVector truncated_occupancy(const TabularMdp& mdp, const PolicyTable& policy,
                                    const Eigen::VectorXd& start, int horizon, double discount) {
  const int ns = mdp.n_states(), na = mdp.n_actions();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(ns, ns);
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) p.row(s) += policy(s, a) * mdp.next_state_dist(s, a);
  Eigen::RowVectorXd nu = start.transpose();
  Eigen::VectorXd state_mass = Eigen::VectorXd::Zero(ns);
  double w = 1.0;
  for (int t = 0; t < horizon; ++t) {
    state_mass += w * nu.transpose();
    nu = nu * p;
    w *= discount;
  }
  Eigen::MatrixXd mass = state_mass.asDiagonal() * policy.probs();
  return OccupancyVector(mass / mass.sum());
}

namespace {

// Largest t >= 0 with center + t u inside the ball and the simplex.
double boundary_step(const Eigen::VectorXd& center, const Eigen::VectorXd& u, double radius) {
  double quad = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) quad += u(i) * u(i) / center(i);
  if (quad <= 0.0) return 0.0;
  double t = std::sqrt(radius / quad);
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (u(i) < 0.0) t = std::min(t, center(i) / -u(i));
  return t;
}

}  // namespace

double brute_force_sup(const ChiSquareBall& ball, int grid, int rounds) {
  const Eigen::VectorXd& z = ball.center.values();
  const Eigen::VectorXd& q = ball.center.probs();
  const int k = static_cast<int>(q.size());
  double best = q.dot(z);
  if (k == 1 || ball.radius == 0.0) return best;

  // Orthonormal basis of the zero-sum subspace.
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k);
  m.col(0).setOnes();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd basis = (qr.householderQ() * Eigen::MatrixXd::Identity(k, k)).rightCols(k - 1);

  const int dim = k - 1;
  auto value = [&](const Eigen::VectorXd& v) {
    double n = v.norm();
    if (n == 0.0) return -std::numeric_limits<double>::infinity();
    Eigen::VectorXd u = basis * (v / n);
    double t = boundary_step(q, u, ball.radius);
    return z.dot(q + t * u);
  };

  Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
  double width = 1.0;
  Eigen::VectorXd best_v = Eigen::VectorXd::Zero(dim);
  for (int round = 0; round < rounds; ++round) {
    long total = 1;
    for (int d = 0; d < dim; ++d) total *= grid;
    for (long idx = 0; idx < total; ++idx) {
      Eigen::VectorXd v(dim);
      long rem = idx;
      for (int d = 0; d < dim; ++d) {
        int g = static_cast<int>(rem % grid);
        rem /= grid;
        v(d) = center(d) + width * (2.0 * g / (grid - 1) - 1.0);
      }
      double val = value(v);
      if (val > best) {
        best = val;
        best_v = v;
      }
    }
    if (best_v.norm() > 0.0) center = best_v / best_v.norm();
    width = round == 0 ? 0.5 : width * 0.6;
  }
  return best;
}

double sum_critic_objective(const QTable& q, const InterpolatedWorld& world,
                            const CriticConfig& cfg, const QTable& backup) {
  const int ns = world.n_states(), na = world.n_actions();
  double total = 0.0;
  for (int s = 0; s < ns; ++s) {
    double dfs = 0.0, mean = 0.0, var = 0.0;
    for (int a = 0; a < na; ++a) {
      double diff = q.values(s, a) - backup.values(s, a);
      total += 0.5 * world.d_f(s, a) * diff * diff;
      total += cfg.beta * (world.rho(s, a) - world.d(s, a)) * q.values(s, a);
      dfs += world.d_f(s, a);
      mean += world.pi_f(s, a) * q.values(s, a);
    }
    for (int a = 0; a < na; ++a) {
      double c = q.values(s, a) - mean;
      var += world.pi_f(s, a) * c * c;
    }
    double n_s = std::max(1, world.counts.n_s(s));
    total += cfg.alpha * dfs * std::sqrt(var / n_s);
  }
  return total;
}

namespace {

// Exact 1-D minimization of a convex function of t around 0.
template <typename F>
double line_minimize(F f) {
  const double f0 = f(0.0);
  double h = 1e-3;
  while (h < 1e8 && (f(h) < f0 || f(-h) < f0)) h *= 2.0;
  std::uintmax_t iters = 500;
  auto res = boost::math::tools::brent_find_minima(f, -h, h, std::numeric_limits<double>::digits / 2,
                                                   iters);
  return res.second < f0 ? res.first : 0.0;
}

}  // namespace

QTable coordinate_descent_critic(const InterpolatedWorld& world, const CriticConfig& cfg,
                                 const QTable& backup, const QTable& start, int max_sweeps,
                                 double tol) {
  const int ns = world.n_states(), na = world.n_actions();
  QTable q = start;
  for (int s = 0; s < ns; ++s) {
    std::vector<int> free;
    for (int a = 0; a < na; ++a) {
      if (world.d_f(s, a) > 0.0) {
        free.push_back(a);
      } else {
        q.values(s, a) = backup.values(s, a);
      }
    }
    if (free.empty()) continue;
    // Objective restricted to state s; other states do not interact.
    auto state_obj = [&](const Eigen::RowVectorXd& row) {
      double fit = 0.0, lin = 0.0, dfs = 0.0, mean = 0.0, var = 0.0;
      for (int a = 0; a < na; ++a) {
        double diff = row(a) - backup.values(s, a);
        fit += 0.5 * world.d_f(s, a) * diff * diff;
        lin += cfg.beta * (world.rho(s, a) - world.d(s, a)) * row(a);
        dfs += world.d_f(s, a);
        mean += world.pi_f(s, a) * row(a);
      }
      for (int a = 0; a < na; ++a) var += world.pi_f(s, a) * (row(a) - mean) * (row(a) - mean);
      return fit + lin + cfg.alpha * dfs * std::sqrt(var / std::max(1, world.counts.n_s(s)));
    };
    std::vector<Eigen::RowVectorXd> dirs;
    Eigen::RowVectorXd ones = Eigen::RowVectorXd::Zero(na);
    for (int a : free) {
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(na);
      e(a) = 1.0;
      dirs.push_back(e);
      ones(a) = 1.0;
    }
    dirs.push_back(ones);
    for (std::size_t i = 0; i < free.size(); ++i)
      for (std::size_t j = i + 1; j < free.size(); ++j) {
        Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(na);
        e(free[i]) = 1.0;
        e(free[j]) = -1.0;
        dirs.push_back(e);
      }
    Eigen::RowVectorXd row = q.values.row(s);
    double current = state_obj(row);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      for (const auto& dir : dirs) {
        double t = line_minimize([&](double t) { return state_obj(row + t * dir); });
        row += t * dir;
      }
      double next = state_obj(row);
      bool done = current - next <= tol * std::max(1.0, std::abs(current));
      current = next;
      if (done) break;
    }
    q.values.row(s) = row;
  }
  return q;
}

double sum_strict_objective(const Eigen::VectorXd& omega, const FeatureMap& features,
                            const InterpolatedWorld& world, const CriticConfig& cfg,
                            const QTable& backup) {
  const int ns = world.n_states(), na = world.n_actions();
  const Eigen::MatrixXd& f = features.matrix();
  std::vector<double> q(static_cast<std::size_t>(ns) * na, 0.0);
  for (int i = 0; i < ns * na; ++i)
    for (int j = 0; j < f.cols(); ++j) q[i] += f(i, j) * omega(j);
  double fit = 0.0, lin = 0.0, mean = 0.0;
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) {
      double qi = q[s * na + a];
      double diff = qi - backup.values(s, a);
      fit += 0.5 * world.d_f(s, a) * diff * diff;
      lin += (world.rho(s, a) - world.d(s, a)) * qi;
      mean += world.d_f(s, a) * qi;
    }
  double var = 0.0;
  for (int s = 0; s < ns; ++s)
    for (int a = 0; a < na; ++a) var += world.d_f(s, a) * (q[s * na + a] - mean) * (q[s * na + a] - mean);
  double n = static_cast<double>(std::max<long>(1, world.counts.n_total));
  return fit + cfg.alpha * std::sqrt(var / n) + cfg.beta * lin;
}

}  // namespace dromo::oracle
