#include "dromo/loop.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dromo/io.hpp"
#include "dromo/rng.hpp"

namespace dromo {

void RolloutBuffer::append(const RolloutBuffer& other) {
  transitions.insert(transitions.end(), other.transitions.begin(), other.transitions.end());
  n_trajectories += other.n_trajectories;
  horizon = std::max(horizon, other.horizon);
  if (capacity > 0 && transitions.size() > capacity)
    transitions.erase(transitions.begin(),
                      transitions.begin() + static_cast<long>(transitions.size() - capacity));
}

RolloutBuffer generate_rollouts(const LearnedModel& model, const PolicyTable& policy,
                                const Dataset& dataset, int k, int h, std::uint64_t seed,
                                InitialStateSampling init) {
  if (k < 1 || h < 1) throw std::invalid_argument("generate_rollouts: K and H must be >= 1");
  const TabularMdp& m = model.mdp_hat;
  if (policy.n_states() != m.n_states() || policy.n_actions() != m.n_actions())
    throw std::invalid_argument("generate_rollouts: policy shape mismatch");
  Eigen::VectorXd start = dataset_start_distribution(dataset, init);
  Rng rng(seed);
  RolloutBuffer buf;
  buf.horizon = h;
  buf.n_trajectories = k;
  buf.capacity = static_cast<std::size_t>(k) * static_cast<std::size_t>(h);
  buf.transitions.reserve(buf.capacity);
  for (int traj = 0; traj < k; ++traj) {
    int s = rng.categorical(start);
    for (int step = 0; step < h; ++step) {
      int a = rng.categorical(policy.probs().row(s).transpose());
      int s_next = rng.categorical(m.next_state_dist(s, a).transpose());
      buf.transitions.push_back({s, a, s_next, m.reward()(s, a), step});
      s = s_next;
    }
  }
  return buf;
}

OccupancyVector buffer_occupancy(const RolloutBuffer& buffer, int n_states, int n_actions,
                                 double discount) {
  if (buffer.transitions.empty()) throw std::invalid_argument("buffer_occupancy: empty buffer");
  if (!(discount > 0.0 && discount <= 1.0))
    throw std::invalid_argument("buffer_occupancy: discount must lie in (0, 1]");
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n_states, n_actions);
  for (const auto& t : buffer.transitions) {
    if (t.s < 0 || t.s >= n_states || t.a < 0 || t.a >= n_actions)
      throw std::invalid_argument("buffer_occupancy: record out of range");
    mass(t.s, t.a) += std::pow(discount, t.step);
  }
  return OccupancyVector(mass / mass.sum());
}

PolicyTable actor_update(const QTable& q, const OccupancyVector& state_marginal,
                         double entropy_weight) {
  if (!(entropy_weight >= 0.0)) throw std::invalid_argument("actor_update: negative entropy weight");
  if (state_marginal.n_states() != q.n_states())
    throw std::invalid_argument("actor_update: state marginal shape mismatch");
  const int ns = q.n_states(), na = q.n_actions();
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(ns, na);
  for (int s = 0; s < ns; ++s) {
    if (entropy_weight == 0.0) {
      int best = 0;
      for (int a = 1; a < na; ++a)
        if (q.values(s, a) > q.values(s, best)) best = a;
      probs(s, best) = 1.0;
    } else {
      Eigen::RowVectorXd z = q.values.row(s) / entropy_weight;
      z = (z.array() - z.maxCoeff()).exp();
      probs.row(s) = z / z.sum();
    }
  }
  return PolicyTable(std::move(probs));
}

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("polyak: tau must lie in (0, 1]");
}

}  // namespace

QTable polyak(const QTable& current, const QTable& target, double tau) {
  check_tau(tau);
  if (tau == 1.0) return current;
  return QTable{tau * current.values + (1.0 - tau) * target.values};
}

PolicyTable polyak(const PolicyTable& current, const PolicyTable& target, double tau) {
  check_tau(tau);
  if (tau == 1.0) return current;
  Eigen::MatrixXd p = tau * current.probs() + (1.0 - tau) * target.probs();
  Eigen::VectorXd row_sums = p.rowwise().sum();
  return PolicyTable(row_sums.asDiagonal().inverse() * p);
}

void LoopConfig::validate() const {
  critic.validate();
  mopo.validate();
  constants.validate();
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("LoopConfig: gamma must lie in [0, 1)");
  if (!(model_smoothing >= 0.0)) throw std::invalid_argument("LoopConfig: negative model smoothing");
  if (max_iters < 1) throw std::invalid_argument("LoopConfig: max_iters must be >= 1");
  if (critic_iters < 1) throw std::invalid_argument("LoopConfig: critic_iters must be >= 1");
  if (!(critic_tol >= 0.0)) throw std::invalid_argument("LoopConfig: negative critic_tol");
  check_tau(tau);
  if (!(entropy_weight >= 0.0)) throw std::invalid_argument("LoopConfig: negative entropy weight");
  if (rollouts < 1 || horizon < 1) throw std::invalid_argument("LoopConfig: rollouts and horizon must be >= 1");
  if (!(beta_safety > 0.0)) throw std::invalid_argument("LoopConfig: beta_safety must be positive");
}

TraceRow Tracer::evaluate(int iter, const PolicyTable& policy, const QTable& q,
                          const TabularMdp& model) const {
  TraceRow row;
  row.iter = iter;
  row.mean_q_hat = initial_value(truth_.initial_dist(), policy, q);
  row.return_true = policy_return(truth_, policy);
  row.return_model = policy_return(model, policy);
  row.truth_q_mean = row.return_true;
  return row;
}

namespace {

// Iterates q <- step(q) from q0 until max |dq| <= tol or the budget runs out.
template <typename Step>
QTable iterate_critic(const QTable& q0, int budget, double tol, Step step) {
  QTable q = q0;
  for (int j = 0; j < budget; ++j) {
    QTable next = step(q);
    double change = (next.values - q.values).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (change <= tol) break;
  }
  return q;
}

}  // namespace

LoopResult run_loop(Algorithm kind, const Dataset& dataset, const LoopConfig& cfg,
                    const Tracer& tracer) {
  cfg.validate();
  const int ns = dataset.n_states(), na = dataset.n_actions();
  Eigen::VectorXd start = dataset_start_distribution(dataset, cfg.init_sampling);
  LearnedModel model = fit_model(dataset, cfg.gamma, cfg.model_smoothing, start);
  TabularMdp empirical = empirical_mdp(dataset, cfg.gamma, 0.0, start);
  PolicyTable behavior = behavior_mle(dataset);
  const CountTable& counts = model.source_counts;
  DeviationTerms deviation = concentration_deviation(counts, cfg.constants);

  LoopResult out{LoopState{QTable::zeros(ns, na), QTable::zeros(ns, na),
                           PolicyTable::uniform(ns, na), PolicyTable::uniform(ns, na), cfg.tau, 0},
                 {}, false};
  LoopState& st = out.state;
  RolloutBuffer buffer;
  buffer.capacity = cfg.buffer_capacity;
  double alpha_t = cfg.mopo.lambda_pen;

  for (int i = 0; i < cfg.max_iters; ++i) {
    st.iter = i;
    TraceRow row;
    try {
      CriticConfig ccfg = cfg.critic;
      if (kind == Algorithm::kMopo) {
        TabularMdp penalized = mopo_penalized_mdp(model, alpha_t);
        st.q = iterate_critic(st.q_target, cfg.critic_iters, cfg.critic_tol, [&](const QTable& q) {
          return bellman_expectation(penalized, st.policy, q);
        });
      } else {
        OccupancyVector rho = occupancy(model.mdp_hat, st.policy_target);
        if (cfg.rho_mode == RhoMode::kBuffer) {
          RolloutBuffer fresh = generate_rollouts(model, st.policy_target, dataset, cfg.rollouts,
                                                  cfg.horizon, derive_seed(cfg.seed, i),
                                                  cfg.init_sampling);
          if (cfg.accumulate_buffer) {
            buffer.append(fresh);
          } else {
            buffer = std::move(fresh);
          }
          rho = buffer_occupancy(buffer, ns, na, cfg.gamma);
        }
        InterpolatedWorld world = make_world(rho, counts, st.policy, behavior, ccfg.f, start,
                                             cfg.gamma, cfg.convention);
        if (kind == Algorithm::kCombo) ccfg.alpha = 0.0;
        if (cfg.beta_auto) {
          ThresholdReport thr = beta_threshold(world, ccfg, deviation, cfg.constants);
          ccfg.beta = std::max(0.0, cfg.beta_safety * thr.threshold);
        }
        if (kind == Algorithm::kCombo) {
          st.q = iterate_critic(st.q_target, cfg.critic_iters, cfg.critic_tol, [&](const QTable& q) {
            return combo_critic_update(q, world, ccfg, model, empirical);
          });
        } else {
          st.q = iterate_critic(st.q_target, cfg.critic_iters, cfg.critic_tol, [&](const QTable& q) {
            return critic_update(q, world, ccfg, model, empirical).q;
          });
        }
      }
      row = tracer.evaluate(i, st.policy, st.q, model.mdp_hat);
      row.beta = kind == Algorithm::kMopo ? 0.0 : ccfg.beta;
      row.alpha = kind == Algorithm::kMopo ? alpha_t : ccfg.alpha;
      row.f = kind == Algorithm::kMopo ? 0.0 : ccfg.f;
      out.trace.push_back(row);

      PolicyTable next = actor_update(st.q, occupancy(model.mdp_hat, st.policy), cfg.entropy_weight);
      st.q_target = polyak(st.q, st.q_target, cfg.tau);
      st.policy_target = polyak(next, st.policy_target, cfg.tau);
      double change = (next.probs() - st.policy.probs()).cwiseAbs().maxCoeff();
      st.policy = std::move(next);

      bool temp_settled = true;
      if (kind == Algorithm::kMopo && cfg.mopo.auto_temp) {
        double prev = alpha_t;
        alpha_t = mopo_temperature_step(alpha_t, model, occupancy(model.mdp_hat, st.policy),
                                        dataset, cfg.mopo);
        temp_settled = std::abs(alpha_t - prev) < 1e-12;
      }
      if (change < 1e-8 && temp_settled) {
        out.policy_converged = true;
        break;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("iteration " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

LoopResult run_dromo(const TabularMdp& truth, const Dataset& dataset, const LoopConfig& cfg) {
  return run_loop(Algorithm::kDromo, dataset, cfg, Tracer(truth));
}

LoopResult run_baseline(Algorithm kind, const TabularMdp& truth, const Dataset& dataset,
                        const LoopConfig& cfg) {
  if (kind == Algorithm::kDromo) throw std::invalid_argument("run_baseline: expected combo or mopo");
  return run_loop(kind, dataset, cfg, Tracer(truth));
}

void write_trace(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iter,mean_q_hat,return_true,return_model,beta,alpha,f\n";
  for (const auto& r : trace)
    out << r.iter << ',' << format_double(r.mean_q_hat) << ',' << format_double(r.return_true)
        << ',' << format_double(r.return_model) << ',' << format_double(r.beta) << ','
        << format_double(r.alpha) << ',' << format_double(r.f) << '\n';
}

void write_mopo_trace(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iter,alpha_t,mean_q,return_on_truth,return_on_model\n";
  for (const auto& r : trace)
    out << r.iter << ',' << format_double(r.alpha) << ',' << format_double(r.mean_q_hat) << ','
        << format_double(r.return_true) << ',' << format_double(r.return_model) << '\n';
}

}  // namespace dromo
