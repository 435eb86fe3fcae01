#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dromo/baselines.hpp"
#include "dromo/bounds.hpp"
#include "dromo/critic.hpp"
#include "dromo/dynamics_model.hpp"
#include "dromo/offline_data.hpp"

namespace dromo {

struct RolloutStep {
  int s;
  int a;
  int s_next;
  double r;
  int step;  // position within its trajectory, 0-based
  bool operator==(const RolloutStep&) const = default;
};

struct RolloutBuffer {
  std::vector<RolloutStep> transitions;
  std::size_t capacity = 0;
  int horizon = 0;
  int n_trajectories = 0;

  // Appends, dropping the oldest records beyond capacity.
  void append(const RolloutBuffer& other);
};

// K trajectories of H steps on the model, starting from dataset states
// (sampled per init), actions from policy.
RolloutBuffer generate_rollouts(const LearnedModel& model, const PolicyTable& policy,
                                const Dataset& dataset, int k, int h, std::uint64_t seed,
                                InitialStateSampling init = InitialStateSampling::kUniformStates);

// Record frequencies weighted by discount^step and normalized. discount = 1
// gives raw frequencies.
OccupancyVector buffer_occupancy(const RolloutBuffer& buffer, int n_states, int n_actions,
                                 double discount);

// Softmax(Q / entropy_weight) per state, or greedy one-hot with the lowest
// index winning ties when entropy_weight is 0.
PolicyTable actor_update(const QTable& q, const OccupancyVector& state_marginal,
                         double entropy_weight);

QTable polyak(const QTable& current, const QTable& target, double tau);
PolicyTable polyak(const PolicyTable& current, const PolicyTable& target, double tau);

struct LoopState {
  QTable q;
  QTable q_target;
  PolicyTable policy;
  PolicyTable policy_target;
  double tau = 1.0;
  int iter = 0;
};

enum class Algorithm { kDromo, kCombo, kMopo };
enum class RhoMode { kAnalytic, kBuffer };

struct LoopConfig {
  CriticConfig critic;
  MopoConfig mopo;
  bool beta_auto = false;
  double beta_safety = 2.0;
  BoundConstants constants;
  double gamma = 0.9;
  double model_smoothing = 0.0;
  InterpConvention convention = InterpConvention::kVerbatim;
  int max_iters = 50;
  int critic_iters = 1000;
  double critic_tol = 1e-10;
  double tau = 1.0;
  double entropy_weight = 0.0;
  RhoMode rho_mode = RhoMode::kAnalytic;
  int rollouts = 100;  // K
  int horizon = 20;    // H
  bool accumulate_buffer = false;
  std::size_t buffer_capacity = 1000000;
  InitialStateSampling init_sampling = InitialStateSampling::kUniformStates;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double mean_q_hat = 0.0;  // E_{mu, pi}[Q_hat] with the truth's mu
  double return_true = 0.0;
  double return_model = 0.0;
  double beta = 0.0;
  double alpha = 0.0;  // critic alpha, or the MOPO temperature
  double f = 0.0;
  // E_{mu, pi}[Q^pi] on the truth, the reference of the lower-bound check.
  double truth_q_mean = 0.0;
};

// The only holder of the true MDP during a run; it evaluates policies for the
// trace and never feeds anything back into the loop.
class Tracer {
 public:
  explicit Tracer(TabularMdp truth) : truth_(std::move(truth)) {}
  TraceRow evaluate(int iter, const PolicyTable& policy, const QTable& q,
                    const TabularMdp& model) const;
  const TabularMdp& truth() const { return truth_; }

 private:
  TabularMdp truth_;
};

struct LoopResult {
  LoopState state;
  std::vector<TraceRow> trace;
  bool policy_converged = false;
};

LoopResult run_loop(Algorithm kind, const Dataset& dataset, const LoopConfig& cfg,
                    const Tracer& tracer);

LoopResult run_dromo(const TabularMdp& truth, const Dataset& dataset, const LoopConfig& cfg);

// kind must be kCombo or kMopo.
LoopResult run_baseline(Algorithm kind, const TabularMdp& truth, const Dataset& dataset,
                        const LoopConfig& cfg);

// iter,mean_q_hat,return_true,return_model,beta,alpha,f
void write_trace(std::ostream& out, const std::vector<TraceRow>& trace);
// iter,alpha_t,mean_q,return_on_truth,return_on_model
void write_mopo_trace(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace dromo
