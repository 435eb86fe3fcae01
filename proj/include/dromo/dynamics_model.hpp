#pragma once

#include <iosfwd>
#include <optional>

#include <Eigen/Dense>

#include "dromo/mdp.hpp"
#include "dromo/offline_data.hpp"

namespace dromo {

struct LearnedModel {
  TabularMdp mdp_hat;
  CountTable source_counts;
};

LearnedModel fit_model(const Dataset& dataset, double gamma, double smoothing,
                       const std::optional<Eigen::VectorXd>& initial_dist = std::nullopt);

// Per-(s, a) total variation between next-state rows of two MDPs.
Eigen::MatrixXd tv_distance(const TabularMdp& a, const TabularMdp& b);
Eigen::MatrixXd tv_distance(const LearnedModel& model, const TabularMdp& truth);

// Shannon entropy (nats) of each next-state row.
Eigen::MatrixXd row_entropy(const TabularMdp& mdp);
Eigen::MatrixXd uncertainty(const LearnedModel& model);

inline constexpr int kCalibrationBins = 20;

// l1 calibration error of model's next-state probabilities against truth with
// (s, a) drawn from visit. Predictions are grouped per next state into uniform
// bins; each bin contributes |sum_x w(x) (T(y|x) - T_model(y|x))|.
double l1_calibration_error(const TabularMdp& model, const TabularMdp& truth,
                            const OccupancyVector& visit, int bins = kCalibrationBins);
double l1_calibration_error(const LearnedModel& model, const TabularMdp& truth,
                            const OccupancyVector& visit, int bins = kCalibrationBins);

struct CalibrationReport {
  double gap = 0.0;          // |J_model(pi) - J_truth(pi)|
  double calibration = 0.0;  // l1 calibration error under the truth occupancy of pi
  double slack = 0.0;        // binning allowance
  double bound = 0.0;        // gamma R_max / (1 - gamma) * calibration + slack
  bool pass = false;
};

// The model is evaluated with the truth's rewards and initial distribution so
// that the gap isolates dynamics error.
CalibrationReport calibration_value_gap_check(const TabularMdp& model, const TabularMdp& truth,
                                              const PolicyTable& policy,
                                              const BoundConstants& constants,
                                              int bins = kCalibrationBins);
CalibrationReport calibration_value_gap_check(const LearnedModel& model, const TabularMdp& truth,
                                              const PolicyTable& policy,
                                              const BoundConstants& constants,
                                              int bins = kCalibrationBins);

// CSV with columns s,a,tv,entropy,count.
void write_model_diagnostics(std::ostream& out, const LearnedModel& model, const TabularMdp& truth);

}  // namespace dromo
