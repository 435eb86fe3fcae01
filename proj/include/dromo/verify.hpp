#pragma once

// Seeded property sweeps over the provable statements: each suite draws
// instances, runs the production code and compares against an independent
// oracle or a closed-form inequality.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dromo {

enum class CheckStatus { kPass, kFail, kReject, kInfo };

struct CheckRecord {
  std::string name;  // suite/instance/check
  double lhs = 0.0;
  double rhs = 0.0;
  CheckStatus status = CheckStatus::kPass;
};

struct SuiteReport {
  std::vector<CheckRecord> checks;

  int count(CheckStatus status) const;
  // Any kFail record.
  bool hard_failure() const;
  // Records whose name starts with prefix.
  SuiteReport filter(const std::string& prefix) const;
};

// duchi, lemma1, thm2, thm4, thm5, ntk, calibration, bound_c; "all" runs each
// in this order.
const std::vector<std::string>& suite_names();
bool is_suite_name(const std::string& name);
int default_instances(const std::string& suite);

// n_instances counts accepted instances; generators retry (recording
// rejections) up to 20x that many draws. Throws std::invalid_argument for an
// unknown suite.
SuiteReport run_suite(const std::string& suite, std::optional<int> n_instances, std::uint64_t seed);

// CSV: check_name,lhs,rhs,pass with pass in {pass, fail, reject, info}.
void write_report(std::ostream& out, const SuiteReport& report);

// COMBO/DROMO(alpha = 0) trace identity and the COMBO(beta = 0) fitted
// evaluation reduction on a fully covered random dataset.
SuiteReport check_reductions(std::uint64_t seed);

// Dual temperature iteration on the two-state tunable-entropy chain: with an
// active budget the fixed point meets E[-log T_hat] = delta within 1e-3;
// with a slack budget alpha reaches 0.
SuiteReport check_mopo_temperature();

}  // namespace dromo
