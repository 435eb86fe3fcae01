#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace dromo::cli {

enum ExitCode { kOk = 0, kUsage = 1, kAssertion = 2, kIo = 3 };

// Writes <out>/mdp.txt and <out>/dataset.txt, prints the coverage summary.
int cmd_gen(const ExperimentConfig& cfg, std::ostream& log);

// Writes <out>/trace.csv and <out>/report.txt.
int cmd_run(const ExperimentConfig& cfg, std::ostream& log);

// Prints the CSV report to `report` (and to out_file when given).
int cmd_verify(const std::string& suite, std::optional<int> instances, std::uint64_t seed,
               const std::optional<std::string>& out_file, std::ostream& report);

// Long-format merge of trace CSVs: seed,iter,metric,value.
int cmd_plotdata(const std::vector<std::string>& traces, const std::optional<std::string>& out_file,
                 std::ostream& out);

// Reads one trace; the seed comes from a leading `# seed=N` line, else
// fallback_seed. Throws IoError on schema problems.
struct TraceTable {
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};
TraceTable read_trace(std::istream& in, const std::string& source, std::uint64_t fallback_seed);

}  // namespace dromo::cli
