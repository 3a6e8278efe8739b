// JSON renderings of identifiability and solver results.
#ifndef SMF_REPORT_HPP
#define SMF_REPORT_HPP

#include <array>
#include <vector>

#include <json.hpp>

#include "smf/identifiability.hpp"
#include "smf/solver.hpp"

namespace smf {

inline constexpr std::array<double, 5> kWidthBucketEdges{0.0, 0.001, 0.01, 0.02, 1.0};

struct WidthSummary {
  double max_width = 0.0;
  std::array<Index, 4> histogram{};  // widths >= the last inner edge land in the final bucket
};

WidthSummary summarize_widths(const std::vector<AxisBound>& bounds);

/// Cross-check of the bounds against the feasible-A sampler.
struct OracleSummary {
  Index proposals = 0;
  Index retained = 0;
  Index single_axis_retained = 0;
  Index outside_bounds = 0;  // single-axis samples beyond their interval by more than the step
  double max_row_sum_error = 0.0;
  double max_identity_deviation = 0.0;
  double step = 0.0;
};

OracleSummary run_bounds_oracle(const FactorPair& factors, const std::vector<AxisBound>& bounds,
                                Index n_samples, std::uint64_t seed, const SamplerOptions& options);

nlohmann::ordered_json identifiability_json(const UniquenessReport& report,
                                            const std::vector<AxisBound>& bounds);
nlohmann::ordered_json oracle_json(const OracleSummary& summary);
nlohmann::ordered_json solve_result_json(const SolveResult& result, const SolverConfig& config);
nlohmann::ordered_json config_json(const SolverConfig& config);

}  // namespace smf

#endif  // SMF_REPORT_HPP
