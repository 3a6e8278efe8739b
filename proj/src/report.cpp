#include "smf/report.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smf {

namespace {

// Finite doubles only; JSON has no representation for inf or NaN.
nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

WidthSummary summarize_widths(const std::vector<AxisBound>& bounds) {
  WidthSummary s;
  for (const auto& b : bounds) {
    const double w = b.width();
    s.max_width = std::max(s.max_width, w);
    std::size_t bucket = kWidthBucketEdges.size() - 2;
    for (std::size_t k = 0; k + 2 < kWidthBucketEdges.size(); ++k) {
      if (w < kWidthBucketEdges[k + 1]) {
        bucket = k;
        break;
      }
    }
    ++s.histogram[bucket];
  }
  return s;
}

OracleSummary run_bounds_oracle(const FactorPair& factors, const std::vector<AxisBound>& bounds,
                                Index n_samples, std::uint64_t seed, const SamplerOptions& options) {
  OracleSummary out;
  out.proposals = n_samples;
  out.step = options.step;
  const Index R = factors.rank();
  const auto samples = sample_feasible_A(factors, n_samples, seed, options);
  out.retained = static_cast<Index>(samples.size());
  const DenseMatrix I = DenseMatrix::Identity(R, R);
  for (const auto& A : samples) {
    out.max_row_sum_error =
        std::max(out.max_row_sum_error, (A.rowwise().sum().array() - 1.0).abs().maxCoeff());
    out.max_identity_deviation = std::max(out.max_identity_deviation, (A - I).cwiseAbs().maxCoeff());

    // Single-axis: exactly one non-zero off-diagonal entry.
    Index nonzero = 0, r1 = 0, r2 = 0;
    for (Index i = 0; i < R; ++i) {
      for (Index j = 0; j < R; ++j) {
        if (i != j && A(i, j) != 0.0) {
          ++nonzero;
          r1 = i;
          r2 = j;
        }
      }
    }
    if (nonzero != 1) continue;
    ++out.single_axis_retained;
    const double a = A(r1, r2);
    for (const auto& b : bounds) {
      if (b.r1 == r1 && b.r2 == r2 &&
          (a < b.lower - options.step || a > b.upper + options.step)) {
        ++out.outside_bounds;
      }
    }
  }
  return out;
}

nlohmann::ordered_json identifiability_json(const UniquenessReport& report,
                                            const std::vector<AxisBound>& bounds) {
  nlohmann::ordered_json j;
  j["unique"] = report.unique;
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : report.violations) {
    j["violations"].push_back({{"kind", std::string(to_string(v.kind))}, {"r1", v.r1}, {"r2", v.r2}});
  }
  nlohmann::ordered_json rows = nlohmann::ordered_json::object();
  nlohmann::ordered_json cols = nlohmann::ordered_json::object();
  for (std::size_t r = 0; r < report.anchor_rows.size(); ++r) {
    rows[std::to_string(r)] = report.anchor_rows[r];
    cols[std::to_string(r)] = report.anchor_cols[r];
  }
  j["anchors"] = rows;
  j["anchor_columns"] = cols;
  j["bounds"] = nlohmann::ordered_json::array();
  for (const auto& b : bounds) {
    j["bounds"].push_back({{"r1", b.r1},
                           {"r2", b.r2},
                           {"lower", number(b.lower)},
                           {"upper", number(b.upper)},
                           {"width", number(b.width())}});
  }
  const WidthSummary s = summarize_widths(bounds);
  j["summary"] = {{"max_width", number(s.max_width)},
                  {"widths_histogram",
                   {{"edges", kWidthBucketEdges}, {"counts", s.histogram}}}};
  return j;
}

nlohmann::ordered_json oracle_json(const OracleSummary& s) {
  return {{"proposals", s.proposals},
          {"retained", s.retained},
          {"single_axis_retained", s.single_axis_retained},
          {"outside_bounds", s.outside_bounds},
          {"max_row_sum_error", s.max_row_sum_error},
          {"max_identity_deviation", s.max_identity_deviation},
          {"step", s.step}};
}

nlohmann::ordered_json config_json(const SolverConfig& c) {
  return {{"rank", c.rank},
          {"orientation", std::string(to_string(c.orientation))},
          {"mode", std::string(to_string(c.mode))},
          {"init", std::string(to_string(c.init))},
          {"max_iter", c.max_iter},
          {"conv_tol", c.conv_tol},
          {"penalty_sum1", c.penalty_sum1},
          {"penalty_nonneg", c.penalty_nonneg},
          {"restarts", c.restarts},
          {"seed", c.seed},
          {"penalize_w", c.penalize_w},
          {"smoothing_start", c.smoothing_start},
          {"smoothing_end", c.smoothing_end},
          {"rank_tol", c.rank_tol},
          {"lbfgs_memory", c.lbfgs_memory}};
}

nlohmann::ordered_json solve_result_json(const SolveResult& r, const SolverConfig& c) {
  nlohmann::ordered_json j;
  j["objective"] = number(r.objective);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["best_restart"] = r.best_restart;
  j["rank"] = r.factors.rank();
  j["orientation"] = std::string(to_string(r.factors.orientation));
  j["feasibility_violation"] = factor_pair_violation(
      r.factors, c.mode == SolverMode::kProjected ? 1e-9 : 1e-3);
  j["objective_trace"] = nlohmann::ordered_json::array();
  for (double v : r.objective_trace) j["objective_trace"].push_back(number(v));
  return j;
}

}  // namespace smf
