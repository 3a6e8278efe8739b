// Concentrated constrained least-squares estimator.
//
// Only H is optimized. W is concentrated out as X H+, and the objective is
//
//   ||X - X H+ H||_F
//     + w_sum  * sum_i |(X H+ 1_R)_i - 1|        (W rows add up, when W is stochastic)
//     + w_neg  * sum max(0, -(X H+))             (W non-negative)
//     + w_neg  * sum max(0, -H) + w_neg * sum max(0, H - 1)
//     + w_sum  * sum_r |(H 1_M)_r - 1|           (H rows add up, when H is stochastic)
//
// The absolute values and hinges make the objective non-smooth. The search
// runs on a Huber-smoothed copy whose width shrinks stage by stage; an iterate
// replaces the incumbent only if the exact objective above does not increase.
#ifndef SMF_SOLVER_HPP
#define SMF_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "smf/matrix.hpp"

namespace smf {

enum class SolverMode {
  kPenalty,    // constraints enter only through the weighted penalties
  kProjected,  // H is projected back onto its feasible set after every step
};

enum class InitScheme {
  kUniform,     // H entries uniform on [0,1], rows normalized when H is stochastic
  kAnchorRows,  // rows of X chosen by successive projection, perturbed per restart
};

std::string_view to_string(SolverMode m);
SolverMode parse_solver_mode(std::string_view text);
std::string_view to_string(InitScheme s);
InitScheme parse_init_scheme(std::string_view text);

struct SolverConfig {
  Index rank = 2;
  Orientation orientation = Orientation::kWRowsSumToOne;
  int max_iter = 5000;
  double conv_tol = 1e-8;  // relative decrease that ends a smoothing stage
  double penalty_sum1 = 100.0;
  double penalty_nonneg = 10.0;
  int restarts = 5;
  std::uint64_t seed = 0;
  SolverMode mode = SolverMode::kPenalty;
  InitScheme init = InitScheme::kUniform;
  // Only consulted when H is stochastic; W constraints always apply to images.
  bool penalize_w = true;
  double smoothing_start = 1e-2;
  double smoothing_end = 1e-7;
  double rank_tol = 1e-10;
  int lbfgs_memory = 10;
  int threads = 1;
};

/// Throws InvalidInput on a bad configuration.
void validate(const SolverConfig& config);

struct SolveResult {
  FactorPair factors;
  double objective = 0.0;
  std::vector<double> objective_trace;  // initial objective, then the incumbent after each accepted step
  int iterations = 0;
  bool converged = false;
  int best_restart = 0;
};

/// Called after every iteration of every restart with the per-restart
/// iteration index and the incumbent objective. Calls are serialized.
using ProgressCallback = std::function<void(int iteration, double objective)>;

/// Evaluates the penalized objective and its smoothed variants for a fixed X.
class PenalizedObjective {
 public:
  PenalizedObjective(const DenseMatrix& X, const SolverConfig& config);

  struct Evaluation {
    bool full_rank = false;
    DenseMatrix H;
    DenseMatrix H_pinv;    // M x R
    DenseMatrix W;                 // X H+
    DenseMatrix reduced_W;         // R H+ for the triangular factor R of X
    DenseMatrix reduced_residual;  // R (I - H+ H)
    double residual_norm = 0.0;    // ||X - W H||_F
  };

  Evaluation evaluate(const DenseMatrix& H) const;
  /// Smoothed objective with Huber width mu; mu = 0 gives the exact objective.
  /// +infinity for a rank-deficient H.
  double value(const Evaluation& e, double mu) const;
  /// Gradient of value(e, mu) with respect to H. Requires e.full_rank.
  DenseMatrix gradient(const Evaluation& e, double mu) const;

  double value(const DenseMatrix& H, double mu) const { return value(evaluate(H), mu); }

 private:
  bool penalize_w_sums() const;
  bool penalize_w_signs() const;

  const DenseMatrix& X_;
  DenseMatrix reduced_X_;
  SolverConfig config_;
};

/// Exact penalized objective. Throws RankDeficient when rank(H) < rows(H).
double objective(const DenseMatrix& X, const DenseMatrix& H, const SolverConfig& config);

/// X H+. Throws RankDeficient when rank(H) < rows(H).
DenseMatrix concentrate_W(const DenseMatrix& X, const DenseMatrix& H, double rank_tol = 1e-10);

/// Row indices of X picked by the successive projection algorithm.
std::vector<Index> successive_projection_rows(const DenseMatrix& X, Index count);

SolveResult factorize(const DenseMatrix& X, const SolverConfig& config,
                      const ProgressCallback& progress = {});

}  // namespace smf

#endif  // SMF_SOLVER_HPP
