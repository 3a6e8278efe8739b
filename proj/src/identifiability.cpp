#include "smf/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "smf/errors.hpp"

namespace smf {

std::string_view to_string(SubsetKind k) { return k == SubsetKind::kW ? "W_SUBSET" : "H_SUBSET"; }

namespace {

void check_shapes(const FactorPair& f) {
  if (f.W.cols() != f.H.rows()) throw InvalidInput("W columns must equal H rows");
  require_finite(f.W, "W");
  require_finite(f.H, "H");
}

bool is_subset(const std::vector<Index>& a, const std::vector<Index>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

SupportSets support_sets(const FactorPair& factors, double zero_tol) {
  check_shapes(factors);
  if (!(zero_tol >= 0.0)) throw InvalidInput("zero_tol must be non-negative");
  const Index rank = factors.rank();
  SupportSets s;
  s.zero_tol = zero_tol;
  s.rows.resize(static_cast<std::size_t>(rank));
  s.cols.resize(static_cast<std::size_t>(rank));
  for (Index r = 0; r < rank; ++r) {
    for (Index i = 0; i < factors.W.rows(); ++i) {
      if (std::abs(factors.W(i, r)) > zero_tol) s.rows[static_cast<std::size_t>(r)].push_back(i);
    }
    for (Index j = 0; j < factors.H.cols(); ++j) {
      if (std::abs(factors.H(r, j)) > zero_tol) s.cols[static_cast<std::size_t>(r)].push_back(j);
    }
  }
  return s;
}

UniquenessReport check_uniqueness(const FactorPair& factors, double zero_tol) {
  const SupportSets s = support_sets(factors, zero_tol);
  const auto rank = static_cast<std::size_t>(factors.rank());
  UniquenessReport rep;
  for (std::size_t r1 = 0; r1 < rank; ++r1) {
    for (std::size_t r2 = 0; r2 < rank; ++r2) {
      if (r1 == r2) continue;
      if (is_subset(s.rows[r1], s.rows[r2])) {
        rep.violations.push_back({SubsetKind::kW, static_cast<Index>(r1), static_cast<Index>(r2)});
      }
      if (is_subset(s.cols[r1], s.cols[r2])) {
        rep.violations.push_back({SubsetKind::kH, static_cast<Index>(r1), static_cast<Index>(r2)});
      }
    }
  }
  rep.unique = rep.violations.empty();

  rep.anchor_rows.resize(rank);
  rep.anchor_cols.resize(rank);
  for (Index i = 0; i < factors.W.rows(); ++i) {
    Index count = 0, last = 0;
    for (Index r = 0; r < factors.W.cols(); ++r) {
      if (std::abs(factors.W(i, r)) > zero_tol) {
        ++count;
        last = r;
      }
    }
    if (count == 1) rep.anchor_rows[static_cast<std::size_t>(last)].push_back(i);
  }
  for (Index j = 0; j < factors.H.cols(); ++j) {
    Index count = 0, last = 0;
    for (Index r = 0; r < factors.H.rows(); ++r) {
      if (std::abs(factors.H(r, j)) > zero_tol) {
        ++count;
        last = r;
      }
    }
    if (count == 1) rep.anchor_cols[static_cast<std::size_t>(last)].push_back(j);
  }
  return rep;
}

namespace {

// min over k with den(k) > tol of num(k)/den(k); a numerator at or below tol
// pins the minimum to zero. Ratios 0/0 are skipped.
template <typename Num, typename Den>
double min_ratio(const Num& num, const Den& den, double tol, bool& any) {
  double best = std::numeric_limits<double>::infinity();
  any = false;
  for (Index k = 0; k < den.size(); ++k) {
    if (den(k) <= tol) continue;
    any = true;
    const double ratio = num(k) <= tol ? 0.0 : num(k) / den(k);
    best = std::min(best, ratio);
  }
  return best;
}

}  // namespace

std::vector<AxisBound> natural_bounds(const FactorPair& factors, double zero_tol) {
  check_shapes(factors);
  if (!(zero_tol >= 0.0)) throw InvalidInput("zero_tol must be non-negative");
  const Index rank = factors.rank();
  std::vector<AxisBound> out;
  out.reserve(static_cast<std::size_t>(rank * (rank - 1)));
  for (Index r1 = 0; r1 < rank; ++r1) {
    for (Index r2 = 0; r2 < rank; ++r2) {
      if (r1 == r2) continue;
      bool any_w = false, any_h = false;
      const double lo = min_ratio(factors.W.col(r2), factors.W.col(r1), zero_tol, any_w);
      const double hi =
          min_ratio(factors.H.row(r1).transpose(), factors.H.row(r2).transpose(), zero_tol, any_h);
      if (!any_w || !any_h) {
        std::ostringstream os;
        os << "factor " << (any_w ? r2 : r1) << " has empty support in " << (any_w ? "H" : "W");
        throw DegenerateFactor(os.str());
      }
      out.push_back({r1, r2, lo == 0.0 ? 0.0 : -lo, hi});
    }
  }
  return out;
}

DenseMatrix single_axis_mixing(Index rank, Index r1, Index r2, double a) {
  DenseMatrix A = DenseMatrix::Identity(rank, rank);
  A(r1, r1) -= a;
  A(r1, r2) += a;
  return A;
}

bool is_feasible_mixing(const FactorPair& factors, const DenseMatrix& A, double zero_tol) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) return false;
  const DenseMatrix WA = factors.W * A;
  if ((WA.array() < -zero_tol).any()) return false;
  const DenseMatrix AinvH = lu.solve(Eigen::MatrixXd(factors.H));
  return !(AinvH.array() < -zero_tol).any();
}

std::vector<DenseMatrix> sample_feasible_A(const FactorPair& factors, Index n_samples,
                                           std::uint64_t seed, const SamplerOptions& options) {
  check_shapes(factors);
  if (n_samples < 1) throw InvalidInput("n_samples must be at least 1");
  if (!(options.step > 0.0)) throw InvalidInput("sampler step must be positive");
  const Index rank = factors.rank();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, options.step);

  std::vector<DenseMatrix> kept;
  kept.push_back(DenseMatrix::Identity(rank, rank));
  if (rank < 2) return kept;

  std::vector<std::pair<Index, Index>> axes;
  for (Index r1 = 0; r1 < rank; ++r1) {
    for (Index r2 = 0; r2 < rank; ++r2) {
      if (r1 != r2) axes.emplace_back(r1, r2);
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, axes.size() - 1);
  std::vector<double> axis_pos(axes.size(), 0.0);
  DenseMatrix walker = DenseMatrix::Identity(rank, rank);

  for (Index k = 0; k < n_samples; ++k) {
    DenseMatrix proposal;
    std::size_t axis = 0;
    double pos = 0.0;
    if (k % 2 == 0) {
      axis = pick(rng);
      pos = axis_pos[axis] + gauss(rng);
      proposal = single_axis_mixing(rank, axes[axis].first, axes[axis].second, pos);
    } else {
      proposal = walker;
      for (Index i = 0; i < rank; ++i) {
        double off = 0.0;
        for (Index j = 0; j < rank; ++j) {
          if (i == j) continue;
          proposal(i, j) += gauss(rng);
          off += proposal(i, j);
        }
        proposal(i, i) = 1.0 - off;
      }
    }
    if (!is_feasible_mixing(factors, proposal, options.zero_tol)) continue;
    if (k % 2 == 0) {
      axis_pos[axis] = pos;
    } else {
      walker = proposal;
    }
    kept.push_back(std::move(proposal));
  }
  return kept;
}

double average_consistency_diagnostic(const DenseMatrix& X, const FactorPair& factors) {
  check_shapes(factors);
  require_finite(X, "X");
  if (X.rows() != factors.W.rows() || X.cols() != factors.H.cols()) {
    throw InvalidInput("X shape does not match the factors");
  }
  const Eigen::RowVectorXd x_bar = X.colwise().mean();
  const Eigen::RowVectorXd w_bar = factors.W.colwise().mean();
  return (x_bar - w_bar * factors.H).cwiseAbs().maxCoeff();
}

}  // namespace smf
