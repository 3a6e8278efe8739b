// Uniqueness test on support sets, natural bounds along the coordinate axes
// of the mixing-matrix space, and a random-walk sampler of feasible mixing
// matrices used to cross-check the bounds.
#ifndef SMF_IDENTIFIABILITY_HPP
#define SMF_IDENTIFIABILITY_HPP

#include <cstdint>
#include <string_view>
#include <vector>

#include "smf/matrix.hpp"

namespace smf {

/// rows[r] = {i : |W(i,r)| > zero_tol}, cols[r] = {j : |H(r,j)| > zero_tol}.
struct SupportSets {
  std::vector<std::vector<Index>> rows;
  std::vector<std::vector<Index>> cols;
  double zero_tol = 0.0;
};

SupportSets support_sets(const FactorPair& factors, double zero_tol);

enum class SubsetKind { kW, kH };
std::string_view to_string(SubsetKind k);

/// support(r1) is contained in support(r2) on the W side or the H side.
struct SubsetViolation {
  SubsetKind kind;
  Index r1;
  Index r2;
  friend bool operator==(const SubsetViolation&, const SubsetViolation&) = default;
};

struct UniquenessReport {
  bool unique = true;
  std::vector<SubsetViolation> violations;
  std::vector<std::vector<Index>> anchor_rows;  // W rows whose support is exactly {r}
  std::vector<std::vector<Index>> anchor_cols;  // H columns whose support is exactly {r}
};

UniquenessReport check_uniqueness(const FactorPair& factors, double zero_tol);

/// Identified interval for the single free parameter a of
/// A = I + a (e_r1 e_r2^T - e_r1 e_r1^T).
struct AxisBound {
  Index r1 = 0;
  Index r2 = 0;
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
};

/// One bound per ordered pair (r1, r2), r1 != r2, in row-major pair order.
/// Throws DegenerateFactor if some factor has empty support in W or H.
std::vector<AxisBound> natural_bounds(const FactorPair& factors, double zero_tol);

/// The single-axis mixing matrix described above.
DenseMatrix single_axis_mixing(Index rank, Index r1, Index r2, double a);

/// W A >= -zero_tol and A^-1 H >= -zero_tol, with A invertible.
bool is_feasible_mixing(const FactorPair& factors, const DenseMatrix& A, double zero_tol);

struct SamplerOptions {
  double step = 0.05;
  double zero_tol = 0.0;
};

/// Random-walk search over mixing matrices whose rows sum to one.
/// Even-numbered proposals move a walker confined to one coordinate axis,
/// odd-numbered proposals move a walker over all off-diagonal entries; the
/// diagonal absorbs the row-sum change. Returns the identity followed by
/// every accepted proposal.
std::vector<DenseMatrix> sample_feasible_A(const FactorPair& factors, Index n_samples,
                                           std::uint64_t seed, const SamplerOptions& options = {});

/// ||mean_rows(X) - mean_rows(W) H||_inf.
double average_consistency_diagnostic(const DenseMatrix& X, const FactorPair& factors);

}  // namespace smf

#endif  // SMF_IDENTIFIABILITY_HPP
