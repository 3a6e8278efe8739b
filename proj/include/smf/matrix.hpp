// Dense matrix foundation: storage aliases, factor pairs, pseudoinverse,
// norms, row normalization and Euclidean projection onto the simplex.
#ifndef SMF_MATRIX_HPP
#define SMF_MATRIX_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>

namespace smf {

using Index = Eigen::Index;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Which factor carries the adding-up restriction.
enum class Orientation {
  kHRowsSumToOne,  // topic model: each H row is a term distribution
  kWRowsSumToOne,  // images: each W row mixes base images
  kBoth,
};

std::string_view to_string(Orientation o);
/// Accepts "topic"/"h-rows", "image"/"w-rows" and "both". Throws InvalidInput.
Orientation parse_orientation(std::string_view text);

inline bool w_is_stochastic(Orientation o) { return o != Orientation::kHRowsSumToOne; }
inline bool h_is_stochastic(Orientation o) { return o != Orientation::kWRowsSumToOne; }

struct FactorPair {
  DenseMatrix W;  // N x R
  DenseMatrix H;  // R x M
  Orientation orientation = Orientation::kWRowsSumToOne;

  Index rank() const { return H.rows(); }
};

/// Empty string when the pair is non-negative and adds up within eps_feas;
/// otherwise a description of the first violation found.
std::string factor_pair_violation(const FactorPair& f, double eps_feas);

/// Throws InvalidInput if any entry is NaN or infinite.
void require_finite(const DenseMatrix& m, std::string_view what);

struct PseudoinverseResult {
  DenseMatrix inverse;
  Index rank = 0;
};

/// Moore-Penrose inverse by SVD. Singular values at or below
/// rank_tol * sigma_max count as zero; an all-zero input yields the zero
/// matrix of transposed shape with rank 0.
PseudoinverseResult pseudoinverse_with_rank(const DenseMatrix& m, double rank_tol = 1e-10);
DenseMatrix pseudoinverse(const DenseMatrix& m, double rank_tol = 1e-10);

double frobenius_norm(const DenseMatrix& m);

/// Divides every row by its sum. Throws EmptyRow for a zero-sum row and
/// InvalidInput for negative entries.
DenseMatrix row_normalize(const DenseMatrix& counts);

/// Euclidean projection onto {u : u >= 0, sum(u) = 1}. Inputs already on the
/// simplex (to 1e-13) come back unchanged, so the map is idempotent.
Vector simplex_project(const Vector& v);
void simplex_project_rows(DenseMatrix& m);

}  // namespace smf

#endif  // SMF_MATRIX_HPP
