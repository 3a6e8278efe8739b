#include "smf/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "smf/errors.hpp"

namespace smf {

std::string_view to_string(Orientation o) {
  switch (o) {
    case Orientation::kHRowsSumToOne: return "topic";
    case Orientation::kWRowsSumToOne: return "image";
    case Orientation::kBoth: return "both";
  }
  return "image";
}

Orientation parse_orientation(std::string_view text) {
  if (text == "topic" || text == "h-rows") return Orientation::kHRowsSumToOne;
  if (text == "image" || text == "w-rows") return Orientation::kWRowsSumToOne;
  if (text == "both") return Orientation::kBoth;
  throw InvalidInput("unknown orientation '" + std::string(text) + "'");
}

namespace {

std::string first_negative(const DenseMatrix& m, const char* name, double eps) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) < -eps) {
        std::ostringstream os;
        os << name << "(" << i << "," << j << ") = " << m(i, j) << " is negative";
        return os.str();
      }
    }
  }
  return {};
}

std::string first_bad_row_sum(const DenseMatrix& m, const char* name, double eps) {
  for (Index i = 0; i < m.rows(); ++i) {
    const double s = m.row(i).sum();
    if (std::abs(s - 1.0) > eps) {
      std::ostringstream os;
      os << name << " row " << i << " sums to " << s;
      return os.str();
    }
  }
  return {};
}

}  // namespace

std::string factor_pair_violation(const FactorPair& f, double eps_feas) {
  if (f.W.cols() != f.H.rows()) return "W and H ranks differ";
  if (auto v = first_negative(f.W, "W", eps_feas); !v.empty()) return v;
  if (auto v = first_negative(f.H, "H", eps_feas); !v.empty()) return v;
  if (w_is_stochastic(f.orientation)) {
    if (auto v = first_bad_row_sum(f.W, "W", eps_feas); !v.empty()) return v;
  }
  if (h_is_stochastic(f.orientation)) {
    if (auto v = first_bad_row_sum(f.H, "H", eps_feas); !v.empty()) return v;
  }
  return {};
}

void require_finite(const DenseMatrix& m, std::string_view what) {
  if (!m.allFinite()) throw InvalidInput(std::string(what) + " contains NaN or Inf");
}

PseudoinverseResult pseudoinverse_with_rank(const DenseMatrix& m, double rank_tol) {
  require_finite(m, "pseudoinverse input");
  if (!(rank_tol > 0.0)) throw InvalidInput("rank_tol must be positive");
  PseudoinverseResult out;
  out.inverse = DenseMatrix::Zero(m.cols(), m.rows());
  if (m.size() == 0) return out;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) == 0.0) return out;

  const double cutoff = rank_tol * sigma(0);
  Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;
  const auto u = svd.matrixU().leftCols(rank);
  const auto v = svd.matrixV().leftCols(rank);
  const Vector inv_sigma = sigma.head(rank).cwiseInverse();
  out.inverse = v * inv_sigma.asDiagonal() * u.transpose();
  out.rank = rank;
  return out;
}

DenseMatrix pseudoinverse(const DenseMatrix& m, double rank_tol) {
  return pseudoinverse_with_rank(m, rank_tol).inverse;
}

double frobenius_norm(const DenseMatrix& m) {
  require_finite(m, "frobenius_norm input");
  return m.norm();
}

DenseMatrix row_normalize(const DenseMatrix& counts) {
  require_finite(counts, "counts");
  if ((counts.array() < 0.0).any()) throw InvalidInput("counts must be non-negative");
  DenseMatrix out = counts;
  for (Index i = 0; i < out.rows(); ++i) {
    const double s = out.row(i).sum();
    if (s <= 0.0) throw EmptyRow(static_cast<std::size_t>(i));
    out.row(i) /= s;
  }
  return out;
}

namespace {

constexpr double kOnSimplexTol = 1e-13;

bool on_simplex(const Vector& v) {
  return v.size() > 0 && (v.array() >= 0.0).all() && std::abs(v.sum() - 1.0) <= kOnSimplexTol;
}

}  // namespace

Vector simplex_project(const Vector& v) {
  if (!v.allFinite()) throw InvalidInput("simplex_project input contains NaN or Inf");
  if (v.size() == 0) throw InvalidInput("simplex_project of an empty vector");
  if (on_simplex(v)) return v;

  // Sort-based threshold: find the largest k with u_k - (sum_{<=k} u - 1)/k > 0.
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double t = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) tau = t;
  }
  Vector u = (v.array() - tau).cwiseMax(0.0);

  // Fold the round-off of the sum into the largest coordinate.
  Index top = 0;
  u.maxCoeff(&top);
  u(top) += 1.0 - u.sum();
  if (u(top) < 0.0) u(top) = 0.0;
  return u;
}

void simplex_project_rows(DenseMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    m.row(i) = simplex_project(m.row(i).transpose()).transpose();
  }
}

}  // namespace smf
