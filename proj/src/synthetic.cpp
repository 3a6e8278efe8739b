#include "smf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "smf/errors.hpp"

namespace smf {

namespace {

using Rng = std::mt19937_64;

// Symmetric Dirichlet draw via normalized gamma variates.
Vector dirichlet(Rng& rng, Index size, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Vector v(size);
  for (;;) {
    for (Index k = 0; k < size; ++k) v(k) = gamma(rng);
    const double total = v.sum();
    if (total > 0.0) return v / total;
  }
}

}  // namespace

Instance generate(Index N, Index M, Index R, bool anchors, double noise_sigma,
                  Orientation orientation, std::uint64_t seed) {
  if (R < 1) throw InvalidInput("rank must be at least 1");
  if (N <= R || M <= R) throw InvalidInput("generate needs N > R and M > R");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw InvalidInput("noise_sigma must be finite and non-negative");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Instance inst;
  GroundTruth& t = inst.truth;
  t.orientation = orientation;
  t.anchors_enabled = anchors;
  t.noise_sigma = noise_sigma;
  t.seed = seed;

  t.W_true.resize(N, R);
  for (Index i = 0; i < N; ++i) t.W_true.row(i) = dirichlet(rng, R, 1.0).transpose();
  if (anchors) {
    for (Index r = 0; r < R; ++r) {
      t.W_true.row(r).setZero();
      t.W_true(r, r) = 1.0;
    }
  }

  t.H_true.resize(R, M);
  if (h_is_stochastic(orientation)) {
    for (Index r = 0; r < R; ++r) t.H_true.row(r) = dirichlet(rng, M, 1.0).transpose();
    if (anchors) {
      for (Index r = 0; r < R; ++r) {
        for (Index q = 0; q < R; ++q) {
          if (q != r) t.H_true(q, r) = 0.0;
        }
      }
      for (Index r = 0; r < R; ++r) t.H_true.row(r) /= t.H_true.row(r).sum();
    }
  } else {
    for (Index r = 0; r < R; ++r) {
      for (Index j = 0; j < M; ++j) t.H_true(r, j) = unit(rng);
    }
    if (anchors) {
      for (Index r = 0; r < R; ++r) {
        t.H_true.col(r).setZero();
        t.H_true(r, r) = 0.5 + 0.5 * unit(rng);
      }
    }
  }

  inst.X = t.W_true * t.H_true;
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    const DenseMatrix clean = inst.X;
    for (Index i = 0; i < N; ++i) {
      for (Index j = 0; j < M; ++j) inst.X(i, j) += noise(rng);
    }
    if (h_is_stochastic(orientation)) {
      inst.X = inst.X.cwiseMax(0.0);
      for (Index i = 0; i < N; ++i) {
        const double s = inst.X.row(i).sum();
        if (s > 0.0) {
          inst.X.row(i) /= s;
        } else {
          inst.X.row(i) = clean.row(i);
        }
      }
    } else {
      inst.X = inst.X.cwiseMax(0.0).cwiseMin(1.0);
    }
  }
  return inst;
}

std::vector<Index> solve_assignment(const DenseMatrix& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw InvalidInput("assignment cost must be square");
  // Potentials-based Hungarian method, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[js];
        if (cur < minv[js]) {
          minv[js] = cur;
          way[js] = j0;
        }
        if (minv[js] < delta) {
          delta = minv[js];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) {
          u[static_cast<std::size_t>(p[js])] += delta;
          v[js] -= delta;
        } else {
          minv[js] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> result(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) result[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return result;
}

Alignment align_and_score(const DenseMatrix& H_est, const DenseMatrix& H_true) {
  if (H_est.rows() != H_true.rows() || H_est.cols() != H_true.cols()) {
    throw InvalidInput("align_and_score needs matrices of the same shape");
  }
  const Index R = H_true.rows();
  const double scale = H_true.norm();
  if (!(scale > 0.0)) throw InvalidInput("H_true must be non-zero");

  // cost(r, q): placing estimate row q at true row r.
  DenseMatrix cost(R, R);
  for (Index r = 0; r < R; ++r) {
    for (Index q = 0; q < R; ++q) cost(r, q) = (H_est.row(q) - H_true.row(r)).squaredNorm();
  }

  Alignment out;
  if (R <= 8) {
    std::vector<Index> perm(static_cast<std::size_t>(R));
    std::iota(perm.begin(), perm.end(), Index{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (Index r = 0; r < R; ++r) total += cost(r, perm[static_cast<std::size_t>(r)]);
      if (total < best) {
        best = total;
        out.permutation = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    out.permutation = solve_assignment(cost);
  }

  double total = 0.0;
  for (Index r = 0; r < R; ++r) {
    total += (H_est.row(out.permutation[static_cast<std::size_t>(r)]) - H_true.row(r)).squaredNorm();
  }
  out.error = std::sqrt(total) / scale;
  return out;
}

FaceSet generate_face_set(Index count, Index bases, double noise_sigma, std::uint64_t seed) {
  constexpr Index kSide = 19;
  constexpr Index kCells = 81;
  if (bases < 1 || bases > kCells) throw InvalidInput("bases must lie in 1..81");
  if (count <= bases) throw InvalidInput("need more images than bases");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("noise_sigma must be non-negative");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  FaceSet set;
  set.bases = DenseMatrix::Zero(bases, kSide * kSide);
  // Each base gets a private 2x2 cell in the downsampled grid, spread evenly.
  std::vector<Index> private_cell(static_cast<std::size_t>(bases));
  for (Index r = 0; r < bases; ++r) private_cell[static_cast<std::size_t>(r)] = (r * kCells) / bases;

  auto in_cell = [](Index row, Index col, Index cell) {
    return row / 2 == cell / 9 && col / 2 == cell % 9 && row < 18 && col < 18;
  };
  for (Index r = 0; r < bases; ++r) {
    const double cy = 2.0 + 14.0 * unit(rng);
    const double cx = 2.0 + 14.0 * unit(rng);
    const double spread = 2.5 + 3.0 * unit(rng);
    const double level = 0.1 + 0.2 * unit(rng);
    for (Index y = 0; y < kSide; ++y) {
      for (Index x = 0; x < kSide; ++x) {
        const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        const double v = level + (0.85 - level) * std::exp(-d2 / (2.0 * spread * spread));
        set.bases(r, y * kSide + x) = std::clamp(v + 0.05 * (unit(rng) - 0.5), 0.0, 1.0);
      }
    }
  }
  for (Index r = 0; r < bases; ++r) {
    for (Index y = 0; y < kSide; ++y) {
      for (Index x = 0; x < kSide; ++x) {
        for (Index q = 0; q < bases; ++q) {
          if (!in_cell(y, x, private_cell[static_cast<std::size_t>(q)])) continue;
          set.bases(r, y * kSide + x) = (q == r) ? 0.6 + 0.4 * unit(rng) : 0.0;
        }
      }
    }
  }

  set.W_true.resize(count, bases);
  for (Index i = 0; i < count; ++i) {
    if (i < bases) {
      set.W_true.row(i).setZero();
      set.W_true(i, i) = 1.0;
    } else {
      set.W_true.row(i) = dirichlet(rng, bases, 1.0).transpose();
    }
  }

  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  const DenseMatrix clean = set.W_true * set.bases;
  for (Index i = 0; i < count; ++i) {
    GrayImage img(kSide, kSide);
    for (Index k = 0; k < kSide * kSide; ++k) {
      const double e = noise_sigma > 0.0 ? noise(rng) : 0.0;
      img.pixels[static_cast<std::size_t>(k)] = std::clamp(clean(i, k) + e, 0.0, 1.0);
    }
    set.images.push_back(std::move(img));
  }
  return set;
}

SyntheticCorpus generate_block_corpus(const BlockCorpusOptions& o, std::uint64_t seed) {
  if (o.topics < 1 || o.terms < o.topics || o.terms % o.topics != 0) {
    throw InvalidInput("terms must be a positive multiple of topics");
  }
  if (o.documents <= o.topics * o.anchor_docs_per_topic || o.doc_length < 1) {
    throw InvalidInput("too few documents or empty documents requested");
  }
  if (!(o.anchor_weight > 0.0) || !(o.mixing_alpha > 0.0)) {
    throw InvalidInput("anchor_weight and mixing_alpha must be positive");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index block = o.terms / o.topics;

  SyntheticCorpus out;
  out.H_true = DenseMatrix::Zero(o.topics, o.terms);
  for (Index r = 0; r < o.topics; ++r) {
    const Index first = r * block;
    out.anchor_terms.push_back(first);
    out.H_true(r, first) = o.anchor_weight;
    for (Index j = 1; j < block; ++j) out.H_true(r, first + j) = 0.5 + unit(rng);
    out.H_true.row(r) /= out.H_true.row(r).sum();
  }

  out.W_true.resize(o.documents, o.topics);
  const Index pure = o.topics * o.anchor_docs_per_topic;
  for (Index i = 0; i < o.documents; ++i) {
    if (i < pure || o.pure_documents) {
      out.W_true.row(i).setZero();
      out.W_true(i, i % o.topics) = 1.0;
    } else {
      out.W_true.row(i) = dirichlet(rng, o.topics, o.mixing_alpha).transpose();
    }
  }

  Corpus& c = out.corpus;
  for (Index j = 0; j < o.terms; ++j) {
    char name[32];
    std::snprintf(name, sizeof name, "term%03ld", static_cast<long>(j));
    c.vocabulary.emplace_back(name);
  }
  c.doc_term = DenseMatrix::Zero(o.documents, o.terms);
  std::poisson_distribution<Index> length(static_cast<double>(o.doc_length));
  for (Index i = 0; i < o.documents; ++i) {
    const Eigen::RowVectorXd p = out.W_true.row(i) * out.H_true;
    std::discrete_distribution<Index> term(p.data(), p.data() + p.size());
    const Index L = std::max<Index>(1, length(rng));
    for (Index k = 0; k < L; ++k) c.doc_term(i, term(rng)) += 1.0;
    c.doc_ids.push_back(std::to_string(i + 1));
  }
  return out;
}

}  // namespace smf
