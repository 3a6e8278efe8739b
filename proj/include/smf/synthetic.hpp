// Seeded ground-truth instances and permutation-aligned scoring.
#ifndef SMF_SYNTHETIC_HPP
#define SMF_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "smf/image.hpp"
#include "smf/matrix.hpp"
#include "smf/topics.hpp"

namespace smf {

struct GroundTruth {
  DenseMatrix W_true;
  DenseMatrix H_true;
  Orientation orientation = Orientation::kWRowsSumToOne;
  bool anchors_enabled = false;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  FactorPair factors() const { return {W_true, H_true, orientation}; }
};

struct Instance {
  DenseMatrix X;
  GroundTruth truth;
};

/// W rows are uniform on the simplex. H rows are uniform on the simplex when
/// H is stochastic and entries uniform on [0,1] otherwise. With anchors, row r
/// of W is e_r and column r of H is supported only on topic r.
/// Image data is clamped to [0,1]; topic data is clamped at zero and rows are
/// renormalized. noise_sigma = 0 gives X = W H exactly.
Instance generate(Index N, Index M, Index R, bool anchors, double noise_sigma,
                  Orientation orientation, std::uint64_t seed);

struct Alignment {
  std::vector<Index> permutation;  // row r of the aligned estimate is H_est row permutation[r]
  double error = 0.0;              // ||P H_est - H_true||_F / ||H_true||_F
};

Alignment align_and_score(const DenseMatrix& H_est, const DenseMatrix& H_true);

/// Minimum-cost perfect matching on a square cost matrix; result[r] is the
/// column assigned to row r.
std::vector<Index> solve_assignment(const DenseMatrix& cost);

struct FaceSet {
  std::vector<GrayImage> images;  // 19x19
  DenseMatrix W_true;             // count x bases
  DenseMatrix bases;              // bases x 361
};

/// Images drawn as noisy mixtures of smooth base images; the first `bases`
/// images are the pure bases.
FaceSet generate_face_set(Index count, Index bases, double noise_sigma, std::uint64_t seed);

struct BlockCorpusOptions {
  Index documents = 5000;
  Index terms = 360;
  Index topics = 20;
  Index doc_length = 200;
  double anchor_weight = 3.0;  // relative weight of the first term of every block
  double mixing_alpha = 0.3;   // Dirichlet concentration of the document mixtures
  Index anchor_docs_per_topic = 2;
  bool pure_documents = false;  // every document draws from a single topic
};

struct SyntheticCorpus {
  Corpus corpus;
  DenseMatrix W_true;
  DenseMatrix H_true;
  std::vector<Index> anchor_terms;  // one per topic
};

/// Topic r owns a contiguous block of terms; documents are multinomial draws
/// from a Dirichlet mixture of the topics.
SyntheticCorpus generate_block_corpus(const BlockCorpusOptions& options, std::uint64_t seed);

}  // namespace smf

#endif  // SMF_SYNTHETIC_HPP
