// Gray-scale image pipeline: PGM I/O, 2x2 block downsampling, reconstruction
// from base images, and retrieval in the reduced weight space.
#ifndef SMF_IMAGE_HPP
#define SMF_IMAGE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "smf/matrix.hpp"

namespace smf {

struct GrayImage {
  Index width = 0;
  Index height = 0;
  std::vector<double> pixels;  // row-major intensities in [0, 1]

  GrayImage() = default;
  GrayImage(Index w, Index h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w * h), fill) {}

  double& at(Index row, Index col) { return pixels[static_cast<std::size_t>(row * width + col)]; }
  double at(Index row, Index col) const {
    return pixels[static_cast<std::size_t>(row * width + col)];
  }
};

/// Reads P2 (ASCII) or P5 (binary) PGM with maxval up to 255.
GrayImage read_pgm(const std::filesystem::path& path);
GrayImage parse_pgm(const std::string& bytes);
/// Writes maxval 255, rounding intensity * 255.
void write_pgm(const std::filesystem::path& path, const GrayImage& img, bool binary = true);

/// 19x19 -> 9x9 by averaging 2x2 blocks; the last row and column are dropped.
GrayImage downsample_2x2(const GrayImage& img);

/// Stacks images as rows of an N x (width*height) matrix.
DenseMatrix images_to_matrix(const std::vector<GrayImage>& images);
GrayImage row_to_image(const Eigen::RowVectorXd& row, Index width, Index height);

/// weights^T H reshaped to a square image and clamped to [0, 1].
GrayImage reconstruct(const Vector& weights, const DenseMatrix& H);

struct RetrievalHit {
  Index index = 0;
  double distance = 0.0;
};

/// Nearest stored image in weight space. The query is mapped to
/// simplex_project(query H+).
class Retriever {
 public:
  explicit Retriever(FactorPair model);
  RetrievalHit find(const GrayImage& query) const;
  RetrievalHit find(const Eigen::RowVectorXd& query) const;
  Vector weights_for(const Eigen::RowVectorXd& query) const;

 private:
  FactorPair model_;
  DenseMatrix h_pinv_;
};

RetrievalHit retrieve(const GrayImage& query, const FactorPair& model);

/// Mean over all cells of (X - W H)^2.
double reconstruction_error(const DenseMatrix& X, const FactorPair& factors);

}  // namespace smf

#endif  // SMF_IMAGE_HPP
