#include "smf/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "smf/errors.hpp"

namespace smf {

namespace {

class PgmReader {
 public:
  explicit PgmReader(const std::string& bytes) : bytes_(bytes) {}

  // Next whitespace-delimited header token, skipping '#' comments.
  std::string token() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw InvalidInput("truncated PGM header");
    return bytes_.substr(start, pos_ - start);
  }

  long number() {
    const std::string t = token();
    long v = 0;
    for (char c : t) {
      if (!std::isdigit(static_cast<unsigned char>(c))) throw InvalidInput("bad PGM number '" + t + "'");
      v = v * 10 + (c - '0');
      if (v > 1'000'000) throw InvalidInput("PGM value out of range");
    }
    return v;
  }

  // Binary payload starts after exactly one whitespace byte.
  std::size_t payload_start() const { return pos_ + 1; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage parse_pgm(const std::string& bytes) {
  PgmReader in(bytes);
  const std::string magic = in.token();
  if (magic != "P2" && magic != "P5") throw InvalidInput("not a P2/P5 PGM file");
  const long width = in.number();
  const long height = in.number();
  const long maxval = in.number();
  if (width <= 0 || height <= 0) throw InvalidInput("PGM dimensions must be positive");
  if (maxval <= 0 || maxval > 255) throw InvalidInput("PGM maxval must be in 1..255");

  GrayImage img(width, height);
  const auto count = static_cast<std::size_t>(width * height);
  if (magic == "P5") {
    const std::size_t start = in.payload_start();
    if (bytes.size() < start + count) throw InvalidInput("truncated PGM payload");
    for (std::size_t k = 0; k < count; ++k) {
      const auto v = static_cast<unsigned char>(bytes[start + k]);
      if (v > maxval) throw InvalidInput("PGM sample exceeds maxval");
      img.pixels[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      const long v = in.number();
      if (v > maxval) throw InvalidInput("PGM sample exceeds maxval");
      img.pixels[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pgm(ss.str());
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img, bool binary) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << (binary ? "P5" : "P2") << "\n" << img.width << " " << img.height << "\n255\n";
  for (Index r = 0; r < img.height; ++r) {
    for (Index c = 0; c < img.width; ++c) {
      const double v = std::clamp(img.at(r, c), 0.0, 1.0);
      const int level = static_cast<int>(std::lround(v * 255.0));
      if (binary) {
        out.put(static_cast<char>(level));
      } else {
        out << level << (c + 1 == img.width ? '\n' : ' ');
      }
    }
  }
  if (!out) throw InvalidInput("write failed for " + path.string());
}

GrayImage downsample_2x2(const GrayImage& img) {
  if (img.width != 19 || img.height != 19) {
    throw InvalidInput("downsample_2x2 expects a 19x19 image, got " + std::to_string(img.width) +
                       "x" + std::to_string(img.height));
  }
  GrayImage out(9, 9);
  for (Index r = 0; r < 9; ++r) {
    for (Index c = 0; c < 9; ++c) {
      const double sum = img.at(2 * r, 2 * c) + img.at(2 * r, 2 * c + 1) +
                         img.at(2 * r + 1, 2 * c) + img.at(2 * r + 1, 2 * c + 1);
      out.at(r, c) = sum / 4.0;
    }
  }
  return out;
}

DenseMatrix images_to_matrix(const std::vector<GrayImage>& images) {
  if (images.empty()) throw InvalidInput("no images");
  const Index w = images.front().width;
  const Index h = images.front().height;
  DenseMatrix X(static_cast<Index>(images.size()), w * h);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].width != w || images[i].height != h) {
      throw InvalidInput("image " + std::to_string(i) + " has different dimensions");
    }
    X.row(static_cast<Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(images[i].pixels.data(), w * h);
  }
  return X;
}

GrayImage row_to_image(const Eigen::RowVectorXd& row, Index width, Index height) {
  if (row.size() != width * height) throw InvalidInput("row length does not match image size");
  GrayImage img(width, height);
  for (Index k = 0; k < row.size(); ++k) {
    img.pixels[static_cast<std::size_t>(k)] = std::clamp(row(k), 0.0, 1.0);
  }
  return img;
}

GrayImage reconstruct(const Vector& weights, const DenseMatrix& H) {
  if (weights.size() != H.rows()) throw InvalidInput("weights length must equal rows of H");
  if ((weights.array() < -1e-6).any() || std::abs(weights.sum() - 1.0) > 1e-6) {
    throw InvalidInput("weights must lie on the simplex");
  }
  if ((H.array() < -1e-3).any() || (H.array() > 1.0 + 1e-3).any()) {
    throw InvalidInput("base images must lie in [0, 1]");
  }
  const auto side = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(H.cols()))));
  if (side * side != H.cols()) throw InvalidInput("H columns do not form a square image");
  const Eigen::RowVectorXd row = weights.transpose() * H;
  return row_to_image(row, side, side);
}

Retriever::Retriever(FactorPair model) : model_(std::move(model)) {
  require_finite(model_.W, "W");
  require_finite(model_.H, "H");
  if (model_.W.cols() != model_.H.rows()) throw InvalidInput("W columns must equal H rows");
  h_pinv_ = pseudoinverse(model_.H);
}

Vector Retriever::weights_for(const Eigen::RowVectorXd& query) const {
  if (query.size() != model_.H.cols()) throw InvalidInput("query has the wrong number of pixels");
  const Vector w = (query * h_pinv_).transpose();
  return simplex_project(w);
}

RetrievalHit Retriever::find(const Eigen::RowVectorXd& query) const {
  const Vector w = weights_for(query);
  RetrievalHit hit;
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < model_.W.rows(); ++i) {
    const double d = (model_.W.row(i).transpose() - w).squaredNorm();
    if (d < best) {
      best = d;
      hit.index = i;
    }
  }
  hit.distance = std::sqrt(best);
  return hit;
}

RetrievalHit Retriever::find(const GrayImage& query) const {
  return find(Eigen::Map<const Eigen::RowVectorXd>(query.pixels.data(),
                                                   static_cast<Index>(query.pixels.size())));
}

RetrievalHit retrieve(const GrayImage& query, const FactorPair& model) {
  return Retriever(model).find(query);
}

double reconstruction_error(const DenseMatrix& X, const FactorPair& factors) {
  if (X.rows() != factors.W.rows() || X.cols() != factors.H.cols() ||
      factors.W.cols() != factors.H.rows()) {
    throw InvalidInput("X shape does not match the factors");
  }
  const DenseMatrix diff = X - factors.W * factors.H;
  return diff.squaredNorm() / static_cast<double>(X.size());
}

}  // namespace smf
