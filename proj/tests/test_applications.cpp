#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "smf/errors.hpp"
#include "smf/image.hpp"
#include "smf/synthetic.hpp"
#include "smf/topics.hpp"

using namespace smf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("smf_app_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Downsample, ConstantImage) {
  const GrayImage out = downsample_2x2(GrayImage(19, 19, 0.37));
  EXPECT_EQ(out.width, 9);
  EXPECT_EQ(out.height, 9);
  for (double v : out.pixels) EXPECT_DOUBLE_EQ(v, 0.37);
}

TEST(Downsample, CheckerboardAveragesToHalf) {
  GrayImage img(19, 19);
  for (Index r = 0; r < 19; ++r) {
    for (Index c = 0; c < 19; ++c) img.at(r, c) = (r + c) % 2;
  }
  for (double v : downsample_2x2(img).pixels) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Downsample, LastRowAndColumnDropped) {
  GrayImage img(19, 19);
  for (Index c = 0; c < 19; ++c) img.at(18, c) = 1.0;
  for (Index r = 0; r < 19; ++r) img.at(r, 18) = 1.0;
  for (double v : downsample_2x2(img).pixels) EXPECT_EQ(v, 0.0);
}

TEST(Downsample, WrongSizeThrows) { EXPECT_THROW(downsample_2x2(GrayImage(18, 19)), InvalidInput); }

TEST(Downsample, PreservesRange) {
  const FaceSet set = generate_face_set(20, 3, 0.05, 1);
  for (const auto& img : set.images) {
    const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    for (double v : downsample_2x2(img).pixels) {
      EXPECT_GE(v, *lo);
      EXPECT_LE(v, *hi);
    }
  }
}

TEST(Pgm, RoundTripBothEncodings) {
  const fs::path dir = scratch("pgm");
  GrayImage img(5, 3);
  for (std::size_t k = 0; k < img.pixels.size(); ++k) img.pixels[k] = static_cast<double>(k * 17) / 255.0;
  for (bool binary : {true, false}) {
    const fs::path p = dir / (binary ? "b.pgm" : "a.pgm");
    write_pgm(p, img, binary);
    const GrayImage back = read_pgm(p);
    ASSERT_EQ(back.width, 5);
    ASSERT_EQ(back.height, 3);
    for (std::size_t k = 0; k < img.pixels.size(); ++k) EXPECT_DOUBLE_EQ(back.pixels[k], img.pixels[k]);
  }
  fs::remove_all(dir);
}

TEST(Pgm, ParsesCommentsAndRejectsBadHeaders) {
  const GrayImage img = parse_pgm("P2\n# comment\n2 1\n255\n0 255\n");
  EXPECT_EQ(img.pixels, (std::vector<double>{0.0, 1.0}));
  EXPECT_THROW(parse_pgm("P3\n1 1\n255\n0 0 0\n"), InvalidInput);
  EXPECT_THROW(parse_pgm("P2\n1 1\n65535\n0\n"), InvalidInput);
  EXPECT_THROW(parse_pgm(std::string("P5\n2 2\n255\n") + "ab"), InvalidInput);
}

TEST(Reconstruct, BaseImagesAndMean) {
  const Instance inst = generate(20, 81, 3, true, 0.0, Orientation::kWRowsSumToOne, 2);
  const DenseMatrix& H = inst.truth.H_true;
  const GrayImage base = reconstruct(Vector::Unit(3, 1), H);
  EXPECT_EQ(base.width, 9);
  for (Index k = 0; k < 81; ++k) EXPECT_DOUBLE_EQ(base.pixels[static_cast<std::size_t>(k)], H(1, k));
  const GrayImage mean = reconstruct(Vector::Constant(3, 1.0 / 3.0), H);
  const Eigen::RowVectorXd expected = H.colwise().mean();
  for (Index k = 0; k < 81; ++k) EXPECT_NEAR(mean.pixels[static_cast<std::size_t>(k)], expected(k), 1e-15);
  for (Index i = 0; i < 20; ++i) {
    const GrayImage row = reconstruct(inst.truth.W_true.row(i).transpose(), H);
    for (Index k = 0; k < 81; ++k) EXPECT_NEAR(row.pixels[static_cast<std::size_t>(k)], inst.X(i, k), 1e-12);
  }
  EXPECT_THROW(reconstruct(Vector::Constant(3, 0.5), H), InvalidInput);
  EXPECT_THROW(reconstruct(Vector::Unit(2, 0), H), InvalidInput);
}

TEST(Retrieve, IdentityOnExactTrainingSet) {
  const Instance inst = generate(60, 81, 5, true, 0.0, Orientation::kWRowsSumToOne, 3);
  const FactorPair model = inst.truth.factors();
  const Retriever retriever(model);
  for (Index i = 0; i < 60; ++i) {
    const RetrievalHit hit = retriever.find(Eigen::RowVectorXd(inst.X.row(i)));
    EXPECT_EQ(hit.index, i);
    EXPECT_LT(hit.distance, 1e-8);
    const GrayImage rec = reconstruct(model.W.row(i).transpose(), model.H);
    EXPECT_EQ(retrieve(rec, model).index, i);
  }
}

TEST(Retrieve, TiesGoToLowestIndex) {
  const Instance inst = generate(10, 81, 3, true, 0.0, Orientation::kWRowsSumToOne, 4);
  FactorPair model = inst.truth.factors();
  model.W.row(7) = model.W.row(4);
  EXPECT_EQ(Retriever(model).find(Eigen::RowVectorXd(inst.X.row(4))).index, 4);
  EXPECT_EQ(Retriever(model).find(Eigen::RowVectorXd(model.W.row(7) * model.H)).index, 4);
}

TEST(ReconstructionError, Examples) {
  const Instance inst = generate(10, 10, 2, false, 0.0, Orientation::kWRowsSumToOne, 1);
  EXPECT_LT(reconstruction_error(inst.X, inst.truth.factors()), 1e-30);
  DenseMatrix X = inst.X;
  X(3, 4) += 0.1;
  EXPECT_NEAR(reconstruction_error(X, inst.truth.factors()), 1e-4, 1e-15);
}

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("Hello, World! it's 2024"),
            (std::vector<std::string>{"hello", "world", "it", "s", "2024"}));
  EXPECT_EQ(tokenize("caf\xc3\xa9 Bar"), (std::vector<std::string>{"caf\xc3\xa9", "bar"}));
}

TEST(BuildCorpus, StopWordsNumeralsAndPruning) {
  CorpusOptions opt;
  opt.stop_words = {"the", "a"};
  opt.min_doc_fraction = 0.5;
  const std::vector<std::string> docs = {"The cat sat on a mat 42", "the cat ran",
                                         "dog x9 dog", "THE THE"};
  const Corpus c = build_corpus(docs, opt);
  EXPECT_EQ(c.vocabulary, (std::vector<std::string>{"cat"}));
  EXPECT_EQ(c.doc_ids, (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(c.doc_term.rows(), 2);
  EXPECT_EQ(c.doc_term(0, 0), 1.0);
}

TEST(BuildCorpus, DefaultThresholdKeepsEverythingInSmallCorpora) {
  const Corpus c = build_corpus({"alpha beta beta", "gamma"});
  EXPECT_EQ(c.vocabulary, (std::vector<std::string>{"alpha", "beta", "gamma"}));
  EXPECT_EQ(c.doc_term(0, 1), 2.0);
  EXPECT_THROW(build_corpus({}), InvalidInput);
  EXPECT_THROW(build_corpus({"123 456"}), InvalidInput);
}

TEST(ReadCorpus, VocabularyMustMatch) {
  const fs::path dir = scratch("corpus");
  std::ofstream(dir / "dt.csv") << "1,2\n0,3\n";
  std::ofstream(dir / "v.txt") << "a\nb\n";
  std::ofstream(dir / "bad.txt") << "a\n";
  const Corpus c = read_corpus(dir / "dt.csv", dir / "v.txt");
  EXPECT_EQ(c.vocabulary.size(), 2u);
  EXPECT_THROW(read_corpus(dir / "dt.csv", dir / "bad.txt"), InvalidInput);
  fs::remove_all(dir);
}

TEST(TopTerms, OrderAndTies) {
  TopicModel m;
  m.vocabulary = {"term1", "term2", "term3"};
  m.factors.H.resize(2, 3);
  m.factors.H << 0.5, 0.3, 0.2, 1.0 / 3, 1.0 / 3, 1.0 / 3;
  const auto top = top_terms(m, 2);
  EXPECT_EQ(top[0][0].term, "term1");
  EXPECT_EQ(top[0][0].probability, 0.5);
  EXPECT_EQ(top[0][1].term, "term2");
  EXPECT_EQ(top[1][0].term, "term1");
  EXPECT_EQ(top[1][1].term, "term2");
  const auto all = top_terms(m, 3);
  double s = 0.0;
  for (const auto& t : all[0]) s += t.probability;
  EXPECT_NEAR(s, 1.0, 1e-9);
  EXPECT_THROW(top_terms(m, 4), InvalidInput);
}

TEST(TopicHistogram, Examples) {
  EXPECT_EQ(topic_histogram(DenseMatrix::Identity(3, 3)), (std::vector<Index>{1, 1, 1}));
  EXPECT_EQ(topic_histogram(DenseMatrix::Constant(4, 3, 1.0 / 3)), (std::vector<Index>{4, 0, 0}));
}

TEST(TopicHistogram, PermutesWithLabels) {
  const Instance inst = generate(200, 20, 4, false, 0.0, Orientation::kBoth, 8);
  const DenseMatrix& W = inst.truth.W_true;
  const std::vector<Index> perm = {2, 0, 3, 1};
  DenseMatrix Wp(W.rows(), 4);
  for (Index r = 0; r < 4; ++r) Wp.col(r) = W.col(perm[static_cast<std::size_t>(r)]);
  const auto a = topic_histogram(W);
  const auto b = topic_histogram(Wp);
  for (Index r = 0; r < 4; ++r) EXPECT_EQ(b[static_cast<std::size_t>(r)], a[static_cast<std::size_t>(perm[static_cast<std::size_t>(r)])]);
  EXPECT_EQ(std::accumulate(a.begin(), a.end(), Index{0}), 200);
}

TEST(FitTopics, DisjointBlocksAreRecovered) {
  // Noiseless mixtures of three block topics; the first three documents are pure.
  BlockCorpusOptions opt;
  opt.documents = 10;
  opt.terms = 30;
  opt.topics = 3;
  const SyntheticCorpus sc = generate_block_corpus(opt, 4);
  std::mt19937_64 rng(9);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  DenseMatrix mix(120, 3);
  for (Index i = 0; i < mix.rows(); ++i) {
    for (Index r = 0; r < 3; ++r) mix(i, r) = i < 3 ? (i == r ? 1.0 : 0.0) : gamma(rng);
    mix.row(i) /= mix.row(i).sum();
  }
  Corpus corpus;
  corpus.vocabulary = sc.corpus.vocabulary;
  corpus.doc_term = 200.0 * mix * sc.H_true;
  for (Index i = 0; i < mix.rows(); ++i) corpus.doc_ids.push_back(std::to_string(i + 1));
  SolverConfig c;
  c.rank = 3;
  c.orientation = Orientation::kBoth;
  c.init = InitScheme::kAnchorRows;
  const TopicModel m = fit_topics(corpus, c);
  EXPECT_LT((m.factors.H.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-3);
  EXPECT_LT((m.factors.W.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-3);
  const Alignment al = align_and_score(m.factors.H, sc.H_true);
  for (Index r = 0; r < 3; ++r) {
    const Index est = al.permutation[static_cast<std::size_t>(r)];
    double outside = 0.0;
    for (Index j = 0; j < 30; ++j) {
      if (j / 10 != r) outside += std::max(0.0, m.factors.H(est, j));
    }
    EXPECT_LT(outside, 1e-3) << "topic " << r;
  }
}

TEST(FitTopics, SingleTopicIsCorpusDistribution) {
  Corpus c;
  c.vocabulary = {"a", "b", "c"};
  c.doc_term.resize(3, 3);
  c.doc_term << 1, 1, 2, 0, 3, 1, 5, 0, 0;
  SolverConfig cfg;
  cfg.rank = 1;
  cfg.orientation = Orientation::kBoth;
  const TopicModel m = fit_topics(c, cfg);
  const Eigen::RowVectorXd expected = row_normalize(c.doc_term).colwise().mean();
  EXPECT_LT((m.factors.H.row(0) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE((m.factors.W.array() == 1.0).all());
  cfg.orientation = Orientation::kHRowsSumToOne;
  EXPECT_THROW(fit_topics(c, cfg), InvalidInput);
}

TEST(ReportCsv, Formats) {
  const std::vector<std::vector<TermWeight>> t = {{{"x", 0.5}, {"y", 0.25}}};
  EXPECT_EQ(format_top_terms_csv(t), "topic,rank,term,probability\n1,1,x,0.5\n1,2,y,0.25\n");
  EXPECT_EQ(format_histogram_csv({3, 0}), "topic,count\n1,3\n2,0\n");
}
