// Bag-of-words topic pipeline: corpus construction, fitting with both factors
// stochastic, top terms per topic and the most-probable-topic histogram.
#ifndef SMF_TOPICS_HPP
#define SMF_TOPICS_HPP

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "smf/matrix.hpp"
#include "smf/solver.hpp"

namespace smf {

struct Corpus {
  std::vector<std::string> vocabulary;  // size M, sorted
  DenseMatrix doc_term;                 // N x M counts
  std::vector<std::string> doc_ids;
};

struct CorpusOptions {
  std::set<std::string, std::less<>> stop_words;
  // A term is kept if it appears in at least this fraction of documents.
  double min_doc_fraction = 0.005;
};

/// Lowercases ASCII letters and splits on anything that is not a letter,
/// digit or non-ASCII byte.
std::vector<std::string> tokenize(std::string_view text);

/// One document per entry. Stop words and tokens containing digits are
/// dropped, rare terms are pruned, documents left empty are removed. doc_ids
/// are the 1-based positions of the surviving documents.
Corpus build_corpus(const std::vector<std::string>& documents, const CorpusOptions& options = {});

std::vector<std::string> read_lines(const std::filesystem::path& path);
std::set<std::string, std::less<>> read_stop_words(const std::filesystem::path& path);
void write_vocabulary(const std::filesystem::path& path, const std::vector<std::string>& vocab);

/// Doc-term CSV plus vocabulary sidecar (one term per line).
Corpus read_corpus(const std::filesystem::path& doc_term_csv, const std::filesystem::path& vocab);

struct TopicModel {
  FactorPair factors;  // orientation kBoth
  std::vector<std::string> vocabulary;
};

/// Row-normalizes the counts and factorizes with both factors stochastic.
TopicModel fit_topics(const Corpus& corpus, const SolverConfig& config,
                      SolveResult* details = nullptr);

struct TermWeight {
  std::string term;
  double probability = 0.0;
};

/// Per topic, the k most probable terms; ties keep vocabulary order.
std::vector<std::vector<TermWeight>> top_terms(const TopicModel& model, Index k);

/// Documents per most-probable topic; ties go to the lowest topic index.
std::vector<Index> topic_histogram(const DenseMatrix& W);
inline std::vector<Index> topic_histogram(const TopicModel& model) {
  return topic_histogram(model.factors.W);
}

/// CSV: topic,rank,term,probability (topic and rank are 1-based).
std::string format_top_terms_csv(const std::vector<std::vector<TermWeight>>& terms);
/// CSV: topic,count (topic 1-based).
std::string format_histogram_csv(const std::vector<Index>& counts);

}  // namespace smf

#endif  // SMF_TOPICS_HPP
