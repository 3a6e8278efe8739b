#include "smf/topics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "smf/errors.hpp"
#include "smf/matrix_io.hpp"

namespace smf {

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  return s.substr(start);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Corpus build_corpus(const std::vector<std::string>& documents, const CorpusOptions& options) {
  if (documents.empty()) throw InvalidInput("corpus has no documents");
  if (!(options.min_doc_fraction >= 0.0 && options.min_doc_fraction <= 1.0)) {
    throw InvalidInput("min_doc_fraction must lie in [0, 1]");
  }

  std::vector<std::map<std::string, double>> bags(documents.size());
  std::map<std::string, std::size_t> doc_freq;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (auto& tok : tokenize(documents[d])) {
      if (has_digit(tok) || options.stop_words.count(tok) > 0) continue;
      bags[d][tok] += 1.0;
    }
    for (const auto& [term, count] : bags[d]) ++doc_freq[term];
  }

  const auto threshold = static_cast<std::size_t>(
      std::max(1.0, std::ceil(options.min_doc_fraction * static_cast<double>(documents.size()) - 1e-9)));
  Corpus corpus;
  std::map<std::string, Index> column;
  for (const auto& [term, df] : doc_freq) {
    if (df >= threshold) {
      column[term] = static_cast<Index>(corpus.vocabulary.size());
      corpus.vocabulary.push_back(term);
    }
  }
  if (corpus.vocabulary.empty()) throw InvalidInput("no terms survive preprocessing");

  std::vector<std::size_t> kept;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const bool any = std::any_of(bags[d].begin(), bags[d].end(),
                                 [&](const auto& kv) { return column.count(kv.first) > 0; });
    if (any) kept.push_back(d);
  }
  corpus.doc_term = DenseMatrix::Zero(static_cast<Index>(kept.size()),
                                      static_cast<Index>(corpus.vocabulary.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    for (const auto& [term, count] : bags[kept[k]]) {
      const auto it = column.find(term);
      if (it != column.end()) corpus.doc_term(static_cast<Index>(k), it->second) = count;
    }
    corpus.doc_ids.push_back(std::to_string(kept[k] + 1));
  }
  return corpus;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::set<std::string, std::less<>> read_stop_words(const std::filesystem::path& path) {
  std::set<std::string, std::less<>> words;
  for (const auto& line : read_lines(path)) {
    for (auto& tok : tokenize(line)) words.insert(std::move(tok));
  }
  return words;
}

void write_vocabulary(const std::filesystem::path& path, const std::vector<std::string>& vocab) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  for (const auto& term : vocab) out << term << '\n';
}

Corpus read_corpus(const std::filesystem::path& doc_term_csv, const std::filesystem::path& vocab) {
  Corpus corpus;
  corpus.doc_term = read_matrix(doc_term_csv);
  for (auto& line : read_lines(vocab)) {
    line = trim(std::move(line));
    if (!line.empty()) corpus.vocabulary.push_back(std::move(line));
  }
  if (static_cast<Index>(corpus.vocabulary.size()) != corpus.doc_term.cols()) {
    throw InvalidInput("vocabulary has " + std::to_string(corpus.vocabulary.size()) +
                       " terms but the doc-term matrix has " +
                       std::to_string(corpus.doc_term.cols()) + " columns");
  }
  for (Index i = 0; i < corpus.doc_term.rows(); ++i) corpus.doc_ids.push_back(std::to_string(i + 1));
  return corpus;
}

TopicModel fit_topics(const Corpus& corpus, const SolverConfig& config, SolveResult* details) {
  if (corpus.doc_term.rows() == 0 || corpus.doc_term.cols() == 0) {
    throw InvalidInput("corpus is empty");
  }
  if (config.orientation != Orientation::kBoth) {
    throw InvalidInput("topic fitting needs orientation 'both'");
  }
  const DenseMatrix X = row_normalize(corpus.doc_term);
  SolveResult result = factorize(X, config);
  TopicModel model{result.factors, corpus.vocabulary};
  if (details != nullptr) *details = std::move(result);
  return model;
}

std::vector<std::vector<TermWeight>> top_terms(const TopicModel& model, Index k) {
  const DenseMatrix& H = model.factors.H;
  if (static_cast<Index>(model.vocabulary.size()) != H.cols()) {
    throw InvalidInput("vocabulary size does not match H");
  }
  if (k < 0 || k > H.cols()) throw InvalidInput("k must lie in 0..M");
  std::vector<std::vector<TermWeight>> out;
  for (Index r = 0; r < H.rows(); ++r) {
    std::vector<Index> order(static_cast<std::size_t>(H.cols()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return H(r, a) > H(r, b); });
    std::vector<TermWeight> row;
    for (Index j = 0; j < k; ++j) {
      const Index col = order[static_cast<std::size_t>(j)];
      row.push_back({model.vocabulary[static_cast<std::size_t>(col)], H(r, col)});
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<Index> topic_histogram(const DenseMatrix& W) {
  std::vector<Index> counts(static_cast<std::size_t>(W.cols()), 0);
  if (W.cols() == 0) return counts;
  for (Index i = 0; i < W.rows(); ++i) {
    Index best = 0;
    for (Index r = 1; r < W.cols(); ++r) {
      if (W(i, r) > W(i, best)) best = r;
    }
    ++counts[static_cast<std::size_t>(best)];
  }
  return counts;
}

std::string format_top_terms_csv(const std::vector<std::vector<TermWeight>>& terms) {
  std::ostringstream out;
  out << "topic,rank,term,probability\n";
  for (std::size_t r = 0; r < terms.size(); ++r) {
    for (std::size_t k = 0; k < terms[r].size(); ++k) {
      out << r + 1 << ',' << k + 1 << ',' << terms[r][k].term << ','
          << format_double(terms[r][k].probability) << '\n';
    }
  }
  return out.str();
}

std::string format_histogram_csv(const std::vector<Index>& counts) {
  std::ostringstream out;
  out << "topic,count\n";
  for (std::size_t r = 0; r < counts.size(); ++r) out << r + 1 << ',' << counts[r] << '\n';
  return out.str();
}

}  // namespace smf
