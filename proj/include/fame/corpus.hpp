#pragma once

#include "fame/common.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fame::corpus {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> label;
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<std::string> label_set;  // sorted, distinct

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }

  /// Gold labels in document order; unlabeled documents map to "".
  std::vector<std::string> labels() const;
};

/// Builds a corpus from in-memory documents, validating ids and deriving label_set.
Corpus make_corpus(std::vector<Document> documents);

/// Reads a JSONL corpus: one {"id", "text", "label"?} object per line.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus_jsonl(std::string_view contents);

struct PreprocessConfig {
  std::string stopwords = "english-v1";  // "none" disables stopword removal
  bool stem = true;
  std::size_t min_token_length = 2;
};

std::vector<std::string> preprocess_text(std::string_view text, const PreprocessConfig& config);

struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> doc_freq;  // aligned with terms
  std::size_t n_docs_fitted = 0;

  std::size_t size() const { return terms.size(); }
  std::optional<std::size_t> find(const std::string& term) const;

  /// Rebuilds `index` from `terms`.
  static Vocabulary from_terms(std::vector<std::string> terms, std::vector<std::size_t> doc_freq,
                               std::size_t n_docs_fitted);
};

struct PruneConfig {
  std::size_t min_df = 5;
  double max_df_ratio = 0.5;
  std::size_t max_size = 20000;
};

/// Preprocesses every document. Work is split over `threads` workers; output
/// is in corpus order regardless of the worker count.
std::vector<std::vector<std::string>> tokenize_corpus(const Corpus& corpus,
                                                      const PreprocessConfig& config,
                                                      unsigned threads = 1);

Vocabulary build_vocabulary(const Corpus& corpus, const PreprocessConfig& config,
                            const PruneConfig& prune, unsigned threads = 1);
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& tokens,
                            const PruneConfig& prune);

CountMatrix count_vectorize(const Corpus& corpus, const Vocabulary& vocab,
                            const PreprocessConfig& config, unsigned threads = 1);
CountMatrix count_vectorize(const std::vector<std::vector<std::string>>& tokens,
                            const Vocabulary& vocab);

/// Per-document term id sequences, expanded from count rows in ascending term order.
std::vector<std::vector<std::uint32_t>> token_ids_from_counts(const CountMatrix& counts);

}  // namespace fame::corpus
