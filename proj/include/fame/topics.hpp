#pragma once

#include "fame/common.hpp"
#include "fame/corpus.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fame::topics {

struct ScoredTerm {
  std::string term;
  double score = 0.0;
};

struct ClusterTopics {
  std::size_t n_terms = 0;
  std::vector<std::vector<ScoredTerm>> clusters;  // one list per cluster id
};

/// Class-based tf-idf: each cluster is pooled into one pseudo-document and
/// scored with tf(t, c) * ln(1 + A / f_t), where tf is normalized by the
/// cluster's token total, f_t is the corpus count of t and A the mean cluster
/// token total. Empty clusters get empty lists.
ClusterTopics cluster_top_terms(const CountMatrix& counts,
                                const std::vector<std::uint32_t>& assignments,
                                const corpus::Vocabulary& vocab, std::size_t n,
                                std::size_t n_clusters = 0);

}  // namespace fame::topics
