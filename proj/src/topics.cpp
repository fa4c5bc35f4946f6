#include "fame/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fame::topics {

ClusterTopics cluster_top_terms(const CountMatrix& counts,
                                const std::vector<std::uint32_t>& assignments,
                                const corpus::Vocabulary& vocab, std::size_t n,
                                std::size_t n_clusters) {
  if (assignments.size() != static_cast<std::size_t>(counts.rows()))
    throw Error("topics: " + std::to_string(assignments.size()) + " assignments for " +
                std::to_string(counts.rows()) + " documents");
  if (n < 1) throw Error("topics: n must be >= 1");
  if (static_cast<std::size_t>(counts.cols()) != vocab.size())
    throw Error("topics: count matrix width does not match vocabulary");

  std::size_t k = n_clusters;
  for (auto a : assignments) k = std::max<std::size_t>(k, a + 1);
  const auto V = static_cast<std::size_t>(counts.cols());

  Matrix pooled = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(V));
  for (Eigen::Index d = 0; d < counts.outerSize(); ++d)
    for (CountMatrix::InnerIterator it(counts, d); it; ++it)
      pooled(assignments[static_cast<std::size_t>(d)], it.col()) += it.value();

  const Vector totals = pooled.rowwise().sum();
  const Eigen::RowVectorXd corpus_freq = pooled.colwise().sum();
  const double mean_total = k > 0 ? totals.sum() / static_cast<double>(k) : 0.0;

  ClusterTopics out;
  out.n_terms = n;
  out.clusters.resize(k);
  std::vector<double> score(V);
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < k; ++c) {
    const auto row = static_cast<Eigen::Index>(c);
    if (totals[row] <= 0.0) continue;
    order.clear();
    for (std::size_t t = 0; t < V; ++t) {
      const double count = pooled(row, static_cast<Eigen::Index>(t));
      if (count <= 0.0) continue;
      score[t] = count / totals[row] *
                 std::log(1.0 + mean_total / corpus_freq[static_cast<Eigen::Index>(t)]);
      order.push_back(t);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return score[a] != score[b] ? score[a] > score[b] : vocab.terms[a] < vocab.terms[b];
    });
    order.resize(std::min(n, order.size()));
    for (auto t : order) out.clusters[c].push_back({vocab.terms[t], score[t]});
  }
  return out;
}

}  // namespace fame::topics
