#pragma once

#include "fame/common.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace fame::cluster {

struct KMeansModel {
  std::size_t k = 0;
  Matrix centroids;  // k x d
  double inertia = 0.0;
  std::size_t n_iter = 0;
  std::uint64_t seed = 0;
  /// Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> inertia_history;
};

struct ClusteringResult {
  std::vector<std::uint32_t> assignments;
  KMeansModel model;
};

struct KMeansOptions {
  std::size_t k = 20;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

/// k-means++ seeding and Lloyd iterations per restart; returns the restart
/// with the lowest inertia. Restart r draws from the generator keyed (seed, r).
ClusteringResult kmeans_fit(const Matrix& X, const KMeansOptions& options);

/// Nearest centroid by squared Euclidean distance, lowest index on ties.
std::vector<std::uint32_t> kmeans_predict(const KMeansModel& model, const Matrix& X);

double inertia(const Matrix& X, const Matrix& centroids, const std::vector<std::uint32_t>& assignments);

/// Maps arbitrary labels to dense codes in order of first appearance.
template <class Label>
std::vector<std::size_t> encode_labels(const std::vector<Label>& labels) {
  std::map<Label, std::size_t> codes;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(codes.emplace(l, codes.size()).first->second);
  return out;
}

/// Mutual information normalized by the arithmetic mean of the two entropies.
double nmi_codes(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

struct PartitionMetrics {
  double ari = 0.0;
  double purity = 0.0;
};

PartitionMetrics partition_metrics_codes(const std::vector<std::size_t>& pred,
                                         const std::vector<std::size_t>& gold);

template <class A, class B>
double nmi(const std::vector<A>& a, const std::vector<B>& b) {
  return nmi_codes(encode_labels(a), encode_labels(b));
}

template <class A, class B>
PartitionMetrics partition_metrics(const std::vector<A>& pred, const std::vector<B>& gold) {
  return partition_metrics_codes(encode_labels(pred), encode_labels(gold));
}

}  // namespace fame::cluster
