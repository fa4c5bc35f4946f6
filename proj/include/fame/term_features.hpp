#pragma once

#include "fame/common.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace fame::term {

struct TfidfModel {
  std::size_t vocab_size = 0;
  Vector idf;
  bool normalize = true;
};

/// idf[t] = ln((1 + N) / (1 + df_t)) + 1 over the rows of `counts`.
TfidfModel fit_tfidf(const CountMatrix& counts, bool normalize = true);

/// Raw count times idf, optionally L2-normalized per row. Zero rows stay zero.
CountMatrix transform_tfidf_sparse(const TfidfModel& model, const CountMatrix& counts);
FeatureBlock transform_tfidf(const TfidfModel& model, const CountMatrix& counts);

struct NmfOptions {
  std::size_t rank = 10;
  std::size_t iters = 200;
  std::uint64_t seed = 0;
  /// Stop once the relative error improvement drops below this; 0 disables.
  double early_stop = 0.0;
};

struct NmfModel {
  std::size_t rank = 0;
  Matrix W;  // n_docs x rank
  Matrix H;  // rank x n_terms
  std::vector<double> loss_history;  // Frobenius error after each iteration
};

/// Multiplicative-update NMF minimizing ||X - WH||_F.
///
/// `on_iteration`, when set, is called after every iteration with the current
/// factors; tests use it to check nonnegativity along the whole trajectory.
using NmfObserver = std::function<void(std::size_t iter, const Matrix& W, const Matrix& H)>;
NmfModel fit_nmf(const Matrix& X, const NmfOptions& options, const NmfObserver& on_iteration = {});
NmfModel fit_nmf(const CountMatrix& X, const NmfOptions& options,
                 const NmfObserver& on_iteration = {});

}  // namespace fame::term
