#pragma once

#include "fame/common.hpp"
#include "fame/corpus.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fame::lda {

using TokenDocs = std::vector<std::vector<std::uint32_t>>;

/// Collapsed Gibbs state. Counts are kept consistent with `assignments`
/// after every sweep.
struct LdaModel {
  std::size_t K = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t V = 0;
  std::vector<std::uint32_t> n_kw;  // K x V, row-major
  std::vector<std::uint32_t> n_k;   // K
  std::vector<std::uint32_t> n_dk;  // n_docs x K, row-major
  std::vector<std::uint32_t> doc_len;
  std::vector<std::vector<std::uint32_t>> assignments;  // per document, per token
  std::uint64_t seed = 0;
  std::size_t iters_run = 0;

  /// Sum of per-sweep theta estimates over post-burn-in sweeps (sample-averaged mode).
  Matrix theta_sum;
  std::size_t theta_samples = 0;

  std::size_t n_docs() const { return doc_len.size(); }
  std::uint32_t topic_word(std::size_t k, std::size_t w) const { return n_kw[k * V + w]; }
  std::uint32_t doc_topic(std::size_t d, std::size_t k) const { return n_dk[d * K + k]; }

  /// phi_kw = (n_kw + beta) / (n_k + V beta), K x V.
  Matrix phi() const;
};

struct GibbsOptions {
  std::size_t K = 20;
  double alpha = -1.0;  // negative selects 50 / K
  double beta = 0.01;
  std::size_t iters = 1000;
  std::uint64_t seed = 0;
  /// When average_theta is set, sweeps after burn_in accumulate theta.
  std::size_t burn_in = 200;
  bool average_theta = false;
};

using SweepObserver = std::function<void(std::size_t sweep, const LdaModel& model)>;

/// Fits LDA by collapsed Gibbs sampling over documents of vocabulary ids in
/// [0, V). Each document draws from its own generator keyed by (seed, doc index).
LdaModel fit_lda_gibbs(const TokenDocs& docs, std::size_t V, const GibbsOptions& options,
                       const SweepObserver& observer = {});

/// Theta of the training documents: final-state counts, or the sample
/// average when the model was fitted with average_theta.
Matrix infer_theta(const LdaModel& model);

/// Fold-in inference for unseen documents with topic-word counts held fixed.
/// Out-of-range ids are dropped. Theta is averaged over `samples` sweeps after
/// `burn_in` sweeps.
Matrix infer_theta(const LdaModel& model, const TokenDocs& docs, std::size_t burn_in,
                   std::size_t samples, std::uint64_t seed);

/// The n terms of topic k with largest phi, ties broken lexicographically.
std::vector<std::string> lda_top_words(const LdaModel& model, std::size_t k, std::size_t n,
                                       const corpus::Vocabulary& vocab);

}  // namespace fame::lda
