#include "fame/lda.hpp"

#include "fame/random.hpp"

#include <algorithm>
#include <numeric>

namespace fame::lda {
namespace {

std::size_t draw(std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

void accumulate_theta(LdaModel& m) {
  const double denom_alpha = static_cast<double>(m.K) * m.alpha;
  for (std::size_t d = 0; d < m.n_docs(); ++d)
    for (std::size_t k = 0; k < m.K; ++k)
      m.theta_sum(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) +=
          (m.doc_topic(d, k) + m.alpha) / (m.doc_len[d] + denom_alpha);
  ++m.theta_samples;
}

}  // namespace

Matrix LdaModel::phi() const {
  Matrix out(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(V));
  const double vb = static_cast<double>(V) * beta;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t w = 0; w < V; ++w)
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) =
          (topic_word(k, w) + beta) / (n_k[k] + vb);
  return out;
}

LdaModel fit_lda_gibbs(const TokenDocs& docs, std::size_t V, const GibbsOptions& options,
                       const SweepObserver& observer) {
  if (options.K < 1) throw Error("LDA: K must be >= 1");
  const double alpha = options.alpha < 0.0 ? 50.0 / static_cast<double>(options.K) : options.alpha;
  if (!(alpha > 0.0)) throw Error("LDA: alpha must be positive");
  if (!(options.beta > 0.0)) throw Error("LDA: beta must be positive");
  if (V < 1) throw Error("LDA: vocabulary is empty");

  LdaModel m;
  m.K = options.K;
  m.alpha = alpha;
  m.beta = options.beta;
  m.V = V;
  m.seed = options.seed;
  const std::size_t K = m.K;
  const std::size_t D = docs.size();
  m.n_kw.assign(K * V, 0);
  m.n_k.assign(K, 0);
  m.n_dk.assign(D * K, 0);
  m.doc_len.resize(D);
  m.assignments.resize(D);

  std::vector<Rng> rngs;
  rngs.reserve(D);
  for (std::size_t d = 0; d < D; ++d) {
    rngs.emplace_back(options.seed, d);
    const auto& doc = docs[d];
    m.doc_len[d] = static_cast<std::uint32_t>(doc.size());
    auto& z = m.assignments[d];
    z.resize(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (doc[i] >= V) throw Error("LDA: token id out of vocabulary range");
      const auto k = static_cast<std::uint32_t>(rngs[d].below(K));
      z[i] = k;
      ++m.n_kw[k * V + doc[i]];
      ++m.n_k[k];
      ++m.n_dk[d * K + k];
    }
  }

  if (options.average_theta) m.theta_sum = Matrix::Zero(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(K));

  const double vb = static_cast<double>(V) * m.beta;
  std::vector<double> cumulative(K);
  for (std::size_t sweep = 0; sweep < options.iters; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto& doc = docs[d];
      auto& z = m.assignments[d];
      std::uint32_t* ndk = &m.n_dk[d * K];
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::size_t w = doc[i];
        const std::uint32_t old = z[i];
        --m.n_kw[old * V + w];
        --m.n_k[old];
        --ndk[old];
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          acc += (ndk[k] + m.alpha) * (m.n_kw[k * V + w] + m.beta) / (m.n_k[k] + vb);
          cumulative[k] = acc;
        }
        const auto k = static_cast<std::uint32_t>(draw(cumulative, rngs[d]));
        z[i] = k;
        ++m.n_kw[k * V + w];
        ++m.n_k[k];
        ++ndk[k];
      }
    }
    ++m.iters_run;
    if (options.average_theta && m.iters_run > options.burn_in) accumulate_theta(m);
    if (observer) observer(sweep, m);
  }
  return m;
}

Matrix infer_theta(const LdaModel& model) {
  if (model.K == 0) throw Error("LDA: model is not fitted");
  if (model.theta_samples > 0) return model.theta_sum / static_cast<double>(model.theta_samples);
  const auto D = static_cast<Eigen::Index>(model.n_docs());
  const auto K = static_cast<Eigen::Index>(model.K);
  Matrix theta(D, K);
  const double ka = static_cast<double>(model.K) * model.alpha;
  for (Eigen::Index d = 0; d < D; ++d)
    for (Eigen::Index k = 0; k < K; ++k)
      theta(d, k) = (model.doc_topic(static_cast<std::size_t>(d), static_cast<std::size_t>(k)) +
                     model.alpha) /
                    (model.doc_len[static_cast<std::size_t>(d)] + ka);
  return theta;
}

Matrix infer_theta(const LdaModel& model, const TokenDocs& docs, std::size_t burn_in,
                   std::size_t samples, std::uint64_t seed) {
  if (model.K == 0) throw Error("LDA: model is not fitted");
  const std::size_t K = model.K;
  const std::size_t V = model.V;
  const double vb = static_cast<double>(V) * model.beta;
  const double ka = static_cast<double>(K) * model.alpha;
  Matrix theta = Matrix::Zero(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(K));
  std::vector<double> cumulative(K);

  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::vector<std::uint32_t> words;
    for (auto w : docs[d])
      if (w < V) words.push_back(w);
    const auto row = static_cast<Eigen::Index>(d);
    if (words.empty()) {
      theta.row(row).setConstant(1.0 / static_cast<double>(K));
      continue;
    }

    Rng rng(seed, d);
    std::vector<std::uint32_t> z(words.size());
    std::vector<std::uint32_t> ndk(K, 0);
    for (std::size_t i = 0; i < words.size(); ++i) {
      z[i] = static_cast<std::uint32_t>(rng.below(K));
      ++ndk[z[i]];
    }
    const double len = static_cast<double>(words.size());
    std::size_t taken = 0;
    const std::size_t sweeps = burn_in + std::max<std::size_t>(samples, 1);
    for (std::size_t s = 0; s < sweeps; ++s) {
      for (std::size_t i = 0; i < words.size(); ++i) {
        const std::size_t w = words[i];
        --ndk[z[i]];
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          acc += (ndk[k] + model.alpha) * (model.topic_word(k, w) + model.beta) /
                 (model.n_k[k] + vb);
          cumulative[k] = acc;
        }
        z[i] = static_cast<std::uint32_t>(draw(cumulative, rng));
        ++ndk[z[i]];
      }
      if (s >= burn_in) {
        for (std::size_t k = 0; k < K; ++k)
          theta(row, static_cast<Eigen::Index>(k)) += (ndk[k] + model.alpha) / (len + ka);
        ++taken;
      }
    }
    theta.row(row) /= static_cast<double>(taken);
  }
  return theta;
}

std::vector<std::string> lda_top_words(const LdaModel& model, std::size_t k, std::size_t n,
                                       const corpus::Vocabulary& vocab) {
  if (k >= model.K) throw Error("LDA: topic id " + std::to_string(k) + " out of range");
  if (vocab.size() != model.V) throw Error("LDA: vocabulary size does not match model");
  std::vector<std::size_t> order(model.V);
  std::iota(order.begin(), order.end(), 0);
  // phi_kw is monotone in n_kw within a topic.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ca = model.topic_word(k, a);
    const auto cb = model.topic_word(k, b);
    return ca != cb ? ca > cb : vocab.terms[a] < vocab.terms[b];
  });
  order.resize(std::min(n, order.size()));
  std::vector<std::string> out;
  for (auto w : order) out.push_back(vocab.terms[w]);
  return out;
}

}  // namespace fame::lda
