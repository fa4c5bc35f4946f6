#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing here
// calls into the code paths it is used to check.

#include "fame/common.hpp"
#include "fame/corpus.hpp"
#include "fame/random.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace fame::testing {

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag), reinterpret_cast<std::uintptr_t>(this));
    path_ = std::filesystem::temp_directory_path() / ("fame_" + tag + "_" + std::to_string(rng.next() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Documents drawn from `n_topics` topics with disjoint vocabularies. Topic t
/// owns words "t<t>w<j>" (letters only after mapping digits to letters) and
/// each document mixes `noise` shared filler words.
struct SyntheticCorpus {
  std::vector<corpus::Document> documents;
  std::vector<std::size_t> topic_of;
};

inline std::string letters(std::size_t n) {
  std::string s;
  do {
    s.push_back(static_cast<char>('a' + n % 26));
    n /= 26;
  } while (n > 0);
  return s;
}

inline SyntheticCorpus disjoint_topic_corpus(std::size_t n_topics, std::size_t docs_per_topic,
                                             std::size_t words_per_topic, std::size_t doc_len,
                                             std::uint64_t seed) {
  Rng rng(seed);
  SyntheticCorpus out;
  for (std::size_t d = 0; d < n_topics * docs_per_topic; ++d) {
    const std::size_t t = d % n_topics;
    std::string text;
    for (std::size_t i = 0; i < doc_len; ++i) {
      // Zipf-ish: lower word ids are more frequent.
      const double u = rng.uniform();
      const auto w = static_cast<std::size_t>(std::floor(std::pow(u, 2.0) * static_cast<double>(words_per_topic)));
      text += "zq" + letters(t) + "x" + letters(w) + " ";
    }
    out.documents.push_back({"doc" + std::to_string(d), text, "topic" + std::to_string(t)});
    out.topic_of.push_back(t);
  }
  return out;
}

inline void write_corpus_jsonl(const std::filesystem::path& p,
                               const std::vector<corpus::Document>& docs) {
  std::ofstream out(p, std::ios::binary);
  for (const auto& d : docs) {
    nlohmann::json j = {{"id", d.id}, {"text", d.text}};
    j["label"] = d.label ? nlohmann::json(*d.label) : nlohmann::json(nullptr);
    out << j.dump() << "\n";
  }
}

/// Every regular file under `dir` keyed by relative path. Wall-clock timings
/// are dropped so two runs can be compared byte for byte.
inline std::map<std::string, std::string> numeric_artifacts(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), dir).generic_string();
    if (rel == "timings.json") continue;
    std::string text = read_text(e.path());
    if (rel == "summary.json") {
      auto j = nlohmann::json::parse(text);
      j.erase("timings_seconds");
      text = j.dump();
    }
    out[rel] = std::move(text);
  }
  return out;
}

// ---------------------------------------------------------------------------
// LDA: exact posterior by enumerating every topic assignment.

struct LdaExact {
  Matrix theta_mean;              // n_docs x K, E[(n_dk + a) / (len_d + K a)]
  std::vector<double> same_topic;  // E[1{z_i == z_j}] for token pairs i < j (flattened order)
};

inline LdaExact lda_exact_posterior(const std::vector<std::vector<std::uint32_t>>& docs,
                                    std::size_t V, std::size_t K, double alpha, double beta) {
  std::vector<std::pair<std::size_t, std::uint32_t>> tokens;  // (doc, word)
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (auto w : docs[d]) tokens.emplace_back(d, w);
  const std::size_t T = tokens.size();
  std::size_t configs = 1;
  for (std::size_t i = 0; i < T; ++i) configs *= K;

  LdaExact out;
  out.theta_mean = Matrix::Zero(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(K));
  out.same_topic.assign(T * (T - 1) / 2, 0.0);
  std::vector<double> log_w(configs);
  std::vector<std::size_t> z(T);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < configs; ++c) {
    std::size_t code = c;
    for (std::size_t i = 0; i < T; ++i) {
      z[i] = code % K;
      code /= K;
    }
    std::vector<double> ndk(docs.size() * K, 0), nkw(K * V, 0), nk(K, 0);
    for (std::size_t i = 0; i < T; ++i) {
      ndk[tokens[i].first * K + z[i]] += 1;
      nkw[z[i] * V + tokens[i].second] += 1;
      nk[z[i]] += 1;
    }
    double lw = 0.0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (std::size_t k = 0; k < K; ++k) lw += std::lgamma(ndk[d * K + k] + alpha);
      lw -= std::lgamma(static_cast<double>(docs[d].size()) + K * alpha);
    }
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t w = 0; w < V; ++w) lw += std::lgamma(nkw[k * V + w] + beta);
      lw -= std::lgamma(nk[k] + V * beta);
    }
    log_w[c] = lw;
    max_log = std::max(max_log, lw);
  }
  double total = 0.0;
  for (std::size_t c = 0; c < configs; ++c) {
    const double w = std::exp(log_w[c] - max_log);
    total += w;
    std::size_t code = c;
    for (std::size_t i = 0; i < T; ++i) {
      z[i] = code % K;
      code /= K;
    }
    for (std::size_t d = 0; d < docs.size(); ++d)
      for (std::size_t k = 0; k < K; ++k) {
        double n = 0;
        for (std::size_t i = 0; i < T; ++i)
          if (tokens[i].first == d && z[i] == k) n += 1;
        out.theta_mean(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) +=
            w * (n + alpha) / (static_cast<double>(docs[d].size()) + K * alpha);
      }
    std::size_t p = 0;
    for (std::size_t i = 0; i < T; ++i)
      for (std::size_t j = i + 1; j < T; ++j, ++p)
        if (z[i] == z[j]) out.same_topic[p] += w;
  }
  out.theta_mean /= total;
  for (auto& s : out.same_topic) s /= total;
  return out;
}

// ---------------------------------------------------------------------------
// K-Means: optimum over every assignment of n points to k labels.

inline double kmeans_exhaustive_optimum(const Matrix& X, std::size_t k) {
  const auto n = static_cast<std::size_t>(X.rows());
  std::size_t configs = 1;
  for (std::size_t i = 0; i < n; ++i) configs *= k;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> label(n);
  for (std::size_t c = 0; c < configs; ++c) {
    std::size_t code = c;
    for (std::size_t i = 0; i < n; ++i) {
      label[i] = code % k;
      code /= k;
    }
    double sse = 0.0;
    for (std::size_t g = 0; g < k; ++g) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(X.cols());
      std::size_t m = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (label[i] == g) {
          sum += X.row(static_cast<Eigen::Index>(i));
          ++m;
        }
      if (m == 0) continue;
      const Eigen::RowVectorXd mean = sum / static_cast<double>(m);
      for (std::size_t i = 0; i < n; ++i)
        if (label[i] == g) sse += (X.row(static_cast<Eigen::Index>(i)) - mean).squaredNorm();
    }
    best = std::min(best, sse);
  }
  return best;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = 0.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  return m;
}

}  // namespace fame::testing
