#pragma once

#include "fame/corpus.hpp"
#include "fame/fusion.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fame::pipeline {

struct TfidfSettings {
  bool enabled = true;
  bool normalize = true;
  fusion::Scaling scaling = fusion::Scaling::none;
};

struct NmfSettings {
  bool enabled = false;
  std::size_t rank = 50;
  std::size_t iters = 200;
  double early_stop = 1e-6;
  fusion::Scaling scaling = fusion::Scaling::zscore;
};

struct LdaSettings {
  bool enabled = false;
  std::vector<std::size_t> k = {20};
  std::optional<double> alpha;  // unset means 50 / K
  double beta = 0.01;
  std::size_t iters = 1000;
  std::size_t burn_in = 200;
  bool average_theta = false;
  fusion::Scaling scaling = fusion::Scaling::none;
};

struct EmbeddingSettings {
  bool enabled = false;
  std::filesystem::path path;
  bool normalize = true;
  fusion::Scaling scaling = fusion::Scaling::zscore;
};

enum class FusionMode { automatic, autoencoder, concat };

struct FusionSettings {
  FusionMode mode = FusionMode::automatic;
  std::vector<std::size_t> hidden = {512};
  std::size_t latent = 64;
  fusion::Activation activation = fusion::Activation::relu;
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  std::size_t batch_size = 256;
};

struct ClusterSettings {
  std::size_t k = 20;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
};

struct EvalSplit {
  std::string heldout_id_prefix;
};

struct ProjectionSettings {
  bool enabled = true;
  std::string method = "tsne";  // tsne | pca
  std::size_t subsample = 2000;
  double perplexity = 30.0;
  std::size_t iters = 1000;
};

struct ReportSettings {
  std::size_t samples_per_cluster = 5;
  std::size_t top_terms = 10;
  std::size_t snippet_chars = 600;
};

/// Stage seeds are the global seed plus these fixed offsets.
namespace seed_offset {
constexpr std::uint64_t lda = 1;
constexpr std::uint64_t ae_init = 2;
constexpr std::uint64_t ae_shuffle = 3;
constexpr std::uint64_t kmeans = 4;
constexpr std::uint64_t tsne = 5;
constexpr std::uint64_t report = 6;
constexpr std::uint64_t nmf = 7;
}  // namespace seed_offset

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path output_dir = "fame_out";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  corpus::PreprocessConfig preprocess;
  corpus::PruneConfig vocabulary;
  TfidfSettings tfidf;
  NmfSettings nmf;
  LdaSettings lda;
  EmbeddingSettings embeddings;
  FusionSettings fusion;
  ClusterSettings cluster;
  std::optional<EvalSplit> eval_split;
  ProjectionSettings projection;
  ReportSettings report;

  std::uint64_t stage_seed(std::uint64_t offset) const { return seed + offset; }
};

/// Parses and validates a config object. Relative paths are resolved against
/// `base_dir`. Errors name the offending JSON pointer, e.g. "/cluster/k".
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of every field that affects numeric results (output
/// directory and thread count excluded), with defaults filled in.
nlohmann::json canonical_json(const RunConfig& config);

/// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace fame::pipeline
