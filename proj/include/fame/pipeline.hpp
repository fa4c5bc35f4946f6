#pragma once

#include "fame/cluster.hpp"
#include "fame/config.hpp"
#include "fame/corpus.hpp"
#include "fame/topics.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace fame::pipeline {

enum class Stage { ingest, features, fuse, cluster, project, report };

const std::vector<Stage>& all_stages();
std::string to_string(Stage s);

/// Runs stages against an output directory. Each stage reads what earlier
/// stages persisted there, so a stage can be re-run on its own.
///
/// Artifacts:
///   ingest    documents.json vocabulary.json counts.mat
///   features  features/<block>.mat plus per-model files under models/
///   fuse      latent.mat fusion.json (autoencoder files under models/)
///   cluster   assignments.mat centroids.mat clusters.json
///   project   projection.csv projection.json
///   report    topics.json report.md summary.json
class Runner {
 public:
  explicit Runner(RunConfig config);

  void run_stage(Stage stage);
  void run_all();

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& out() const { return config_.output_dir; }

 private:
  void ingest();
  void features();
  void fuse();
  void cluster();
  void project();
  void report();

  const corpus::Corpus& corpus();
  void record_stage(Stage stage, double seconds);

  RunConfig config_;
  std::optional<corpus::Corpus> corpus_;
};

/// Markdown report: one section per cluster with its size, top terms and up
/// to `samples_per_cluster` sampled documents, each followed by
/// " - target: <gold label>".
void emit_cluster_report(const corpus::Corpus& corpus, const std::vector<std::uint32_t>& assignments,
                         std::size_t k, const topics::ClusterTopics& topics,
                         std::size_t samples_per_cluster, std::uint64_t seed,
                         const std::filesystem::path& path, std::size_t snippet_chars = 600);

/// Lowercases, replaces non-letters with spaces, collapses runs of spaces and
/// truncates to at most max_chars characters.
std::string snippet(std::string_view text, std::size_t max_chars);

}  // namespace fame::pipeline
