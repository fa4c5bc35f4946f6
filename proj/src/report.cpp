#include "fame/pipeline.hpp"

#include "fame/byte_io.hpp"
#include "fame/random.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace fame::pipeline {

std::string snippet(std::string_view text, std::size_t max_chars) {
  std::string out;
  bool space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') {
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c >= 'a' && c <= 'z') {
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(static_cast<char>(c));
    } else {
      space = true;
    }
    if (out.size() >= max_chars) break;
  }
  if (out.size() > max_chars) out.resize(max_chars);
  return out;
}

void emit_cluster_report(const corpus::Corpus& corpus, const std::vector<std::uint32_t>& assignments,
                         std::size_t k, const topics::ClusterTopics& topics,
                         std::size_t samples_per_cluster, std::uint64_t seed,
                         const std::filesystem::path& path, std::size_t snippet_chars) {
  if (assignments.size() != corpus.size())
    throw Error("report: " + std::to_string(assignments.size()) + " assignments for " +
                std::to_string(corpus.size()) + " documents");
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] >= k) throw Error("report: cluster id out of range");
    members[assignments[i]].push_back(i);
  }

  std::ostringstream out;
  out << "# Cluster report\n\n"
      << "Documents: " << corpus.size() << ". Clusters: " << k << ". Sampling seed: " << seed
      << ".\n";
  for (std::size_t c = 0; c < k; ++c) {
    auto& pool = members[c];
    out << "\n## Cluster " << c << "\n\n";
    out << "Size: " << pool.size() << "\n\n";
    out << "Top terms:";
    if (c < topics.clusters.size() && !topics.clusters[c].empty()) {
      for (std::size_t t = 0; t < topics.clusters[c].size(); ++t)
        out << (t ? ", " : " ") << topics.clusters[c][t].term;
    } else {
      out << " (none)";
    }
    out << "\n";
    if (pool.empty()) continue;

    const std::size_t take = std::min(samples_per_cluster, pool.size());
    Rng rng(seed, c);
    for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    std::vector<std::size_t> picked(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(picked.begin(), picked.end());

    out << "\nSamples:\n";
    for (auto d : picked) {
      const auto& doc = corpus.documents[d];
      out << "\n" << snippet(doc.text, snippet_chars)
          << " - target: " << doc.label.value_or("(unlabeled)") << "\n";
    }
  }
  const std::string text = out.str();
  byte_io::write_file(path.string(), std::vector<char>(text.begin(), text.end()));
}

}  // namespace fame::pipeline
