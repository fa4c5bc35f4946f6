#pragma once

#include "fame/common.hpp"
#include "fame/corpus.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fame::embeddings {

/// Row-major float32 document vectors with their ids.
struct EmbeddingMatrix {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<float> vectors;  // ids.size() x dim, row-major
  std::string model_tag;

  std::size_t rows() const { return ids.size(); }
  float at(std::size_t r, std::size_t c) const { return vectors[r * dim + c]; }
};

/// Checks the EmbeddingMatrix invariants, throwing fame::Error on violation.
void validate(const EmbeddingMatrix& emb);

/// FAME-EMB v1:
///   "FAME-EMB" | u32 version=1 | u32 n | u32 d | n*d f32 (row-major)
///   | u32 json_len | {"ids":[...],"model_tag":"..."}
/// All integers and floats little-endian.
std::vector<char> encode(const EmbeddingMatrix& emb);
EmbeddingMatrix decode(const std::vector<char>& bytes);

EmbeddingMatrix read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& path);

/// Reorders rows to corpus order; optionally L2-normalizes every row.
FeatureBlock align_embeddings(const EmbeddingMatrix& emb, const corpus::Corpus& corpus,
                              bool normalize = false);

}  // namespace fame::embeddings
