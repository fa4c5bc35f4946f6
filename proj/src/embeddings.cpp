#include "fame/embeddings.hpp"

#include "fame/byte_io.hpp"

#include <json.hpp>

#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace fame::embeddings {
namespace {

constexpr char kMagic[8] = {'F', 'A', 'M', 'E', '-', 'E', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void validate(const EmbeddingMatrix& emb) {
  if (emb.dim < 1 && !emb.ids.empty()) throw Error("embeddings: dimension must be >= 1");
  if (emb.vectors.size() != emb.ids.size() * emb.dim)
    throw Error("embeddings: id count " + std::to_string(emb.ids.size()) +
                " does not match payload rows");
  std::unordered_set<std::string_view> seen;
  for (const auto& id : emb.ids)
    if (!seen.insert(id).second) throw Error("embeddings: duplicate id \"" + id + "\"");
  for (std::size_t r = 0; r < emb.ids.size(); ++r)
    for (std::size_t c = 0; c < emb.dim; ++c)
      if (!std::isfinite(emb.at(r, c)))
        throw Error("embeddings: non-finite value at row " + std::to_string(r) + ", col " +
                    std::to_string(c));
}

std::vector<char> encode(const EmbeddingMatrix& emb) {
  validate(emb);
  std::vector<char> out(kMagic, kMagic + 8);
  byte_io::put<std::uint32_t>(out, kVersion);
  byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(emb.ids.size()));
  byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(emb.dim));
  for (float v : emb.vectors) byte_io::put<float>(out, v);
  const std::string meta = nlohmann::json{{"ids", emb.ids}, {"model_tag", emb.model_tag}}.dump();
  byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  return out;
}

EmbeddingMatrix decode(const std::vector<char>& bytes) {
  byte_io::Reader in(bytes, "FAME-EMB");
  if (in.get_string(8) != std::string(kMagic, 8)) throw Error("FAME-EMB: bad magic");
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) throw Error("FAME-EMB: unsupported version " + std::to_string(version));
  const auto n = in.get<std::uint32_t>();
  const auto d = in.get<std::uint32_t>();
  if (d < 1 && n > 0) throw Error("FAME-EMB: dimension must be >= 1");

  EmbeddingMatrix emb;
  emb.dim = d;
  const std::size_t count = static_cast<std::size_t>(n) * d;
  in.require(count * sizeof(float));
  emb.vectors.resize(count);
  for (std::size_t i = 0; i < count; ++i) emb.vectors[i] = in.get<float>();

  const auto meta_len = in.get<std::uint32_t>();
  const std::string meta_text = in.get_string(meta_len);
  if (in.remaining() != 0)
    throw Error("FAME-EMB: " + std::to_string(in.remaining()) + " trailing bytes");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_text);
    emb.ids = meta.at("ids").get<std::vector<std::string>>();
    emb.model_tag = meta.value("model_tag", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("FAME-EMB: bad metadata: ") + e.what());
  }
  if (emb.ids.size() != n)
    throw Error("FAME-EMB: header declares " + std::to_string(n) + " rows but metadata lists " +
                std::to_string(emb.ids.size()) + " ids");
  validate(emb);
  return emb;
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  try {
    return decode(byte_io::read_file(path.string()));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& path) {
  byte_io::write_file(path.string(), encode(emb));
}

FeatureBlock align_embeddings(const EmbeddingMatrix& emb, const corpus::Corpus& corpus,
                              bool normalize) {
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t r = 0; r < emb.ids.size(); ++r) row_of.emplace(emb.ids[r], r);

  std::vector<std::string> missing;
  for (const auto& doc : corpus.documents)
    if (!row_of.contains(doc.id)) missing.push_back(doc.id);
  auto list = [](const std::vector<std::string>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size() && i < 10; ++i) s += (i ? ", " : "") + ids[i];
    if (ids.size() > 10) s += ", ... (" + std::to_string(ids.size()) + " total)";
    return s;
  };
  if (!missing.empty()) throw Error("embeddings: missing corpus ids: " + list(missing));
  if (emb.ids.size() != corpus.size()) {
    std::unordered_set<std::string_view> corpus_ids;
    for (const auto& doc : corpus.documents) corpus_ids.insert(doc.id);
    std::vector<std::string> extra;
    for (const auto& id : emb.ids)
      if (!corpus_ids.contains(id)) extra.push_back(id);
    throw Error("embeddings: ids not in corpus: " + list(extra));
  }

  FeatureBlock block{"embeddings", Matrix(static_cast<Eigen::Index>(corpus.size()),
                                          static_cast<Eigen::Index>(emb.dim))};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::size_t r = row_of.at(corpus.documents[i].id);
    for (std::size_t c = 0; c < emb.dim; ++c)
      block.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = emb.at(r, c);
    if (normalize) {
      const double norm = block.values.row(static_cast<Eigen::Index>(i)).norm();
      if (norm > 0.0) block.values.row(static_cast<Eigen::Index>(i)) /= norm;
    }
  }
  return block;
}

}  // namespace fame::embeddings
