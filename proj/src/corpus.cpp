#include "fame/corpus.hpp"

#include "fame/porter.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace fame::corpus {

using nlohmann::json;

std::vector<std::string> Corpus::labels() const {
  std::vector<std::string> out;
  out.reserve(documents.size());
  for (const auto& d : documents) out.push_back(d.label.value_or(""));
  return out;
}

Corpus make_corpus(std::vector<Document> documents) {
  std::unordered_set<std::string> seen;
  std::set<std::string> labels;
  for (const auto& d : documents) {
    if (d.id.empty()) throw Error("document id must be non-empty");
    if (!seen.insert(d.id).second) throw Error("duplicate document id \"" + d.id + "\"");
    if (d.label) labels.insert(*d.label);
  }
  return Corpus{std::move(documents), {labels.begin(), labels.end()}};
}

Corpus parse_corpus_jsonl(std::string_view contents) {
  std::vector<Document> docs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::string where = "line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(where + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) throw Error(where + ": expected a JSON object");
    auto id = obj.find("id");
    if (id == obj.end() || !id->is_string()) throw Error(where + ": missing string field \"id\"");
    auto text = obj.find("text");
    if (text == obj.end() || !text->is_string())
      throw Error(where + ": missing string field \"text\"");

    Document doc{id->get<std::string>(), text->get<std::string>(), std::nullopt};
    if (auto label = obj.find("label"); label != obj.end() && !label->is_null()) {
      if (!label->is_string()) throw Error(where + ": field \"label\" must be a string or null");
      doc.label = label->get<std::string>();
    }
    if (doc.id.empty()) throw Error(where + ": field \"id\" is empty");
    docs.push_back(std::move(doc));
  }
  return make_corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_corpus_jsonl(buf.str());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<std::string> preprocess_text(std::string_view text, const PreprocessConfig& config) {
  const auto& stop = stopword_list(config.stopwords);
  std::vector<std::string> out;
  std::string token;
  auto flush = [&] {
    if (token.size() >= config.min_token_length &&
        !std::binary_search(stop.begin(), stop.end(), token)) {
      std::string term = config.stem ? porter_stem(token) : token;
      if (term.size() >= config.min_token_length) out.push_back(std::move(term));
    }
    token.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') {
      token.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c >= 'a' && c <= 'z') {
      token.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::optional<std::size_t> Vocabulary::find(const std::string& term) const {
  auto it = index.find(term);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_terms(std::vector<std::string> terms,
                                  std::vector<std::size_t> doc_freq, std::size_t n_docs_fitted) {
  if (terms.size() != doc_freq.size()) throw Error("vocabulary terms and doc_freq differ in length");
  Vocabulary v;
  v.terms = std::move(terms);
  v.doc_freq = std::move(doc_freq);
  v.n_docs_fitted = n_docs_fitted;
  v.index.reserve(v.terms.size());
  for (std::size_t i = 0; i < v.terms.size(); ++i)
    if (!v.index.emplace(v.terms[i], i).second)
      throw Error("duplicate vocabulary term \"" + v.terms[i] + "\"");
  return v;
}

std::vector<std::vector<std::string>> tokenize_corpus(const Corpus& corpus,
                                                      const PreprocessConfig& config,
                                                      unsigned threads) {
  std::vector<std::vector<std::string>> out(corpus.size());
  // Validate the stopword name once, before any worker starts.
  stopword_list(config.stopwords);
  const std::size_t n = corpus.size();
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = preprocess_text(corpus.documents[i].text, config);
    return out;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers)
        out[i] = preprocess_text(corpus.documents[i].text, config);
    });
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& tokens,
                            const PruneConfig& prune) {
  if (prune.min_df < 1) throw Error("min_df must be >= 1");
  if (!(prune.max_df_ratio > 0.0 && prune.max_df_ratio <= 1.0))
    throw Error("max_df_ratio must be in (0, 1]");
  if (prune.max_size < 1) throw Error("max_size must be >= 1");
  if (tokens.empty()) throw Error("cannot build a vocabulary from an empty corpus");

  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : tokens) {
    std::unordered_set<std::string_view> uniq(doc.begin(), doc.end());
    for (auto t : uniq) ++df[std::string(t)];
  }

  const double n = static_cast<double>(tokens.size());
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, count] : df)
    if (count >= prune.min_df && static_cast<double>(count) / n <= prune.max_df_ratio)
      kept.emplace_back(term, count);

  if (kept.size() > prune.max_size) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    kept.resize(prune.max_size);
  }
  if (kept.empty()) throw Error("vocabulary is empty after pruning");

  std::sort(kept.begin(), kept.end());
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  for (auto& [t, c] : kept) {
    terms.push_back(std::move(t));
    freqs.push_back(c);
  }
  return Vocabulary::from_terms(std::move(terms), std::move(freqs), tokens.size());
}

Vocabulary build_vocabulary(const Corpus& corpus, const PreprocessConfig& config,
                            const PruneConfig& prune, unsigned threads) {
  if (corpus.empty()) throw Error("cannot build a vocabulary from an empty corpus");
  return build_vocabulary(tokenize_corpus(corpus, config, threads), prune);
}

CountMatrix count_vectorize(const std::vector<std::vector<std::string>>& tokens,
                            const Vocabulary& vocab) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t d = 0; d < tokens.size(); ++d) {
    std::map<std::size_t, double> row;
    for (const auto& t : tokens[d])
      if (auto id = vocab.find(t)) row[*id] += 1.0;
    for (auto [col, c] : row)
      triplets.emplace_back(static_cast<int>(d), static_cast<int>(col), c);
  }
  CountMatrix m(static_cast<Eigen::Index>(tokens.size()), static_cast<Eigen::Index>(vocab.size()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

CountMatrix count_vectorize(const Corpus& corpus, const Vocabulary& vocab,
                            const PreprocessConfig& config, unsigned threads) {
  return count_vectorize(tokenize_corpus(corpus, config, threads), vocab);
}

std::vector<std::vector<std::uint32_t>> token_ids_from_counts(const CountMatrix& counts) {
  std::vector<std::vector<std::uint32_t>> out(static_cast<std::size_t>(counts.rows()));
  for (Eigen::Index d = 0; d < counts.outerSize(); ++d) {
    auto& doc = out[static_cast<std::size_t>(d)];
    for (CountMatrix::InnerIterator it(counts, d); it; ++it) {
      const auto n = static_cast<std::size_t>(it.value());
      doc.insert(doc.end(), n, static_cast<std::uint32_t>(it.col()));
    }
  }
  return out;
}

}  // namespace fame::corpus
