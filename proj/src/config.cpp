#include "fame/config.hpp"

#include "fame/porter.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace fame::pipeline {

using nlohmann::json;

namespace {

class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw Error("config " + (path_ + (key.empty() ? "" : "/" + key)) + (path_.empty() && key.empty() ? "/" : "") +
                ": " + msg);
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::size_t count(const std::string& key, std::size_t def, std::size_t min = 0) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number_integer() || v->get<long long>() < 0) fail(key, "expected a non-negative integer");
    const auto x = v->get<std::size_t>();
    if (x < min) fail(key, "must be >= " + std::to_string(min));
    return x;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number_integer() || v->get<long long>() < 0) fail(key, "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  double real(const std::string& key, double def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number()) fail(key, "expected a number");
    return v->get<double>();
  }

  double positive(const std::string& key, double def) {
    const double x = real(key, def);
    if (!(x > 0.0)) fail(key, "must be positive");
    return x;
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(key, "expected a boolean");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_string()) fail(key, "expected a string");
    return v->get<std::string>();
  }

  template <class Parse>
  auto parsed(const std::string& key, const std::string& def, Parse parse) {
    const std::string s = string(key, def);
    try {
      return parse(s);
    } catch (const Error& e) {
      fail(key, e.what());
    }
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> def,
                                  std::size_t min, bool allow_empty = false) {
    const json* v = get(key);
    if (!v) return def;
    if (v->is_number_integer()) return {count(key, 0, min)};
    if (!v->is_array() || (v->empty() && !allow_empty)) fail(key, "expected a non-empty integer list");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& e = (*v)[i];
      if (!e.is_number_integer() || e.get<long long>() < static_cast<long long>(min))
        fail(key + "/" + std::to_string(i), "expected an integer >= " + std::to_string(min));
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  /// Nested object, or an empty object when absent.
  Fields child(const std::string& key) {
    const json* v = get(key);
    static const json empty = json::object();
    return Fields(v ? *v : empty, path_ + "/" + key);
  }

  bool has(const std::string& key) const {
    auto it = j_.find(key);
    return it != j_.end() && !it->is_null();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key())) fail(it.key(), "unknown field");
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "auto") return FusionMode::automatic;
  if (s == "autoencoder") return FusionMode::autoencoder;
  if (s == "concat") return FusionMode::concat;
  throw Error("unknown fusion mode '" + s + "' (expected auto, autoencoder or concat)");
}

std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::automatic:
      return "auto";
    case FusionMode::autoencoder:
      return "autoencoder";
    case FusionMode::concat:
      return "concat";
  }
  return "auto";
}

}  // namespace

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  Fields root(j, "");
  const std::string corpus = root.string("corpus", "");
  if (corpus.empty()) root.fail("corpus", "required");
  c.corpus = resolve(corpus, base_dir);
  c.output_dir = resolve(root.string("output_dir", c.output_dir.string()), base_dir);
  c.seed = root.u64("seed", 0);
  c.threads = static_cast<unsigned>(root.count("threads", 1, 1));

  {
    auto f = root.child("preprocess");
    c.preprocess.stopwords = f.string("stopwords", c.preprocess.stopwords);
    try {
      corpus::stopword_list(c.preprocess.stopwords);
    } catch (const Error& e) {
      f.fail("stopwords", e.what());
    }
    c.preprocess.stem = f.boolean("stem", c.preprocess.stem);
    c.preprocess.min_token_length = f.count("min_token_length", c.preprocess.min_token_length, 1);
    f.finish();
  }
  {
    auto f = root.child("vocabulary");
    c.vocabulary.min_df = f.count("min_df", c.vocabulary.min_df, 1);
    c.vocabulary.max_df_ratio = f.real("max_df_ratio", c.vocabulary.max_df_ratio);
    if (!(c.vocabulary.max_df_ratio > 0.0 && c.vocabulary.max_df_ratio <= 1.0))
      f.fail("max_df_ratio", "must be in (0, 1]");
    c.vocabulary.max_size = f.count("max_size", c.vocabulary.max_size, 1);
    f.finish();
  }
  {
    auto features = root.child("features");
    const bool any_block = features.has("tfidf") || features.has("nmf") ||
                           features.has("lda") || features.has("embeddings");
    {
      auto f = features.child("tfidf");
      c.tfidf.enabled = f.boolean("enabled", any_block ? features.has("tfidf") : true);
      c.tfidf.normalize = f.boolean("normalize", c.tfidf.normalize);
      c.tfidf.scaling = f.parsed("scaling", "none", fusion::parse_scaling);
      f.finish();
    }
    {
      auto f = features.child("nmf");
      c.nmf.enabled = f.boolean("enabled", features.has("nmf"));
      c.nmf.rank = f.count("rank", c.nmf.rank, 1);
      c.nmf.iters = f.count("iters", c.nmf.iters, 1);
      c.nmf.early_stop = f.real("early_stop", c.nmf.early_stop);
      if (c.nmf.early_stop < 0.0) f.fail("early_stop", "must be >= 0");
      c.nmf.scaling = f.parsed("scaling", "zscore", fusion::parse_scaling);
      f.finish();
    }
    {
      auto f = features.child("lda");
      c.lda.enabled = f.boolean("enabled", features.has("lda"));
      c.lda.k = f.counts("k", c.lda.k, 1);
      if (f.has("alpha")) c.lda.alpha = f.positive("alpha", 1.0);
      else f.get("alpha");
      c.lda.beta = f.positive("beta", c.lda.beta);
      c.lda.iters = f.count("iters", c.lda.iters, 1);
      c.lda.burn_in = f.count("burn_in", c.lda.burn_in);
      c.lda.average_theta = f.boolean("average_theta", c.lda.average_theta);
      if (c.lda.average_theta && c.lda.burn_in >= c.lda.iters)
        f.fail("burn_in", "must be smaller than iters when average_theta is set");
      c.lda.scaling = f.parsed("scaling", "none", fusion::parse_scaling);
      f.finish();
    }
    {
      auto f = features.child("embeddings");
      c.embeddings.enabled = f.boolean("enabled", features.has("embeddings"));
      c.embeddings.path = resolve(f.string("path", ""), base_dir);
      if (c.embeddings.enabled && c.embeddings.path.empty()) f.fail("path", "required");
      c.embeddings.normalize = f.boolean("normalize", c.embeddings.normalize);
      c.embeddings.scaling = f.parsed("scaling", "zscore", fusion::parse_scaling);
      f.finish();
    }
    features.finish();
    if (!c.tfidf.enabled && !c.nmf.enabled && !c.lda.enabled && !c.embeddings.enabled)
      features.fail("", "at least one feature block must be enabled");
  }
  {
    auto f = root.child("fusion");
    c.fusion.mode = f.parsed("mode", "auto", parse_fusion_mode);
    c.fusion.hidden = f.counts("hidden", c.fusion.hidden, 1, true);
    c.fusion.latent = f.count("latent", c.fusion.latent, 1);
    c.fusion.activation = f.parsed("activation", "relu", fusion::parse_activation);
    c.fusion.learning_rate = f.positive("learning_rate", c.fusion.learning_rate);
    c.fusion.epochs = f.count("epochs", c.fusion.epochs);
    c.fusion.batch_size = f.count("batch_size", c.fusion.batch_size, 1);
    f.finish();
  }
  {
    auto f = root.child("cluster");
    c.cluster.k = f.count("k", c.cluster.k, 1);
    c.cluster.restarts = f.count("restarts", c.cluster.restarts, 1);
    c.cluster.max_iter = f.count("max_iter", c.cluster.max_iter, 1);
    c.cluster.tol = f.real("tol", c.cluster.tol);
    if (c.cluster.tol < 0.0) f.fail("tol", "must be >= 0");
    f.finish();
  }
  if (root.has("eval_split")) {
    auto f = root.child("eval_split");
    EvalSplit split{f.string("heldout_id_prefix", "")};
    if (split.heldout_id_prefix.empty()) f.fail("heldout_id_prefix", "required");
    c.eval_split = split;
    f.finish();
  } else {
    root.get("eval_split");
  }
  {
    auto f = root.child("projection");
    c.projection.enabled = f.boolean("enabled", c.projection.enabled);
    c.projection.method = f.string("method", c.projection.method);
    if (c.projection.method != "tsne" && c.projection.method != "pca")
      f.fail("method", "expected \"tsne\" or \"pca\"");
    c.projection.subsample = f.count("subsample", c.projection.subsample, 2);
    c.projection.perplexity = f.positive("perplexity", c.projection.perplexity);
    c.projection.iters = f.count("iters", c.projection.iters, 1);
    f.finish();
  }
  {
    auto f = root.child("report");
    c.report.samples_per_cluster = f.count("samples_per_cluster", c.report.samples_per_cluster);
    c.report.top_terms = f.count("top_terms", c.report.top_terms, 1);
    c.report.snippet_chars = f.count("snippet_chars", c.report.snippet_chars, 1);
    f.finish();
  }
  root.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

json canonical_json(const RunConfig& c) {
  json j;
  j["corpus"] = c.corpus.generic_string();
  j["seed"] = c.seed;
  j["preprocess"] = {{"stopwords", c.preprocess.stopwords},
                     {"stem", c.preprocess.stem},
                     {"min_token_length", c.preprocess.min_token_length}};
  j["vocabulary"] = {{"min_df", c.vocabulary.min_df},
                     {"max_df_ratio", c.vocabulary.max_df_ratio},
                     {"max_size", c.vocabulary.max_size}};
  json features = json::object();
  if (c.tfidf.enabled)
    features["tfidf"] = {{"normalize", c.tfidf.normalize}, {"scaling", fusion::to_string(c.tfidf.scaling)}};
  if (c.nmf.enabled)
    features["nmf"] = {{"rank", c.nmf.rank},
                       {"iters", c.nmf.iters},
                       {"early_stop", c.nmf.early_stop},
                       {"scaling", fusion::to_string(c.nmf.scaling)}};
  if (c.lda.enabled)
    features["lda"] = {{"k", c.lda.k},
                       {"alpha", c.lda.alpha ? json(*c.lda.alpha) : json(nullptr)},
                       {"beta", c.lda.beta},
                       {"iters", c.lda.iters},
                       {"burn_in", c.lda.burn_in},
                       {"average_theta", c.lda.average_theta},
                       {"scaling", fusion::to_string(c.lda.scaling)}};
  if (c.embeddings.enabled)
    features["embeddings"] = {{"path", c.embeddings.path.generic_string()},
                              {"normalize", c.embeddings.normalize},
                              {"scaling", fusion::to_string(c.embeddings.scaling)}};
  j["features"] = features;
  j["fusion"] = {{"mode", to_string(c.fusion.mode)},
                 {"hidden", c.fusion.hidden},
                 {"latent", c.fusion.latent},
                 {"activation", fusion::to_string(c.fusion.activation)},
                 {"learning_rate", c.fusion.learning_rate},
                 {"epochs", c.fusion.epochs},
                 {"batch_size", c.fusion.batch_size}};
  j["cluster"] = {{"k", c.cluster.k},
                  {"restarts", c.cluster.restarts},
                  {"max_iter", c.cluster.max_iter},
                  {"tol", c.cluster.tol}};
  j["eval_split"] = c.eval_split ? json{{"heldout_id_prefix", c.eval_split->heldout_id_prefix}} : json(nullptr);
  j["projection"] = {{"enabled", c.projection.enabled},
                     {"method", c.projection.method},
                     {"subsample", c.projection.subsample},
                     {"perplexity", c.projection.perplexity},
                     {"iters", c.projection.iters}};
  j["report"] = {{"samples_per_cluster", c.report.samples_per_cluster},
                 {"top_terms", c.report.top_terms},
                 {"snippet_chars", c.report.snippet_chars}};
  return j;
}

std::string config_hash(const RunConfig& config) {
  const std::string text = canonical_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace fame::pipeline
