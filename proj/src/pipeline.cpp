#include "fame/pipeline.hpp"

#include "fame/byte_io.hpp"
#include "fame/embeddings.hpp"
#include "fame/fusion.hpp"
#include "fame/lda.hpp"
#include "fame/matrix_file.hpp"
#include "fame/projection.hpp"
#include "fame/random.hpp"
#include "fame/term_features.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

namespace fame::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::ingest,  Stage::features, Stage::fuse,
                                            Stage::cluster, Stage::project,  Stage::report};
  return stages;
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::ingest:
      return "ingest";
    case Stage::features:
      return "features";
    case Stage::fuse:
      return "fuse";
    case Stage::cluster:
      return "cluster";
    case Stage::project:
      return "project";
    case Stage::report:
      return "report";
  }
  return "?";
}

namespace {

void write_json(const fs::path& path, const json& j) {
  const std::string text = j.dump(2) + "\n";
  byte_io::write_file(path.string(), std::vector<char>(text.begin(), text.end()));
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing artifact " + path.string() + " (run the earlier stages first)");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

struct DocIndex {
  std::vector<std::string> ids;
  std::vector<std::optional<std::string>> labels;
};

DocIndex read_documents(const fs::path& out) {
  const json j = read_json(out / "documents.json");
  DocIndex d;
  d.ids = j.at("ids").get<std::vector<std::string>>();
  for (const auto& l : j.at("labels"))
    d.labels.push_back(l.is_null() ? std::nullopt : std::optional<std::string>(l.get<std::string>()));
  return d;
}

corpus::Vocabulary read_vocabulary(const fs::path& out) {
  const json j = read_json(out / "vocabulary.json");
  return corpus::Vocabulary::from_terms(j.at("terms").get<std::vector<std::string>>(),
                                        j.at("doc_freq").get<std::vector<std::size_t>>(),
                                        j.at("n_docs").get<std::size_t>());
}

std::vector<std::uint32_t> read_assignments(const fs::path& out) {
  return io::read_u32(out / "assignments.mat");
}

json metrics_for(const std::vector<std::uint32_t>& pred,
                 const std::vector<std::optional<std::string>>& gold,
                 const std::vector<std::size_t>& rows) {
  std::vector<std::uint32_t> p;
  std::vector<std::string> g;
  for (auto r : rows)
    if (gold[r]) {
      p.push_back(pred[r]);
      g.push_back(*gold[r]);
    }
  if (p.size() < 2) return nullptr;
  const auto pm = cluster::partition_metrics(p, g);
  return {{"n_labeled", p.size()}, {"nmi", cluster::nmi(p, g)}, {"ari", pm.ari}, {"purity", pm.purity}};
}

void save_autoencoder(const fs::path& dir, const fusion::AutoencoderModel& m) {
  json header = {{"dims", m.dims},
                 {"activation", fusion::to_string(m.hidden)},
                 {"output_activation", "identity"},
                 {"seed", m.seed},
                 {"layers", m.layers.size()}};
  write_json(dir / "autoencoder.json", header);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    io::write_matrix(dir / ("autoencoder.layer" + std::to_string(l) + ".W.mat"), m.layers[l].W);
    io::write_matrix(dir / ("autoencoder.layer" + std::to_string(l) + ".b.mat"),
                     Matrix(m.layers[l].b.transpose()));
  }
}

void save_lda(const fs::path& dir, const std::string& name, const lda::LdaModel& m) {
  json header = {{"K", m.K},         {"alpha", m.alpha},         {"beta", m.beta},
                 {"V", m.V},         {"seed", m.seed},           {"iters_run", m.iters_run},
                 {"n_docs", m.n_docs()}, {"theta_samples", m.theta_samples}};
  write_json(dir / (name + ".json"), header);
  io::write_u32(dir / (name + ".n_kw.mat"), m.n_kw, static_cast<std::uint32_t>(m.K),
                static_cast<std::uint32_t>(m.V));
  io::write_u32(dir / (name + ".n_dk.mat"), m.n_dk, static_cast<std::uint32_t>(m.n_docs()),
                static_cast<std::uint32_t>(m.K));
  std::vector<std::uint32_t> flat;
  for (const auto& z : m.assignments) flat.insert(flat.end(), z.begin(), z.end());
  io::write_u32(dir / (name + ".assignments.mat"), flat, 1, static_cast<std::uint32_t>(flat.size()));
}

}  // namespace

Runner::Runner(RunConfig config) : config_(std::move(config)) {}

const corpus::Corpus& Runner::corpus() {
  if (!corpus_) corpus_ = corpus::load_corpus(config_.corpus);
  return *corpus_;
}

void Runner::record_stage(Stage stage, double seconds) {
  const fs::path path = out() / "timings.json";
  json t = fs::exists(path) ? read_json(path) : json::object();
  t[to_string(stage)] = seconds;
  write_json(path, t);
}

void Runner::run_stage(Stage stage) {
  fs::create_directories(out());
  const fs::path marker = out() / (to_string(stage) + ".partial");
  { std::ofstream(marker) << "stage " << to_string(stage) << " did not complete\n"; }
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (stage) {
      case Stage::ingest:
        ingest();
        break;
      case Stage::features:
        features();
        break;
      case Stage::fuse:
        fuse();
        break;
      case Stage::cluster:
        cluster();
        break;
      case Stage::project:
        project();
        break;
      case Stage::report:
        report();
        break;
    }
  } catch (const std::exception& e) {
    throw Error("stage '" + to_string(stage) + "' failed: " + e.what());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fs::remove(marker);
  record_stage(stage, seconds);
}

void Runner::run_all() {
  for (auto s : all_stages()) run_stage(s);
}

void Runner::ingest() {
  const auto& docs = corpus();
  if (docs.empty()) throw Error("corpus " + config_.corpus.string() + " has no documents");
  const auto tokens = corpus::tokenize_corpus(docs, config_.preprocess, config_.threads);
  const auto vocab = corpus::build_vocabulary(tokens, config_.vocabulary);
  const auto counts = corpus::count_vectorize(tokens, vocab);

  json ids = json::array();
  json labels = json::array();
  for (const auto& d : docs.documents) {
    ids.push_back(d.id);
    labels.push_back(d.label ? json(*d.label) : json(nullptr));
  }
  write_json(out() / "documents.json",
             {{"ids", ids}, {"labels", labels}, {"label_set", docs.label_set}});
  write_json(out() / "vocabulary.json", {{"terms", vocab.terms},
                                         {"doc_freq", vocab.doc_freq},
                                         {"n_docs", vocab.n_docs_fitted},
                                         {"preprocess", canonical_json(config_)["preprocess"]}});
  io::write_counts(out() / "counts.mat", counts);
}

void Runner::features() {
  const fs::path fdir = out() / "features";
  const fs::path mdir = out() / "models";
  fs::create_directories(fdir);
  fs::create_directories(mdir);
  const auto vocab = read_vocabulary(out());
  const auto counts = io::read_counts(out() / "counts.mat");
  json blocks = json::array();

  if (config_.tfidf.enabled || config_.nmf.enabled) {
    const auto model = term::fit_tfidf(counts, config_.tfidf.normalize);
    io::write_matrix(mdir / "tfidf_idf.mat", Matrix(model.idf.transpose()));
    const auto weighted = term::transform_tfidf_sparse(model, counts);
    if (config_.tfidf.enabled) {
      io::write_matrix(fdir / "tfidf.mat", Matrix(weighted));
      blocks.push_back({{"name", "tfidf"}, {"scaling", fusion::to_string(config_.tfidf.scaling)}});
    }
    if (config_.nmf.enabled) {
      term::NmfOptions opt;
      opt.rank = config_.nmf.rank;
      opt.iters = config_.nmf.iters;
      opt.early_stop = config_.nmf.early_stop;
      opt.seed = config_.stage_seed(seed_offset::nmf);
      const auto nmf = term::fit_nmf(weighted, opt);
      io::write_matrix(fdir / "nmf.mat", nmf.W);
      io::write_matrix(mdir / "nmf_H.mat", nmf.H);
      write_json(mdir / "nmf.json", {{"rank", nmf.rank}, {"loss_history", nmf.loss_history}});
      blocks.push_back({{"name", "nmf"}, {"scaling", fusion::to_string(config_.nmf.scaling)}});
    }
  }

  if (config_.lda.enabled) {
    const auto tokens = corpus::token_ids_from_counts(counts);
    for (auto K : config_.lda.k) {
      lda::GibbsOptions opt;
      opt.K = K;
      opt.alpha = config_.lda.alpha.value_or(-1.0);
      opt.beta = config_.lda.beta;
      opt.iters = config_.lda.iters;
      opt.burn_in = config_.lda.burn_in;
      opt.average_theta = config_.lda.average_theta;
      opt.seed = config_.stage_seed(seed_offset::lda);
      const auto model = lda::fit_lda_gibbs(tokens, vocab.size(), opt);
      const std::string name = "lda_k" + std::to_string(K);
      save_lda(mdir, name, model);
      json top = json::array();
      for (std::size_t k = 0; k < K; ++k) top.push_back(lda::lda_top_words(model, k, 10, vocab));
      write_json(mdir / (name + ".top_words.json"), top);
      io::write_matrix(fdir / (name + ".mat"), lda::infer_theta(model));
      blocks.push_back({{"name", name}, {"scaling", fusion::to_string(config_.lda.scaling)}});
    }
  }

  if (config_.embeddings.enabled) {
    const auto docs = read_documents(out());
    std::vector<corpus::Document> stubs;
    for (const auto& id : docs.ids) stubs.push_back({id, "", std::nullopt});
    const auto emb = embeddings::read_embeddings(config_.embeddings.path);
    const auto block =
        embeddings::align_embeddings(emb, corpus::make_corpus(std::move(stubs)), config_.embeddings.normalize);
    io::write_matrix(fdir / "embeddings.mat", block.values);
    write_json(mdir / "embeddings.json", {{"model_tag", emb.model_tag}, {"dim", emb.dim}});
    blocks.push_back({{"name", "embeddings"}, {"scaling", fusion::to_string(config_.embeddings.scaling)}});
  }
  write_json(fdir / "blocks.json", blocks);
}

void Runner::fuse() {
  const json listed = read_json(out() / "features" / "blocks.json");
  std::vector<FeatureBlock> blocks;
  std::vector<fusion::Scaling> modes;
  for (const auto& b : listed) {
    const auto name = b.at("name").get<std::string>();
    blocks.push_back({name, io::read_matrix(out() / "features" / (name + ".mat"))});
    modes.push_back(fusion::parse_scaling(b.at("scaling").get<std::string>()));
  }
  if (blocks.empty()) throw Error("no feature blocks to fuse");

  FusionMode mode = config_.fusion.mode;
  if (mode == FusionMode::automatic)
    mode = blocks.size() == 1 ? FusionMode::concat : FusionMode::autoencoder;

  json info;
  Matrix latent;
  if (config_.fusion.mode == FusionMode::automatic && blocks.size() == 1) {
    info["mode"] = "passthrough";
    info["blocks"] = json::array({blocks.front().name});
    latent = blocks.front().values;
    io::write_matrix(out() / "latent.mat", latent);
  } else {
    const auto fused = fusion::assemble_features(blocks, modes);
    json layout = json::array();
    for (const auto& l : fused.layout)
      layout.push_back({{"name", l.name},
                        {"width", l.width},
                        {"scaling", fusion::to_string(l.mode)},
                        {"mean", to_vector(l.mean)},
                        {"std", to_vector(l.stddev)}});
    info["layout"] = layout;
    if (mode == FusionMode::concat) {
      info["mode"] = "concat";
      latent = fused.matrix;
      io::write_matrix(out() / "latent.mat", latent);
    } else {
      info["mode"] = "autoencoder";
      std::vector<std::size_t> dims{static_cast<std::size_t>(fused.matrix.cols())};
      dims.insert(dims.end(), config_.fusion.hidden.begin(), config_.fusion.hidden.end());
      dims.push_back(config_.fusion.latent);
      dims.insert(dims.end(), config_.fusion.hidden.rbegin(), config_.fusion.hidden.rend());
      dims.push_back(dims.front());
      auto model = fusion::init_autoencoder(dims, config_.stage_seed(seed_offset::ae_init),
                                            config_.fusion.activation);
      fusion::TrainConfig tc;
      tc.learning_rate = config_.fusion.learning_rate;
      tc.epochs = config_.fusion.epochs;
      tc.batch_size = config_.fusion.batch_size;
      tc.seed = config_.stage_seed(seed_offset::ae_shuffle);
      auto trained = fusion::train_autoencoder(std::move(model), fused.matrix, tc);
      save_autoencoder(out() / "models", trained.model);
      info["dims"] = dims;
      info["loss_history"] = trained.loss_history;
      // Latents are persisted in single precision; downstream stages see the
      // rounded values whether they run in-process or from disk.
      latent = fusion::encode(trained.model, fused.matrix).values.cast<float>().cast<double>();
      io::write_matrix(out() / "latent.mat", latent, io::DType::f32);
    }
  }
  info["latent_dim"] = latent.cols();
  write_json(out() / "fusion.json", info);
}

void Runner::cluster() {
  const Matrix latent = io::read_matrix(out() / "latent.mat");
  const auto docs = read_documents(out());
  if (static_cast<std::size_t>(latent.rows()) != docs.ids.size())
    throw Error("latent rows do not match document count");

  std::vector<std::size_t> train_rows, heldout_rows;
  for (std::size_t i = 0; i < docs.ids.size(); ++i) {
    const bool held = config_.eval_split && docs.ids[i].starts_with(config_.eval_split->heldout_id_prefix);
    (held ? heldout_rows : train_rows).push_back(i);
  }
  if (train_rows.empty()) throw Error("eval_split leaves no training documents");

  Matrix train(static_cast<Eigen::Index>(train_rows.size()), latent.cols());
  for (std::size_t i = 0; i < train_rows.size(); ++i)
    train.row(static_cast<Eigen::Index>(i)) = latent.row(static_cast<Eigen::Index>(train_rows[i]));

  cluster::KMeansOptions opt;
  opt.k = config_.cluster.k;
  opt.restarts = config_.cluster.restarts;
  opt.max_iter = config_.cluster.max_iter;
  opt.tol = config_.cluster.tol;
  opt.seed = config_.stage_seed(seed_offset::kmeans);
  const auto result = cluster::kmeans_fit(train, opt);

  std::vector<std::uint32_t> assignments(docs.ids.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i) assignments[train_rows[i]] = result.assignments[i];
  if (!heldout_rows.empty()) {
    Matrix held(static_cast<Eigen::Index>(heldout_rows.size()), latent.cols());
    for (std::size_t i = 0; i < heldout_rows.size(); ++i)
      held.row(static_cast<Eigen::Index>(i)) = latent.row(static_cast<Eigen::Index>(heldout_rows[i]));
    const auto predicted = cluster::kmeans_predict(result.model, held);
    for (std::size_t i = 0; i < heldout_rows.size(); ++i) assignments[heldout_rows[i]] = predicted[i];
  }

  std::vector<std::size_t> sizes(opt.k, 0);
  for (auto a : assignments) ++sizes[a];
  json metrics = {{"train", metrics_for(assignments, docs.labels, train_rows)}};
  if (!heldout_rows.empty()) metrics["heldout"] = metrics_for(assignments, docs.labels, heldout_rows);

  io::write_u32(out() / "assignments.mat", assignments, static_cast<std::uint32_t>(assignments.size()), 1);
  io::write_matrix(out() / "centroids.mat", result.model.centroids);
  write_json(out() / "clusters.json", {{"k", opt.k},
                                       {"inertia", result.model.inertia},
                                       {"n_iter", result.model.n_iter},
                                       {"inertia_history", result.model.inertia_history},
                                       {"sizes", sizes},
                                       {"n_train", train_rows.size()},
                                       {"n_heldout", heldout_rows.size()},
                                       {"metrics", metrics}});
}

void Runner::project() {
  if (!config_.projection.enabled) {
    fs::remove(out() / "projection.csv");
    write_json(out() / "projection.json", {{"enabled", false}});
    return;
  }
  const Matrix latent = io::read_matrix(out() / "latent.mat");
  const auto assignments = read_assignments(out());
  const auto docs = read_documents(out());
  const auto n = static_cast<std::size_t>(latent.rows());

  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  const std::uint64_t seed = config_.stage_seed(seed_offset::tsne);
  if (n > config_.projection.subsample) {
    Rng rng(seed, 1);
    for (std::size_t i = 0; i < config_.projection.subsample; ++i)
      std::swap(rows[i], rows[i + rng.below(n - i)]);
    rows.resize(config_.projection.subsample);
    std::sort(rows.begin(), rows.end());
  }
  Matrix X(static_cast<Eigen::Index>(rows.size()), latent.cols());
  std::vector<std::string> ids;
  std::vector<std::uint32_t> clusters;
  std::vector<std::optional<std::string>> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = latent.row(static_cast<Eigen::Index>(rows[i]));
    ids.push_back(docs.ids[rows[i]]);
    clusters.push_back(assignments[rows[i]]);
    labels.push_back(docs.labels[rows[i]]);
  }

  projection::Projection2D proj;
  if (config_.projection.method == "pca") {
    proj = projection::pca_project(X, 2);
  } else {
    projection::TsneOptions opt;
    opt.perplexity = config_.projection.perplexity;
    opt.iters = config_.projection.iters;
    opt.seed = seed;
    proj = projection::tsne_project(X, opt);
  }
  projection::emit_projection(proj, ids, clusters, labels, out() / "projection.csv");
  std::set<std::uint32_t> distinct(clusters.begin(), clusters.end());
  write_json(out() / "projection.json", {{"enabled", true},
                                         {"method", config_.projection.method},
                                         {"n_points", rows.size()},
                                         {"distinct_clusters", distinct.size()},
                                         {"params", proj.params},
                                         {"kl_iterations", proj.kl_iterations},
                                         {"kl_history", proj.kl_history}});
}

void Runner::report() {
  const auto& docs = corpus();
  const auto index = read_documents(out());
  if (index.ids.size() != docs.size()) throw Error("corpus changed since ingest");
  for (std::size_t i = 0; i < docs.size(); ++i)
    if (docs.documents[i].id != index.ids[i]) throw Error("corpus changed since ingest");

  const auto vocab = read_vocabulary(out());
  const auto counts = io::read_counts(out() / "counts.mat");
  const auto assignments = read_assignments(out());
  const json clusters = read_json(out() / "clusters.json");
  const auto k = clusters.at("k").get<std::size_t>();

  const auto topics = topics::cluster_top_terms(counts, assignments, vocab, config_.report.top_terms, k);
  json tj = json::array();
  for (const auto& c : topics.clusters) {
    json terms = json::array();
    for (const auto& t : c) terms.push_back({{"term", t.term}, {"score", t.score}});
    tj.push_back(terms);
  }
  write_json(out() / "topics.json", tj);
  emit_cluster_report(docs, assignments, k, topics, config_.report.samples_per_cluster,
                      config_.stage_seed(seed_offset::report), out() / "report.md",
                      config_.report.snippet_chars);

  json summary;
  summary["config_hash"] = config_hash(config_);
  summary["config"] = canonical_json(config_);
  const json fusion_info = read_json(out() / "fusion.json");
  const json projection_info =
      fs::exists(out() / "projection.json") ? read_json(out() / "projection.json") : json(nullptr);
  json metrics = {{"n_documents", docs.size()},
                  {"n_labels", docs.label_set.size()},
                  {"vocab_size", vocab.size()},
                  {"fusion_mode", fusion_info.at("mode")},
                  {"latent_dim", fusion_info.at("latent_dim")},
                  {"k", k},
                  {"inertia", clusters.at("inertia")},
                  {"cluster_sizes", clusters.at("sizes")},
                  {"nonempty_clusters",
                   std::count_if(clusters.at("sizes").begin(), clusters.at("sizes").end(),
                                 [](const json& s) { return s.get<std::size_t>() > 0; })},
                  {"clustering", clusters.at("metrics")}};
  if (fusion_info.contains("loss_history")) metrics["final_reconstruction_mse"] = fusion_info["loss_history"].back();
  if (!projection_info.is_null() && projection_info.value("enabled", false)) {
    metrics["projection"] = {{"method", projection_info["method"]},
                             {"n_points", projection_info["n_points"]},
                             {"distinct_clusters", projection_info["distinct_clusters"]}};
    if (!projection_info["kl_history"].empty()) {
      metrics["projection"]["kl_first"] = projection_info["kl_history"].front();
      metrics["projection"]["kl_final"] = projection_info["kl_history"].back();
    }
  }
  summary["metrics"] = metrics;
  const fs::path timings = out() / "timings.json";
  summary["timings_seconds"] = fs::exists(timings) ? read_json(timings) : json::object();
  write_json(out() / "summary.json", summary);
}

}  // namespace fame::pipeline
