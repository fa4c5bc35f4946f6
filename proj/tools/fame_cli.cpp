// fame: command-line front end for the topic modeling pipeline.

#include "fame/config.hpp"
#include "fame/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct SharedFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_shared(CLI::App* cmd, SharedFlags& flags) {
  cmd->add_option("--config", flags.config, "RunConfig JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out, "Output directory (overrides output_dir)");
  cmd->add_option("--seed", flags.seed, "Global seed (overrides seed)");
  cmd->add_option("--threads", flags.threads, "Worker threads (overrides threads)")->check(CLI::PositiveNumber);
}

fame::pipeline::RunConfig resolve(const SharedFlags& flags) {
  auto config = fame::pipeline::load_config(flags.config);
  if (!flags.out.empty()) config.output_dir = flags.out;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.threads) config.threads = *flags.threads;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  using fame::pipeline::Stage;
  CLI::App app{"FAME topic modeling and document clustering pipeline"};
  app.require_subcommand(1);
  SharedFlags flags;

  struct Command {
    const char* name;
    const char* help;
    std::optional<Stage> stage;
  };
  const Command commands[] = {
      {"ingest", "Load the corpus, build the vocabulary and count matrix", Stage::ingest},
      {"features", "Compute the enabled feature blocks (tfidf, nmf, lda, embeddings)", Stage::features},
      {"fuse", "Assemble blocks and train the fusion autoencoder", Stage::fuse},
      {"cluster", "K-Means on the fused representation, with metrics", Stage::cluster},
      {"project", "2-D projection CSV (t-SNE or PCA)", Stage::project},
      {"report", "Cluster topics, Markdown report and summary JSON", Stage::report},
      {"run", "Run every stage in order", std::nullopt},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_shared(sub, flags);
    subs.emplace_back(sub, &c);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [sub, cmd] : subs) {
      if (!sub->parsed()) continue;
      fame::pipeline::Runner runner(resolve(flags));
      if (cmd->stage) {
        runner.run_stage(*cmd->stage);
      } else {
        runner.run_all();
      }
      std::cout << cmd->name << ": done, outputs in " << runner.out().string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "fame: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
