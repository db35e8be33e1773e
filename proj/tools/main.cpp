#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <thread>

#include "commands.hpp"
#include "mqe/error.hpp"
#include "mqe/parallel.hpp"

using namespace mqe;
using mqe::cli::RunConfig;

namespace {

int report_error(std::string_view kind, const std::string& message, int code) {
  const json j = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
  return code;
}

unsigned default_threads() {
  if (const char* env = std::getenv("MEASURE_EMBED_THREADS")) {
    try {
      const long t = std::stol(env);
      if (t >= 1) return static_cast<unsigned>(t);
    } catch (const std::exception&) {
    }
    fail(ErrorKind::invalid_argument, std::string("MEASURE_EMBED_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

void absolutize(std::string& path) {
  if (!path.empty()) path = fs::absolute(path).lexically_normal().string();
}

void add_input(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--dataset", cfg.dataset, "Manifest file or dataset directory");
}

void add_quantize(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--K", cfg.K, "Number of quantization atoms")->capture_default_str();
  sub->add_option("--scheme", cfg.scheme, "each, mean or random")->capture_default_str();
  sub->add_option("--restarts", cfg.restarts, "Lloyd restarts")->capture_default_str();
  sub->add_flag("--subsample,!--no-subsample", cfg.subsample, "Run mean-measure Lloyd on a subsample (default) or on the full mean measure");
  sub->add_option("--subsample-size", cfg.subsample_size, "Subsample size (default: mean measure size)");
}

void add_embedding(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--embedding", cfg.embedding, "lot, kme, rff or nystrom")->capture_default_str();
  sub->add_option("--kernel", cfg.kernel, "rbf:<sigma>, rbf:median, linear or linsq")->capture_default_str();
  sub->add_option("--reference", cfg.reference, "LOT reference: cube, ball or file")->capture_default_str();
  sub->add_option("--reference-file", cfg.reference_file, "Point CSV for --reference file");
  sub->add_option("--m0", cfg.m0, "LOT reference size")->capture_default_str();
  sub->add_option("--features", cfg.features, "Random Fourier frequencies")->capture_default_str();
  sub->add_flag("--rff-raw", cfg.rff_raw, "Unscaled random Fourier features");
  sub->add_option("--landmarks", cfg.landmarks, "Nystrom landmarks per measure")->capture_default_str();
}

void add_synth(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--params", cfg.params, "Explicit parameter JSON instead of the default generator");
  sub->add_option("--N", cfg.N, "Number of measures")->capture_default_str();
  sub->add_option("--d", cfg.d, "Dimension")->capture_default_str();
  sub->add_option("--m", cfg.m, "Points per measure")->capture_default_str();
  sub->add_option("--classes", cfg.classes, "Number of classes")->capture_default_str();
  sub->add_option("--min-center-distance", cfg.min_center_distance, "Class center separation")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized embeddings of families of point clouds"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  unsigned threads = 0;
  std::string replay_file;

  app.add_option("--threads", threads, "Worker threads (env MEASURE_EMBED_THREADS, default 1)");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output directory")->required();
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic shift-scaling dataset");
  common(synth);
  add_synth(synth, cfg);

  auto* quantize = app.add_subcommand("quantize", "Quantize every measure of a dataset");
  common(quantize);
  add_input(quantize, cfg);
  add_quantize(quantize, cfg);

  for (auto [name, help] : {std::pair{"embed", "Embed measures and dump the embeddings"},
                            std::pair{"gram", "Gram matrix of the embedded measures"}}) {
    auto* sub = app.add_subcommand(name, help);
    common(sub);
    add_input(sub, cfg);
    sub->add_option("--family", cfg.family, "Quantized family directory");
    add_embedding(sub, cfg);
  }

  auto* pca = app.add_subcommand("pca", "Principal components from a Gram matrix");
  common(pca);
  pca->add_option("--gram", cfg.gram, "Gram matrix CSV")->required();
  pca->add_option("--q", cfg.q, "Components to keep")->capture_default_str();
  pca->add_flag("--centered", cfg.centered, "Double-center the Gram matrix first");

  auto* classify = app.add_subcommand("classify", "Quantize, embed, reduce with PCA and classify with LDA");
  common(classify);
  add_input(classify, cfg);
  add_quantize(classify, cfg);
  add_embedding(classify, cfg);
  classify->add_option("--q", cfg.q, "PCA components")->capture_default_str();
  classify->add_flag("--centered", cfg.centered, "Centered PCA");
  classify->add_option("--train-frac", cfg.train_frac, "Training fraction")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Dispersion, class statistics and bound checks");
  common(stats);
  add_input(stats, cfg);
  stats->add_option("--family", cfg.family, "Quantized family directory");
  stats->add_option("--lambda", cfg.lambdas, "Dispersion bound parameters")->capture_default_str();
  stats->add_option("--kernel", cfg.kernel, "Kernel for the MMD bound")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Quantization error, Gram error and timings over a K grid");
  common(bench);
  add_synth(bench, cfg);
  bench->add_option("--K-grid", cfg.K_grid, "Increasing list of K")->capture_default_str();
  bench->add_option("--schemes", cfg.schemes, "Schemes to compare")->capture_default_str();
  bench->add_option("--restarts", cfg.restarts, "Lloyd restarts")->capture_default_str();
  bench->add_flag("--subsample,!--no-subsample", cfg.subsample, "Run mean-measure Lloyd on a subsample (default) or on the full mean measure");
  bench->add_option("--subsample-size", cfg.subsample_size, "Subsample size");
  bench->add_option("--reference", cfg.reference, "LOT reference: cube or ball")->capture_default_str();
  bench->add_option("--m0", cfg.m0, "LOT reference size")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Re-run a command from its run.json");
  replay->add_option("run", replay_file, "run.json of a previous run")->required();
  replay->add_option("--out", cfg.out, "Output directory (default: the recorded one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  try {
    set_thread_count(threads > 0 ? threads : default_threads());
    if (replay->parsed()) {
      const std::string out = cfg.out;
      cfg = RunConfig::from_json(read_json(replay_file));
      if (!out.empty()) cfg.out = out;
    } else {
      cfg.subcommand = app.get_subcommands().front()->get_name();
    }
    for (std::string* p : {&cfg.dataset, &cfg.family, &cfg.params, &cfg.gram, &cfg.reference_file, &cfg.out})
      absolutize(*p);
    mqe::cli::run(cfg);
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), 1);
  } catch (const fs::filesystem_error& e) {
    return report_error("io", e.what(), 1);
  } catch (const json::exception& e) {
    return report_error("parse", e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}
