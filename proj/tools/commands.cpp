#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "mqe/error.hpp"
#include "mqe/family_io.hpp"
#include "mqe/kme.hpp"
#include "mqe/lda.hpp"
#include "mqe/lot.hpp"
#include "mqe/ot.hpp"
#include "mqe/pca.hpp"
#include "mqe/quantize.hpp"
#include "mqe/stats.hpp"
#include "mqe/synth.hpp"

namespace mqe::cli {

namespace {

// Stream ids under the run seed.
constexpr std::uint64_t kQuantizeStream = 0;
constexpr std::uint64_t kReferenceStream = 1;
constexpr std::uint64_t kRffStream = 2;
constexpr std::uint64_t kNystromStream = 3;
constexpr std::uint64_t kSplitStream = 4;
constexpr std::uint64_t kKernelStream = 5;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

fs::path out_dir(const RunConfig& cfg) { return fs::path(cfg.out); }

Dataset load_input(const RunConfig& cfg) {
  require(!cfg.dataset.empty(), ErrorKind::invalid_argument, "--dataset is required");
  fs::path p(cfg.dataset);
  if (fs::is_directory(p)) p /= "manifest.json";
  return load_dataset(p);
}

LloydParams lloyd_params(const RunConfig& cfg) {
  LloydParams p;
  p.restarts = cfg.restarts;
  return p;
}

std::optional<std::size_t> subsample_size(const RunConfig& cfg, const Dataset& ds) {
  if (!cfg.subsample) return std::nullopt;
  return cfg.subsample_size > 0 ? cfg.subsample_size : default_mean_subsample(ds);
}

QuantizedFamily quantize(const RunConfig& cfg, const Dataset& ds) {
  require(cfg.K >= 1, ErrorKind::invalid_argument, "K must be >= 1");
  const RngStream rng(cfg.seed, kQuantizeStream);
  switch (parse_scheme(cfg.scheme)) {
    case Scheme::per_measure: return quantize_each(ds, cfg.K, rng, lloyd_params(cfg));
    case Scheme::mean_measure:
      return quantize_mean(ds, cfg.K, rng, lloyd_params(cfg), subsample_size(cfg, ds));
    case Scheme::random_subset: return random_subset_quantize(ds, cfg.K, rng);
  }
  fail(ErrorKind::invalid_argument, "unknown scheme");
}

// The measures a command works on: quantized ones when --family is given,
// otherwise the dataset itself.
struct Family {
  std::vector<std::string> ids;
  std::optional<std::vector<std::string>> labels;
  std::vector<DiscreteMeasure> measures;
};

Family load_family(const RunConfig& cfg) {
  Family f;
  std::optional<Dataset> ds;
  if (!cfg.dataset.empty()) ds = load_input(cfg);
  if (!cfg.family.empty()) {
    f.measures = load_quantized_family(cfg.family).measures();
  } else {
    require(ds.has_value(), ErrorKind::invalid_argument, "--dataset or --family is required");
    f.measures = ds->measures();
  }
  if (ds) {
    require(ds->size() == f.measures.size(), ErrorKind::dimension_mismatch,
            "dataset has " + std::to_string(ds->size()) + " measures but the family has " +
                std::to_string(f.measures.size()));
    f.ids = ds->ids();
    f.labels = ds->labels();
  } else {
    for (std::size_t i = 0; i < f.measures.size(); ++i) f.ids.push_back("m" + std::to_string(i));
  }
  return f;
}

Kernel resolve_kernel(const RunConfig& cfg, const std::vector<DiscreteMeasure>& measures) {
  if (cfg.kernel == "rbf:median") {
    RngStream rng(cfg.seed, kKernelStream);
    return Kernel::rbf(median_heuristic(Dataset(measures), std::size_t{1} << 20, rng));
  }
  return Kernel::parse(cfg.kernel);
}

ReferenceMeasure resolve_reference(const RunConfig& cfg, Index d) {
  const ReferenceKind kind = parse_reference_kind(cfg.reference);
  if (kind == ReferenceKind::external_file) {
    require(!cfg.reference_file.empty(), ErrorKind::invalid_argument,
            "--reference file needs --reference-file");
    return reference_from_file(cfg.reference_file, d);
  }
  require(cfg.m0 >= 1, ErrorKind::invalid_argument, "m0 must be >= 1");
  RngStream rng(cfg.seed, kReferenceStream);
  return make_reference(kind, d, cfg.m0, rng);
}

std::string safe_name(const std::string& id) {
  std::string s = id;
  for (char& c : s)
    if (c == '/' || c == '\\' || c == ':') c = '_';
  return s;
}

// Embeds every measure and returns the Gram matrix. Writes the embedding
// artifacts into dir when it is set.
Matrix embed_family(const RunConfig& cfg, const Family& f, const std::optional<fs::path>& dir) {
  const Index d = f.measures.front().dim();
  if (cfg.embedding == "lot") {
    const ReferenceMeasure ref = resolve_reference(cfg, d);
    const auto emb = lot_embed_all(f.measures, ref);
    if (dir) {
      save_reference(ref, *dir);
      fs::create_directories(*dir / "embeddings");
      for (std::size_t i = 0; i < emb.size(); ++i)
        save_matrix(emb[i].values, *dir / "embeddings" / (safe_name(f.ids[i]) + ".csv"));
    }
    return lot_gram(emb);
  }
  if (cfg.embedding == "kme") {
    const Kernel k = resolve_kernel(cfg, f.measures);
    if (dir) write_json({{"kernel", k.spec()}}, *dir / "kernel.json");
    return kme_gram(f.measures, k);
  }
  if (cfg.embedding == "rff") {
    const Kernel k = resolve_kernel(cfg, f.measures);
    RngStream rng(cfg.seed, kRffStream);
    const RffMap map = rff_map(k, d, cfg.features, rng, cfg.rff_raw);
    const Matrix features = rff_embed_all(f.measures, map);
    if (dir) {
      save_matrix(features, *dir / "features.csv");
      save_matrix(map.frequencies, *dir / "rff_frequencies.csv");
      write_json({{"sigma", map.sigma}, {"s", cfg.features}, {"seed", map.seed}, {"raw", cfg.rff_raw}},
                 *dir / "rff.json");
    }
    return features * features.transpose();
  }
  if (cfg.embedding == "nystrom") {
    const Kernel k = resolve_kernel(cfg, f.measures);
    const RngStream rng(cfg.seed, kNystromStream);
    std::vector<NystromKme> fits;
    for (std::size_t i = 0; i < f.measures.size(); ++i) {
      RngStream sub = rng.substream(i);
      fits.push_back(nystrom_fit(f.measures[i], cfg.landmarks, k, std::nullopt, sub));
    }
    if (dir) {
      fs::create_directories(*dir / "nystrom");
      for (std::size_t i = 0; i < fits.size(); ++i) {
        const std::string base = safe_name(f.ids[i]);
        save_matrix(fits[i].landmarks, *dir / "nystrom" / (base + "_landmarks.csv"));
        save_matrix(fits[i].alpha, *dir / "nystrom" / (base + "_alpha.csv"));
      }
    }
    return nystrom_gram(fits, k);
  }
  fail(ErrorKind::invalid_argument,
       "unknown embedding '" + cfg.embedding + "' (expected lot, kme, rff or nystrom)");
}

Matrix select(const Matrix& g, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(static_cast<Index>(r), static_cast<Index>(c)) = g(rows[r], cols[c]);
  return out;
}

// Scores of held-out points against a PCA fitted on the training Gram.
Matrix project(const PcaResult& pca, const Matrix& train_gram, const Matrix& cross) {
  if (!pca.centered) return cross * pca.coefficients;
  const double n = static_cast<double>(train_gram.rows());
  const Vector col_mean = train_gram.colwise().sum().transpose() / n;
  const double all_mean = train_gram.sum() / (n * n);
  Matrix c = cross;
  const Vector row_mean = cross.rowwise().sum() / n;
  c.rowwise() -= col_mean.transpose();
  c.colwise() -= row_mean;
  c.array() += all_mean;
  return c * pca.coefficients;
}

json report_json(const BoundReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound},
                      {"relation", c.upper ? "<=" : ">="}, {"slack", c.slack()}});
  return {{"holds", r.holds()}, {"min_slack", r.checks.empty() ? 0.0 : r.min_slack()}, {"checks", checks}};
}

double relative_error(const Matrix& approx, const Matrix& truth) {
  const double scale = truth.norm();
  return scale > 0.0 ? (approx - truth).norm() / scale : (approx - truth).norm();
}

ShiftScalingParams synth_params(const RunConfig& cfg) {
  if (!cfg.params.empty()) {
    auto p = ShiftScalingParams::from_json(read_json(cfg.params));
    p.validate();
    return p;
  }
  return default_params(cfg.N, cfg.d, cfg.m, cfg.classes, cfg.seed, cfg.min_center_distance);
}

}  // namespace

void cmd_synth(const RunConfig& cfg) {
  const ShiftScalingParams p = synth_params(cfg);
  const Dataset ds = gen_dataset(p);
  save_dataset(ds, out_dir(cfg));
  write_json(p.to_json(), out_dir(cfg) / "params.json");
  save_matrix(true_lot_gram(p), out_dir(cfg) / "true_gram_lot.csv");
  save_matrix(true_kme_gram(p), out_dir(cfg) / "true_gram_kme.csv");
}

void cmd_quantize(const RunConfig& cfg) {
  const Dataset ds = load_input(cfg);
  save_quantized_family(quantize(cfg, ds), out_dir(cfg));
}

void cmd_embed(const RunConfig& cfg) {
  const Family f = load_family(cfg);
  save_matrix(embed_family(cfg, f, out_dir(cfg)), out_dir(cfg) / "gram.csv");
}

void cmd_gram(const RunConfig& cfg) {
  const Family f = load_family(cfg);
  save_matrix(embed_family(cfg, f, std::nullopt), out_dir(cfg) / "gram.csv");
}

void cmd_pca(const RunConfig& cfg) {
  require(!cfg.gram.empty(), ErrorKind::invalid_argument, "--gram is required");
  const Matrix g = load_matrix(cfg.gram);
  const PcaResult r = gram_pca(g, cfg.q, cfg.centered);
  save_matrix(r.scores, out_dir(cfg) / "scores.csv");
  save_matrix(r.eigenvalues, out_dir(cfg) / "eigenvalues.csv");
  save_matrix(r.coefficients, out_dir(cfg) / "coefficients.csv");
}

void cmd_classify(const RunConfig& cfg) {
  const Dataset ds = load_input(cfg);
  require(ds.labels().has_value(), ErrorKind::invalid_argument, "classification needs labelled measures");
  const auto& labels = *ds.labels();
  const Index n = static_cast<Index>(ds.size());
  RngStream split_rng(cfg.seed, kSplitStream);
  const Split split = train_test_split(n, cfg.train_frac, split_rng, labels);
  require(!split.test.empty(), ErrorKind::invalid_argument,
          "empty test split (train fraction " + format_double(cfg.train_frac) + " of " + std::to_string(n) + " measures)");
  require(!split.train.empty(), ErrorKind::invalid_argument, "empty training split");

  const auto t0 = Clock::now();
  const QuantizedFamily qf = quantize(cfg, ds);
  const double quantize_ms = ms_since(t0);
  const auto t1 = Clock::now();
  Family f;
  f.ids = ds.ids();
  f.labels = ds.labels();
  f.measures = qf.measures();
  const Matrix gram = embed_family(cfg, f, std::nullopt);
  const double embed_ms = ms_since(t1);

  const auto t2 = Clock::now();
  const Matrix train_gram = select(gram, split.train, split.train);
  const PcaResult pca = gram_pca(train_gram, cfg.q, cfg.centered);
  const Matrix test_scores = project(pca, train_gram, select(gram, split.test, split.train));
  std::vector<std::string> train_labels;
  for (Index i : split.train) train_labels.push_back(labels[static_cast<std::size_t>(i)]);
  const LdaModel model = lda_fit(pca.scores, train_labels);
  const auto predicted = lda_predict(model, test_scores);
  const double classify_ms = ms_since(t2);

  std::map<std::string, std::pair<int, int>> per_class;
  int correct = 0;
  std::ostringstream csv;
  csv << "id,label,predicted\n";
  for (std::size_t t = 0; t < split.test.size(); ++t) {
    const auto i = static_cast<std::size_t>(split.test[t]);
    const bool ok = predicted[t] == labels[i];
    correct += ok;
    auto& slot = per_class[labels[i]];
    slot.first += ok;
    slot.second += 1;
    csv << ds.ids()[i] << ',' << labels[i] << ',' << predicted[t] << '\n';
  }
  json classes = json::object();
  for (const auto& [cls, counts] : per_class)
    classes[cls] = {{"correct", counts.first}, {"total", counts.second},
                    {"accuracy", static_cast<double>(counts.first) / counts.second}};
  json train_ids = json::array(), test_ids = json::array();
  for (Index i : split.train) train_ids.push_back(ds.ids()[static_cast<std::size_t>(i)]);
  for (Index i : split.test) test_ids.push_back(ds.ids()[static_cast<std::size_t>(i)]);
  write_json({{"accuracy", static_cast<double>(correct) / static_cast<double>(split.test.size())},
              {"per_class", classes},
              {"train_ids", train_ids},
              {"test_ids", test_ids},
              {"stratified", split.stratified},
              {"eps_K", qf.eps_K},
              {"seed", cfg.seed}},
             out_dir(cfg) / "report.json");
  write_text(csv.str(), out_dir(cfg) / "predictions.csv");
  write_json({{"wall_time_quantize_ms", quantize_ms},
              {"wall_time_embed_ms", embed_ms},
              {"wall_time_classify_ms", classify_ms}},
             out_dir(cfg) / "timing.json");
}

void cmd_stats(const RunConfig& cfg) {
  std::optional<Dataset> ds;
  if (!cfg.dataset.empty()) ds = load_input(cfg);
  std::optional<QuantizedFamily> qf;
  if (!cfg.family.empty()) qf = load_quantized_family(cfg.family);
  require(ds || qf, ErrorKind::invalid_argument, "--dataset or --family is required");
  if (ds && qf)
    require(ds->size() == qf->size(), ErrorKind::dimension_mismatch, "dataset and family differ in size");

  json out = json::object();
  std::optional<Matrix> dmu, dnu;
  if (ds) {
    dmu = pairwise_w2sq(ds->measures());
    save_matrix(*dmu, out_dir(cfg) / "pairwise_mu.csv");
    out["dispersion_mu"] = dispersion_from(*dmu);
  }
  if (qf) {
    dnu = pairwise_w2sq(*qf);
    save_matrix(*dnu, out_dir(cfg) / "pairwise_nu.csv");
    out["dispersion_nu"] = dispersion_from(*dnu);
    out["eps_K"] = qf->eps_K;
    out["K"] = qf->K;
    out["scheme"] = to_string(qf->scheme);
  }
  if (ds && qf) {
    const auto nu = qf->measures();
    double total = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) total += w2sq(ds->measure(i), nu[i]);
    out["mean_w2sq_to_quantized"] = total / static_cast<double>(nu.size());
  }

  const auto labels = ds ? ds->labels() : std::nullopt;
  if (labels) {
    json classes = json::object();
    const auto list = class_list(*labels);
    for (const auto& l : list) {
      json c = json::object();
      if (dmu) c["wcss_mu"] = wcss(*dmu, *labels, l);
      if (dnu) c["wcss_nu"] = wcss(*dnu, *labels, l);
      classes[l] = c;
    }
    out["classes"] = classes;
    json between = json::array();
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        json e = {{"classes", {list[a], list[b]}}};
        if (dmu) e["bcss_mu"] = bcss(*dmu, *labels, list[a], list[b]);
        if (dnu) e["bcss_nu"] = bcss(*dnu, *labels, list[a], list[b]);
        between.push_back(e);
      }
    out["between"] = between;
  }

  if (ds && qf) {
    json bounds = json::object();
    bounds["dispersion"] = report_json(dispersion_bound_check(*dmu, *dnu, qf->eps_K, cfg.lambdas));
    if (labels) bounds["classes"] = report_json(class_bound_check(*dmu, *dnu, *labels, qf->eps_K));
    const Kernel k = resolve_kernel(cfg, ds->measures());
    if (k.kind != KernelKind::linear_plus_square)
      bounds["mmd"] = report_json(mmd_bound_check(ds->measures(), qf->measures(), k, qf->eps_K));
    if (qf->shared_support()) {
      RngStream unused(cfg.seed);
      const Vector diam = cell_diameters(mean_measure(*ds, std::nullopt, unused), qf->centers.front());
      bounds["pairwise"] = report_json(pairwise_bound_check(*dmu, *dnu, diam.maxCoeff()));
    }
    out["bounds"] = bounds;
  }
  write_json(out, out_dir(cfg) / "stats.json");
}

void cmd_bench(const RunConfig& cfg) {
  require(!cfg.K_grid.empty(), ErrorKind::invalid_argument, "K grid is empty");
  const ShiftScalingParams p = synth_params(cfg);
  const Dataset ds = gen_dataset(p);
  const Matrix truth_lot = true_lot_gram(p);
  const Matrix truth_kme = true_kme_gram(p);
  const ReferenceMeasure ref = resolve_reference(cfg, p.d);
  const Kernel linsq = Kernel::linear_plus_square();

  std::ostringstream csv;
  csv << "K,scheme,eps_K,gram_err_lot,gram_err_kme,wall_time_quantize_ms,wall_time_embed_ms\n";
  for (const auto& name : cfg.schemes) {
    const Scheme scheme = parse_scheme(name);
    NestedQuantizer nq(ds, scheme, RngStream(cfg.seed, kQuantizeStream), lloyd_params(cfg), subsample_size(cfg, ds));
    for (Index K : cfg.K_grid) {
      const auto t0 = Clock::now();
      const QuantizedFamily qf = nq.next(K);
      const double quantize_ms = ms_since(t0);
      const auto t1 = Clock::now();
      const auto measures = qf.measures();
      const Matrix g_lot = lot_gram(lot_embed_all(measures, ref));
      const Matrix g_kme = kme_gram(measures, linsq);
      const double embed_ms = ms_since(t1);
      csv << K << ',' << to_string(scheme) << ',' << format_double(qf.eps_K) << ','
          << format_double(relative_error(g_lot, truth_lot)) << ','
          << format_double(relative_error(g_kme, truth_kme)) << ',' << format_double(quantize_ms) << ','
          << format_double(embed_ms) << '\n';
    }
  }
  write_text(csv.str(), out_dir(cfg) / "bench.csv");
}

void run(const RunConfig& cfg) {
  require(!cfg.out.empty(), ErrorKind::invalid_argument, "--out is required");
  fs::create_directories(out_dir(cfg));
  write_json(cfg.to_json(), out_dir(cfg) / "run.json");
  const std::string& s = cfg.subcommand;
  if (s == "synth") return cmd_synth(cfg);
  if (s == "quantize") return cmd_quantize(cfg);
  if (s == "embed") return cmd_embed(cfg);
  if (s == "gram") return cmd_gram(cfg);
  if (s == "pca") return cmd_pca(cfg);
  if (s == "classify") return cmd_classify(cfg);
  if (s == "stats") return cmd_stats(cfg);
  if (s == "bench") return cmd_bench(cfg);
  fail(ErrorKind::invalid_argument, "unknown subcommand '" + s + "'");
}

}  // namespace mqe::cli
