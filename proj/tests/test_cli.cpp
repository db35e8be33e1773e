#include <doctest.h>

#include <map>

#include "cli_runner.hpp"
#include "mqe/io.hpp"
#include "mqe/synth.hpp"
#include "temp_dir.hpp"

using namespace mqe;

namespace {

std::vector<std::string> args_with(std::vector<std::string> base, const fs::path& out) {
  base.push_back("--out");
  base.push_back(out.string());
  return base;
}

void require_ok(const CliResult& r) {
  INFO(r.err);
  REQUIRE(r.status == 0);
}

// Two measures: all points at 0 and all points at 1.
ShiftScalingParams toy_params() {
  ShiftScalingParams p;
  p.N = 2;
  p.d = 1;
  p.m = 5;
  p.seed = 11;
  p.shifts = {Vector::Zero(1), Vector::Ones(1)};
  p.roots = {Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  p.labels = std::vector<std::string>{"zero", "one"};
  return p;
}

}  // namespace

TEST_CASE("toy pipeline has zero quantization error") {
  TempDir tmp("cli_toy");
  const fs::path dir = tmp.path();
  write_json(toy_params().to_json(), dir / "toy.json");
  require_ok(run_mqe(args_with({"synth", "--params", (dir / "toy.json").string()}, dir / "data"), dir));
  require_ok(run_mqe(args_with({"quantize", "--dataset", (dir / "data").string(), "--scheme", "mean", "--K", "2"},
                               dir / "q"),
                     dir));
  require_ok(run_mqe(
      args_with({"stats", "--dataset", (dir / "data").string(), "--family", (dir / "q").string()}, dir / "s"), dir));
  const json stats = read_json(dir / "s" / "stats.json");
  CHECK(stats["eps_K"].get<double>() == 0.0);
  CHECK(stats["mean_w2sq_to_quantized"].get<double>() == 0.0);
  CHECK(stats["dispersion_mu"].get<double>() == 0.5);
  CHECK(stats["dispersion_nu"].get<double>() == 0.5);
  CHECK(stats["bounds"]["dispersion"]["holds"].get<bool>());
  for (const char* sub : {"data", "q", "s"}) CHECK(fs::exists(dir / sub / "run.json"));
}

TEST_CASE("contract violations give a JSON error and a nonzero exit") {
  TempDir tmp("cli_err");
  const fs::path dir = tmp.path();
  require_ok(run_mqe(args_with({"synth", "--N", "6", "--m", "50"}, dir / "data"), dir));

  const auto empty_test = run_mqe(
      args_with({"classify", "--dataset", (dir / "data").string(), "--train-frac", "1.0", "--K", "4"}, dir / "c"), dir);
  CHECK(empty_test.status != 0);
  const json e = json::parse(empty_test.err);
  CHECK(e["error"]["kind"] == "invalid_argument");

  const auto missing = run_mqe(args_with({"quantize", "--dataset", (dir / "nope.json").string()}, dir / "q"), dir);
  CHECK(missing.status != 0);
  CHECK(json::parse(missing.err)["error"]["kind"] == "io");

  const auto too_many = run_mqe(args_with({"quantize", "--dataset", (dir / "data").string(), "--K", "51", "--scheme", "each"}, dir / "q"), dir);
  CHECK(too_many.status != 0);
  CHECK(json::parse(too_many.err)["error"]["kind"] == "support_too_small");

  const auto bad_flag = run_mqe({"quantize", "--bogus"}, dir);
  CHECK(bad_flag.status != 0);
  CHECK(json::parse(bad_flag.err)["error"].contains("message"));

  const auto bad_env = run_mqe(args_with({"synth", "--N", "2"}, dir / "x"), dir, "MEASURE_EMBED_THREADS=zero");
  CHECK(bad_env.status != 0);
  CHECK(json::parse(bad_env.err)["error"]["kind"] == "invalid_argument");
}

TEST_CASE("bench columns and quantization error along the K grid") {
  TempDir tmp("cli_bench");
  const fs::path dir = tmp.path();
  require_ok(run_mqe(args_with({"bench", "--N", "12", "--m", "400", "--m0", "100", "--K-grid", "4", "8", "16", "32"},
                               dir / "b"),
                     dir));
  std::istringstream in(slurp(dir / "b" / "bench.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "K,scheme,eps_K,gram_err_lot,gram_err_kme,wall_time_quantize_ms,wall_time_embed_ms");
  std::map<std::string, double> last;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ls(line);
    std::string k, scheme, eps;
    std::getline(ls, k, ',');
    std::getline(ls, scheme, ',');
    std::getline(ls, eps, ',');
    const double e = std::stod(eps);
    CHECK(e > 0.0);
    if (last.count(scheme)) CHECK(e <= last[scheme]);
    last[scheme] = e;
  }
  CHECK(rows == 8);
}

TEST_CASE("replay reproduces outputs for any thread count") {
  TempDir tmp("cli_replay");
  const fs::path dir = tmp.path();
  require_ok(run_mqe(args_with({"synth", "--N", "9", "--m", "200", "--seed", "5"}, dir / "data"), dir));
  require_ok(run_mqe(args_with({"--threads", "4", "quantize", "--dataset", (dir / "data").string(), "--scheme", "each",
                                "--K", "6", "--restarts", "2"},
                               dir / "q1"),
                     dir));
  require_ok(run_mqe({"replay", (dir / "q1" / "run.json").string(), "--out", (dir / "q2").string(), "--threads", "1"}, dir));
  for (const char* f : {"weights.csv", "centers_0.csv", "centers_8.csv", "meta.json"})
    CHECK(slurp(dir / "q1" / f) == slurp(dir / "q2" / f));

  for (const char* kind : {"lot", "kme", "rff", "nystrom"}) {
    const std::vector<std::string> base{"embed", "--dataset", (dir / "data").string(), "--family", (dir / "q1").string(),
                                        "--embedding", kind, "--m0", "50", "--kernel", "rbf:median",
                                        "--features", "16", "--landmarks", "4"};
    auto a = base, b = base;
    a.insert(a.begin(), {"--threads", "1"});
    b.insert(b.begin(), {"--threads", "4"});
    require_ok(run_mqe(args_with(a, dir / "e1"), dir));
    require_ok(run_mqe(args_with(b, dir / "e2"), dir));
    CHECK(slurp(dir / "e1" / "gram.csv") == slurp(dir / "e2" / "gram.csv"));
    require_ok(run_mqe({"replay", (dir / "e1" / "run.json").string(), "--out", (dir / "e3").string()}, dir));
    CHECK(slurp(dir / "e1" / "gram.csv") == slurp(dir / "e3" / "gram.csv"));
  }

  require_ok(run_mqe(args_with({"pca", "--gram", (dir / "e1" / "gram.csv").string(), "--q", "3", "--centered"}, dir / "p"), dir));
  CHECK(load_matrix(dir / "p" / "scores.csv").cols() == 3);
  CHECK(load_matrix(dir / "p" / "eigenvalues.csv").rows() == 3);

  require_ok(run_mqe(args_with({"classify", "--dataset", (dir / "data").string(), "--K", "6", "--q", "3", "--m0", "50",
                                "--train-frac", "0.67"},
                               dir / "c"),
                     dir));
  const json report = read_json(dir / "c" / "report.json");
  CHECK(report["test_ids"].size() + report["train_ids"].size() == 9);
  CHECK(report["accuracy"].get<double>() >= 0.0);
}
