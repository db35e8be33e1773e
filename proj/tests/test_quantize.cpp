#include <doctest.h>

#include <cmath>

#include "mqe/error.hpp"
#include "mqe/family_io.hpp"
#include "mqe/ot.hpp"
#include "mqe/quantize.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "temp_dir.hpp"

using namespace mqe;
using testing_support::random_measure;
using testing_support::random_points;

namespace {

PointMatrix col(std::initializer_list<double> xs) {
  PointMatrix p(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) p(i++, 0) = x;
  return p;
}

Dataset random_dataset(Index N, Index n, Index d, RngStream& rng) {
  std::vector<DiscreteMeasure> ms;
  for (Index i = 0; i < N; ++i) ms.push_back(random_measure(n, d, rng));
  return Dataset(ms);
}

}  // namespace

TEST_CASE("voronoi ties go to the lowest index") {
  const Centers c(col({0.0, 2.0}));
  CHECK(voronoi_assign(col({1.0}), c).assignment[0] == 0);
  CHECK(voronoi_assign(col({1.5}), c).assignment[0] == 1);
  const Centers reversed(col({2.0, 0.0}));
  CHECK(voronoi_assign(col({1.0}), reversed).assignment[0] == 0);
}

TEST_CASE("voronoi matches the exhaustive scan") {
  RngStream rng(1);
  for (int t = 0; t < 20; ++t) {
    const PointMatrix pts = random_points(50, 2, rng);
    PointMatrix cs = random_points(5, 2, rng);
    if (t % 2) cs = cs.array().round();  // integer grid produces ties
    PointMatrix grid = pts.array().round();
    const Centers c = Centers(PointMatrix(merge_duplicate_atoms(DiscreteMeasure(cs)).points()));
    CHECK(voronoi_assign(pts, c).assignment == oracle::nearest_bruteforce(pts, c.points()));
    CHECK(voronoi_assign(grid, c).assignment == oracle::nearest_bruteforce(grid, c.points()));
  }
}

TEST_CASE("cell masses partition the weights") {
  RngStream rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto m = random_measure(40, 3, rng);
    const Centers c(random_points(6, 3, rng));
    CHECK(std::abs(voronoi_assign(m, c).cell_masses.sum() - 1.0) <= 1e-9);
  }
}

TEST_CASE("duplicate centers are rejected") {
  CHECK_THROWS_AS(Centers(col({0.0, 1.0, 0.0})), Error);
  try {
    Centers(col({0.5, 0.5}));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::duplicate_centers);
  }
}

TEST_CASE("kmeans++ initialization") {
  RngStream rng(3);
  const Centers one = kmeanspp_init(DiscreteMeasure(col({4.0})), 1, rng);
  CHECK(one.point(0)[0] == 4.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    RngStream r(s);
    const Centers two = kmeanspp_init(DiscreteMeasure(col({0.0, 1.0})), 2, r);
    CHECK(std::min(two.point(0)[0], two.point(1)[0]) == 0.0);
    CHECK(std::max(two.point(0)[0], two.point(1)[0]) == 1.0);
  }
  const auto m = random_measure(7, 2, rng);
  const Centers all = kmeanspp_init(m, 7, rng);
  CHECK(count_distinct_support(DiscreteMeasure(all.points())) == 7);
  for (Index k = 0; k < 7; ++k) {
    bool found = false;
    for (Index j = 0; j < 7; ++j) found = found || (all.point(k) == m.point(j));
    CHECK(found);
  }
  PointMatrix dup = col({1.0, 1.0, 2.0});
  try {
    kmeanspp_init(DiscreteMeasure(dup), 3, rng);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::support_too_small);
  }
}

TEST_CASE("lloyd closed forms") {
  const DiscreteMeasure m(col({0.0, 1.0}));
  const auto fixed = lloyd(m, Centers(col({0.0, 1.0})), LloydParams{});
  CHECK(fixed.objective() == 0.0);
  CHECK(fixed.centers.point(0)[0] == 0.0);
  CHECK(fixed.centers.point(1)[0] == 1.0);

  const auto single = lloyd(m, Centers(col({0.0})), LloydParams{});
  CHECK(single.centers.point(0)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(single.objective() == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("lloyd trace is monotone and centers stay distinct") {
  RngStream rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto m = random_measure(200, 2, rng);
    const Index K = 2 + static_cast<Index>(rng.below(15));
    const auto run = lloyd(m, kmeanspp_init(m, K, rng), LloydParams{});
    for (std::size_t i = 1; i < run.trace.size(); ++i) CHECK(run.trace[i] <= run.trace[i - 1]);
    CHECK(run.objective() == doctest::Approx(quantization_error(m, run.centers)).epsilon(1e-12));
    CHECK(run.centers.size() == K);
  }
}

TEST_CASE("lloyd reseeds empty cells") {
  // The third center starts far away and owns no point.
  const DiscreteMeasure m(col({0.0, 0.1, 1.0, 1.1, 5.0, 5.1}));
  const auto run = lloyd(m, Centers(col({0.0, 1.0, 100.0})), LloydParams{});
  for (std::size_t i = 1; i < run.trace.size(); ++i) CHECK(run.trace[i] <= run.trace[i - 1]);
  CHECK(run.objective() < 0.01);
  CHECK(run.centers.points().maxCoeff() < 6.0);
}

TEST_CASE("quantization error") {
  const DiscreteMeasure m(col({0.0, 1.0}));
  CHECK(quantization_error(m, Centers(col({0.0, 1.0}))) == 0.0);
  CHECK(quantization_error(m, Centers(col({0.5}))) == 0.25);
}

TEST_CASE("quantization error equals W2 to the Voronoi-quantized measure") {
  RngStream rng(5);
  for (int t = 0; t < 30; ++t) {
    const Index d = 1 + static_cast<Index>(rng.below(3));
    const auto m = random_measure(5 + static_cast<Index>(rng.below(25)), d, rng);
    const Centers c(random_points(1 + static_cast<Index>(rng.below(5)), d, rng));
    const auto q = voronoi_quantized(m, c);
    const double err = quantization_error(m, c);
    CHECK(std::abs(w2sq(m, q) - err) <= 1e-8);
    // Any other weights on the same centers transport at a cost at least as large.
    Vector w = q.weights() + testing_support::random_weights(c.size(), rng) * 0.3;
    CHECK(w2sq(m, DiscreteMeasure(c.points(), w)) >= err - 1e-10);
  }
}

TEST_CASE("quantize_each") {
  RngStream rng(6);
  const Dataset one({DiscreteMeasure(col({0.0, 1.0}))});
  const auto q1 = quantize_each(one, 2, rng, LloydParams{});
  CHECK(q1.eps_K == 0.0);
  CHECK(w2sq(q1.measure(0), one.measure(0)) == 0.0);

  Vector a(2), b(2);
  a << 1.0, 2.0;
  b << -3.0, 0.5;
  const Dataset diracs({DiscreteMeasure::dirac(a), DiscreteMeasure::dirac(b)});
  const auto qd = quantize_each(diracs, 1, rng, LloydParams{});
  CHECK(qd.eps_K == 0.0);
  CHECK(qd.measure(0).points() == diracs.measure(0).points());
  CHECK(qd.measure(1).points() == diracs.measure(1).points());

  const Dataset small({DiscreteMeasure(col({0.0, 1.0})), DiscreteMeasure(col({2.0, 2.0, 3.0}))});
  try {
    quantize_each(small, 3, rng, LloydParams{});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::support_too_small);
    CHECK(std::string(e.what()).find("m0") != std::string::npos);
  }
}

TEST_CASE("eps_K does not increase when nested initializations double K") {
  RngStream rng(7);
  const Dataset ds = random_dataset(4, 300, 2, rng);
  const RngStream seeds(70);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    RngStream r = seeds.substream(i);
    const auto base = lloyd(ds.measure(i), kmeanspp_init(ds.measure(i), 8, r), LloydParams{});
    const auto wider = lloyd(ds.measure(i), extend_centers(ds.measure(i), base.centers, 16, r), LloydParams{});
    CHECK(wider.objective() <= base.objective());
  }
}

TEST_CASE("mean measure") {
  Vector z = Vector::Zero(1), o = Vector::Ones(1);
  const Dataset ds({DiscreteMeasure::dirac(z), DiscreteMeasure::dirac(o)});
  RngStream rng(8);
  const auto mm = mean_measure(ds, std::nullopt, rng);
  CHECK(mm.size() == 2);
  CHECK(mm.weight(0) == 0.5);
  CHECK(mm.weight(1) == 0.5);

  RngStream g(9);
  const auto single = random_measure(10, 2, g);
  const auto same = mean_measure(Dataset({single}), std::nullopt, rng);
  CHECK(same.points() == single.points());
  CHECK((same.weights() - single.weights()).cwiseAbs().maxCoeff() <= 1e-15);

  const Dataset ds2 = random_dataset(5, 20, 2, g);
  CHECK(std::abs(mean_measure(ds2, std::nullopt, rng).weights().sum() - 1.0) <= 1e-12);
  const auto sub = mean_measure(ds2, 33, rng);
  CHECK(sub.size() == 33);
  CHECK(default_mean_subsample(ds2) == 20);
}

TEST_CASE("quantize_mean") {
  RngStream rng(10);
  Vector z = Vector::Zero(1), o = Vector::Ones(1);
  const Dataset ds({DiscreteMeasure::dirac(z), DiscreteMeasure::dirac(o)});
  const auto q = quantize_mean(ds, 2, rng, LloydParams{}, std::nullopt);
  CHECK(q.eps_K == 0.0);
  CHECK(q.shared_support());
  const Index k0 = q.centers_of(0).point(0)[0] == 0.0 ? 0 : 1;
  CHECK(q.weights(0, k0) == 1.0);
  CHECK(q.weights(1, 1 - k0) == 1.0);

  // The mean-measure identity chain holds for any centers.
  RngStream g(11);
  for (int t = 0; t < 15; ++t) {
    const Index d = 1 + static_cast<Index>(g.below(3));
    const Dataset fam = random_dataset(2 + static_cast<Index>(g.below(4)), 4 + static_cast<Index>(g.below(20)), d, g);
    const Centers c(random_points(1 + static_cast<Index>(g.below(5)), d, g));
    const auto qf = quantize_on_centers(fam, c);
    double lhs = 0.0;
    for (std::size_t i = 0; i < fam.size(); ++i) lhs += w2sq(fam.measure(i), qf.measure(i));
    lhs /= static_cast<double>(fam.size());
    RngStream unused(0);
    CHECK(std::abs(lhs - quantization_error(mean_measure(fam, std::nullopt, unused), c)) <= 1e-8);
    CHECK(std::abs(lhs - qf.eps_K) <= 1e-8);
    const auto qm = quantize_mean(fam, 3 <= fam.total_points() ? 3 : 1, g, LloydParams{}, 10);
    CHECK(std::abs(qm.eps_K - quantization_error(mean_measure(fam, std::nullopt, unused),
                                                 qm.centers.front())) <= 1e-12);
  }

  const auto m = random_measure(30, 2, g);
  const Dataset copies({m, m, m});
  const auto qc = quantize_mean(copies, 5, g, LloydParams{}, std::nullopt);
  CHECK(qc.weights.row(0) == qc.weights.row(1));
  CHECK(qc.weights.row(1) == qc.weights.row(2));
  for (Index i = 0; i < 3; ++i) CHECK(std::abs(qc.weights.row(i).sum() - 1.0) <= 1e-9);
}

TEST_CASE("random subset baseline") {
  RngStream rng(12);
  const auto m = random_measure(6, 2, rng);
  const auto full = random_subset_quantize(Dataset({m}), 6, rng);
  CHECK(full.eps_K == 0.0);
  CHECK(w2sq(full.measure(0), m) <= 1e-15);

  const Dataset ds = random_dataset(3, 40, 2, rng);
  const auto a = random_subset_quantize(ds, 5, RngStream(99));
  const auto b = random_subset_quantize(ds, 5, RngStream(99));
  CHECK(a.weights == b.weights);
  CHECK(a.eps_K == b.eps_K);

  double random_total = 0.0, lloyd_total = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    random_total += random_subset_quantize(ds, 5, RngStream(s)).eps_K;
    lloyd_total += quantize_each(ds, 5, RngStream(s), LloydParams{}).eps_K;
  }
  CHECK(random_total >= lloyd_total);
}

TEST_CASE("restarts keep the best run") {
  RngStream rng(13);
  const auto m = random_measure(150, 2, rng);
  LloydParams one, five;
  five.restarts = 5;
  const auto a = quantize_measure(m, 7, RngStream(3), one);
  const auto b = quantize_measure(m, 7, RngStream(3), five);
  CHECK(b.objective() <= a.objective());
}

TEST_CASE("quantized family round trip") {
  TempDir dir("quantize");
  RngStream rng(14);
  const Dataset ds = random_dataset(3, 25, 2, rng);
  for (const auto& qf : {quantize_each(ds, 4, rng, LloydParams{}),
                         quantize_mean(ds, 4, rng, LloydParams{}, std::nullopt)}) {
    const auto path = dir.path() / to_string(qf.scheme);
    save_quantized_family(qf, path);
    const auto back = load_quantized_family(path);
    CHECK(back.scheme == qf.scheme);
    CHECK(back.eps_K == qf.eps_K);
    CHECK(back.weights == qf.weights);
    CHECK(back.lloyd_iters == qf.lloyd_iters);
    CHECK(back.centers.size() == qf.centers.size());
    CHECK(back.centers_of(2).points() == qf.centers_of(2).points());
  }
}

TEST_CASE("nested K grid never increases the objective") {
  RngStream rng(91);
  const Dataset ds(testing_support::random_family(5, 40, 2, rng));
  const std::vector<Index> grid{1, 2, 4, 8, 16};
  for (Scheme s : {Scheme::per_measure, Scheme::mean_measure}) {
    const auto fams = quantize_grid(ds, s, grid, rng, LloydParams{});
    REQUIRE(fams.size() == grid.size());
    for (std::size_t g = 0; g < fams.size(); ++g) {
      CHECK(fams[g].K == grid[g]);
      CHECK(fams[g].eps_K > 0.0);
      if (g > 0) CHECK(fams[g].eps_K <= fams[g - 1].eps_K);
    }
  }
  CHECK(quantize_grid(ds, Scheme::random_subset, grid, rng, LloydParams{}).size() == grid.size());
  CHECK_THROWS_AS(quantize_grid(ds, Scheme::mean_measure, {4, 4}, rng, LloydParams{}), Error);
}
