#include <doctest.h>

#include <cmath>

#include "mqe/error.hpp"
#include "mqe/ot.hpp"
#include "mqe/quantize.hpp"
#include "mqe/stats.hpp"
#include "support.hpp"

using namespace mqe;
using testing_support::random_measure;
using testing_support::random_points;

namespace {

DiscreteMeasure at(double x) {
  Vector v(1);
  v << x;
  return DiscreteMeasure::dirac(v);
}

Dataset random_labelled(Index N, Index n, Index d, Index L, RngStream& rng) {
  std::vector<DiscreteMeasure> ms;
  std::vector<std::string> labels;
  for (Index i = 0; i < N; ++i) {
    const double offset = static_cast<double>(i % L);
    ms.push_back(random_measure(n, d, rng, false, offset));
    labels.push_back("c" + std::to_string(i % L));
  }
  return Dataset(ms, std::optional(labels));
}

}  // namespace

TEST_CASE("dispersion") {
  RngStream rng(1);
  const auto m = random_measure(6, 2, rng);
  CHECK(dispersion({m, m, m}) == 0.0);
  CHECK(dispersion({at(0.0), at(1.0)}) == 0.5);

  const Dataset ds = random_labelled(5, 30, 2, 1, rng);
  const auto qf = quantize_mean(ds, 6, rng, LloydParams{}, std::nullopt);
  const double fast = dispersion(qf);
  const double slow = dispersion(qf.measures());
  CHECK(std::abs(fast - slow) <= 1e-12);
}

TEST_CASE("wcss and bcss") {
  const std::vector<std::string> same{"a", "a"};
  CHECK(wcss(pairwise_w2sq({at(0.0), at(0.0)}), same, "a") == 0.0);
  const std::vector<std::string> two{"a", "b"};
  const Matrix d = pairwise_w2sq({at(0.0), at(1.0)});
  CHECK(bcss(d, two, "a", "b") == 1.0);
  CHECK(wcss(d, two, "a") == 0.0);
  CHECK_THROWS_AS(wcss(d, two, "z"), Error);
}

TEST_CASE("bound checks hold on random quantized instances") {
  RngStream rng(2);
  for (int t = 0; t < 12; ++t) {
    const Dataset ds = random_labelled(6, 15, 2, 2, rng);
    const Matrix dmu = pairwise_w2sq(ds.measures());
    for (const auto& qf : {quantize_each(ds, 3, rng, LloydParams{}),
                           quantize_mean(ds, 4, rng, LloydParams{}, std::nullopt),
                           random_subset_quantize(ds, 3, rng)}) {
      const Matrix dnu = pairwise_w2sq(qf);
      CHECK(dispersion_bound_check(dmu, dnu, qf.eps_K, {0.5, 1.0, 2.0}).holds());
      CHECK(class_bound_check(dmu, dnu, *ds.labels(), qf.eps_K).holds());
      CHECK(mmd_bound_check(ds.measures(), qf.measures(), Kernel::rbf(0.6), qf.eps_K).holds());
      CHECK(mmd_bound_check(ds.measures(), qf.measures(), Kernel::linear(), qf.eps_K).holds());
      if (qf.shared_support()) {
        RngStream unused(0);
        const Vector diam = cell_diameters(mean_measure(ds, std::nullopt, unused), qf.centers.front());
        CHECK(pairwise_bound_check(dmu, dnu, diam.maxCoeff()).holds());
      }
    }
  }
}

TEST_CASE("dispersion bound slack on identical families") {
  RngStream rng(3);
  const Dataset ds = random_labelled(4, 10, 2, 1, rng);
  const Matrix dmu = pairwise_w2sq(ds.measures());
  const auto report = dispersion_bound_check(dmu, dmu, 0.0, {1.0});
  CHECK(report.checks[0].slack() == doctest::Approx(2.0 * dispersion_from(dmu)));
  CHECK_THROWS_AS(kernel_lipschitz_constant(Kernel::linear_plus_square()), Error);
}

TEST_CASE("grid centers realise the cell diameter bound") {
  for (Index d : {1, 2, 3}) {
    for (Index K : {1, 4, 9, 10, 27, 30}) {
      const Index g = grid_side(K, d);
      CHECK(std::pow(static_cast<double>(g), d) <= static_cast<double>(K));
      CHECK(std::pow(static_cast<double>(g + 1), d) > static_cast<double>(K));
      const Centers c = grid_centers(K, d);
      // Fine lattice on [0,1]^d that contains every cell boundary.
      const Index r = 4 * g;
      Index count = 1;
      for (Index t = 0; t < d; ++t) count *= r + 1;
      PointMatrix pts(count, d);
      for (Index i = 0; i < count; ++i) {
        Index rest = i;
        for (Index t = 0; t < d; ++t) {
          pts(i, t) = static_cast<double>(rest % (r + 1)) / static_cast<double>(r);
          rest /= r + 1;
        }
      }
      const Vector diam = cell_diameters(DiscreteMeasure(pts), c);
      const double bound = static_cast<double>(d) / static_cast<double>(g * g);
      CHECK(diam.maxCoeff() <= bound + 1e-12);
      CHECK(diam.maxCoeff() >= bound - 1e-12);
    }
  }
}

TEST_CASE("barycenter fixed points") {
  const auto two = free_support_barycenter({at(0.0), at(2.0)}, PointMatrix::Zero(1, 1), 50, 1e-12);
  CHECK(std::abs(two.measure.point(0)[0] - 1.0) <= 1e-8);

  RngStream rng(4);
  const auto m = random_measure(5, 2, rng, true);
  const auto self = free_support_barycenter({m}, m.points(), 50, 1e-12);
  CHECK(self.trace.back() == 0.0);
  CHECK(w2(self.measure, m) == 0.0);

  const auto copies = free_support_barycenter({m, m, m, m, m}, 5, rng, 100, 1e-12);
  CHECK(w2(copies.measure, m) <= 1e-6);

  for (int t = 0; t < 5; ++t) {
    std::vector<DiscreteMeasure> fam;
    for (int i = 0; i < 4; ++i) fam.push_back(random_measure(12, 2, rng));
    const auto run = free_support_barycenter(fam, 6, rng, 50, 1e-10);
    for (std::size_t i = 1; i < run.trace.size(); ++i) CHECK(run.trace[i] <= run.trace[i - 1]);
    double f = 0.0;
    for (const auto& mu : fam) f += w2sq(run.measure, mu);
    CHECK(run.trace.back() == doctest::Approx(f / 4.0).epsilon(1e-12));
  }
}
