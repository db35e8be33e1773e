#include <doctest.h>

#include <cmath>
#include <fstream>

#include "mqe/error.hpp"
#include "mqe/ot.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "temp_dir.hpp"

using namespace mqe;
using testing_support::random_measure;
using testing_support::random_points;

namespace {

DiscreteMeasure line(std::initializer_list<double> xs, std::initializer_list<double> ws = {}) {
  PointMatrix p(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) p(i++, 0) = x;
  if (ws.size() == 0) return DiscreteMeasure(p);
  Vector w(static_cast<Index>(ws.size()));
  i = 0;
  for (double v : ws) w[i++] = v;
  return DiscreteMeasure(p, w);
}

double marginal_residual(const TransportPlan& plan, const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return std::max((plan.row_sums() - a.weights()).cwiseAbs().maxCoeff(),
                  (plan.column_sums() - b.weights()).cwiseAbs().maxCoeff());
}

std::vector<std::pair<double, double>> as_pairs(const DiscreteMeasure& m) {
  std::vector<std::pair<double, double>> out;
  for (Index i = 0; i < m.size(); ++i) out.emplace_back(m.point(i)[0], m.weight(i));
  return out;
}

}  // namespace

TEST_CASE("dirac to dirac") {
  const auto plan = solve_ot(line({0.0}), line({1.0}));
  REQUIRE(plan.entries.size() == 1);
  CHECK(plan.entries[0].mass == 1.0);
  CHECK(plan.cost == 1.0);
}

TEST_CASE("two atoms onto one") {
  CHECK(w2sq(line({0.0, 1.0}), line({0.0})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w2sq(line({0.0, 1.0}), line({0.0})) ==
        doctest::Approx(oracle::w2sq_1d(as_pairs(line({0.0, 1.0})), as_pairs(line({0.0})))));
}

TEST_CASE("uniform instances match exhaustive assignment") {
  RngStream rng(101);
  for (int t = 0; t < 60; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(5));
    const Index d = 1 + static_cast<Index>(rng.below(3));
    const PointMatrix a = random_points(n, d, rng), b = random_points(n, d, rng);
    const auto plan = solve_ot(DiscreteMeasure(a), DiscreteMeasure(b));
    CHECK(std::abs(plan.cost - oracle::w2sq_uniform_bruteforce(a, b)) <= 1e-9);
    CHECK(marginal_residual(plan, DiscreteMeasure(a), DiscreteMeasure(b)) < 1e-8);
    CHECK(static_cast<Index>(plan.entries.size()) <= 2 * n - 1);
  }
}

TEST_CASE("weighted 1D instances match the quantile coupling") {
  RngStream rng(202);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_measure(1 + static_cast<Index>(rng.below(12)), 1, rng);
    const auto b = random_measure(1 + static_cast<Index>(rng.below(12)), 1, rng);
    const auto plan = solve_ot(a, b);
    CHECK(std::abs(plan.cost - oracle::w2sq_1d(as_pairs(a), as_pairs(b))) <= 1e-9);
    CHECK(marginal_residual(plan, a, b) < 1e-8);
    for (const auto& e : plan.entries) CHECK(e.mass > 0.0);
  }
}

TEST_CASE("larger instances stay feasible and basic") {
  RngStream rng(303);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_measure(80 + static_cast<Index>(rng.below(40)), 3, rng);
    const auto b = random_measure(60 + static_cast<Index>(rng.below(40)), 3, rng);
    const auto plan = solve_ot(a, b);
    CHECK(marginal_residual(plan, a, b) < 1e-8);
    CHECK(static_cast<Index>(plan.entries.size()) <= a.size() + b.size() - 1);
    CHECK(plan.cost >= 0.0);
    const auto again = solve_ot(a, b);
    CHECK(again.cost == plan.cost);
  }
}

TEST_CASE("metric properties of w2") {
  RngStream rng(404);
  for (int t = 0; t < 40; ++t) {
    const Index d = 1 + static_cast<Index>(rng.below(3));
    const auto a = random_measure(3 + static_cast<Index>(rng.below(10)), d, rng);
    const auto b = random_measure(3 + static_cast<Index>(rng.below(10)), d, rng);
    const auto c = random_measure(3 + static_cast<Index>(rng.below(10)), d, rng);
    CHECK(w2(a, a) == 0.0);
    CHECK(std::abs(w2(a, b) - w2(b, a)) <= 1e-9);
    CHECK(w2(a, c) <= w2(a, b) + w2(b, c) + 1e-7);
  }
  Vector x(2), y(2);
  x << 1.0, 2.0;
  y << -2.0, 6.0;
  CHECK(w2(DiscreteMeasure::dirac(x), DiscreteMeasure::dirac(y)) == doctest::Approx(5.0));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(solve_ot(line({0.0}), DiscreteMeasure(PointMatrix::Zero(1, 2))), Error);
  try {
    w2sq(line({0.0}), DiscreteMeasure(PointMatrix::Zero(1, 2)));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
  }
}

TEST_CASE("barycentric projection") {
  RngStream rng(505);
  const PointMatrix x = random_points(6, 2, rng);
  const DiscreteMeasure src(x);
  const auto same = barycentric_projection(solve_ot(src, src), src, src);
  CHECK((same - x).cwiseAbs().maxCoeff() <= 1e-15);

  PointMatrix shifted = x;
  shifted.col(0).array() += 0.25;
  shifted.col(1).array() -= 0.5;
  const DiscreteMeasure tgt(shifted);
  const auto moved = barycentric_projection(solve_ot(src, tgt), src, tgt);
  CHECK((moved - shifted).cwiseAbs().maxCoeff() <= 1e-12);

  Vector c(2);
  c << 3.0, -1.0;
  const auto dirac = DiscreteMeasure::dirac(c);
  const auto onto = barycentric_projection(solve_ot(src, dirac), src, dirac);
  for (Index i = 0; i < onto.rows(); ++i) CHECK((onto.row(i) - c.transpose()).norm() == 0.0);

  // Outputs are convex combinations: they stay in the target's bounding box.
  const auto a = random_measure(15, 2, rng), b = random_measure(9, 2, rng);
  const auto proj = barycentric_projection(solve_ot(a, b), a, b);
  for (Index t = 0; t < 2; ++t) {
    CHECK(proj.col(t).minCoeff() >= b.points().col(t).minCoeff() - 1e-12);
    CHECK(proj.col(t).maxCoeff() <= b.points().col(t).maxCoeff() + 1e-12);
  }
}

TEST_CASE("nested W2") {
  RngStream rng(606);
  std::vector<DiscreteMeasure> fam;
  for (int i = 0; i < 4; ++i) fam.push_back(random_measure(5, 2, rng));
  const auto self = nested_w2sq(fam, fam);
  CHECK(self.value == 0.0);
  CHECK(self.permutation == std::vector<Index>{0, 1, 2, 3});

  const auto unit = nested_w2sq({line({0.0})}, {line({1.0})});
  CHECK(unit.value == 1.0);

  for (int t = 0; t < 20; ++t) {
    std::vector<DiscreteMeasure> a, b;
    for (int i = 0; i < 4; ++i) {
      a.push_back(random_measure(4, 2, rng));
      b.push_back(random_measure(3, 2, rng));
    }
    const auto nested = nested_w2sq(a, b);
    CHECK(std::abs(nested.value - oracle::min_permutation(nested.cost)) <= 1e-12);
    std::vector<Index> sorted = nested.permutation;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<Index>{0, 1, 2, 3});
  }
  CHECK_THROWS_AS(nested_w2sq(fam, {fam[0]}), Error);
}

TEST_CASE("assignment on random square costs") {
  RngStream rng(707);
  for (int t = 0; t < 30; ++t) {
    const Index n = 1 + static_cast<Index>(rng.below(7));
    Matrix c(n, n);
    for (Index i = 0; i < c.size(); ++i) c.data()[i] = std::floor(rng.uniform(0, 5));  // many ties
    const auto perm = solve_assignment(c);
    double v = 0.0;
    for (Index i = 0; i < n; ++i) v += c(i, perm[static_cast<std::size_t>(i)]);
    CHECK(v / static_cast<double>(n) == doctest::Approx(oracle::min_permutation(c)));
  }
}

TEST_CASE("shared support fast path") {
  PointMatrix c(2, 1);
  c << 0.0, 1.0;
  Vector e0(2), e1(2);
  e0 << 1.0, 0.0;
  e1 << 0.0, 1.0;
  CHECK(w2sq_shared_support(e0, e1, c) == 1.0);
  CHECK(w2sq_shared_support(e0, e0, c) == 0.0);

  RngStream rng(808);
  const PointMatrix support = random_points(12, 3, rng);
  const SharedSupportW2 solver(support);
  for (int t = 0; t < 20; ++t) {
    Vector wa = testing_support::random_weights(12, rng), wb = testing_support::random_weights(12, rng);
    wa[3] = 0.0;
    wa /= wa.sum();
    wb /= wb.sum();
    const double general = w2sq(DiscreteMeasure(support, wa), DiscreteMeasure(support, wb));
    CHECK(std::abs(solver(wa, wb) - general) <= 1e-10);
  }
  CHECK_THROWS_AS(solver(Vector::Ones(3) / 3.0, Vector::Ones(3) / 3.0), Error);
}

TEST_CASE("plan dump") {
  TempDir dir("ot");
  const auto plan = solve_ot(line({0.0, 1.0}), line({0.0}));
  save_plan_csv(plan, dir.path() / "plan.csv");
  std::ifstream in(dir.path() / "plan.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "# cost=0.5");
  CHECK(row == "0,0,0.5");
}

TEST_CASE("nested W2 prefers fixed points on ties") {
  const std::vector<DiscreteMeasure> a{line({0.0}), line({0.1}), line({5.0})};
  const std::vector<DiscreteMeasure> b{line({0.05}), line({0.05}), line({5.0})};
  const auto n = nested_w2sq(a, b);
  CHECK(n.permutation == std::vector<Index>{0, 1, 2});
  const auto swapped = nested_w2sq(a, {line({0.1}), line({0.0}), line({5.0})});
  CHECK(swapped.permutation == std::vector<Index>{1, 0, 2});
  CHECK(swapped.value == 0.0);
}
