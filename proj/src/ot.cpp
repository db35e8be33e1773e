#include "mqe/ot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mqe/error.hpp"
#include "mqe/io.hpp"
#include "mqe/parallel.hpp"

namespace mqe {

namespace {

// Moves the rounding gap between the two totals onto the largest target atom
// so the transportation problem is exactly balanced as far as doubles allow.
Vector balanced_demand(const Vector& supply, const Vector& demand) {
  Vector out = demand;
  Index largest = 0;
  out.maxCoeff(&largest);
  out[largest] += supply.sum() - demand.sum();
  if (out[largest] < 0.0) out[largest] = 0.0;
  return out;
}

TransportPlan solve_weights(const Vector& supply, const Vector& demand, const RowMatrix& cost) {
  TransportPlan plan;
  plan.source_size = supply.size();
  plan.target_size = demand.size();
  const double gap = std::abs(supply.sum() - demand.sum());
  require(gap < 1e-8, ErrorKind::invalid_argument,
          "marginals must carry equal mass (gap " + format_double(gap) + ")");

  if (supply.size() == 1 || demand.size() == 1) {
    // A single atom on either side forces the plan.
    const bool one_source = supply.size() == 1;
    const Vector& spread = one_source ? demand : supply;
    for (Index k = 0; k < spread.size(); ++k) {
      if (spread[k] <= 0.0) continue;
      const Index i = one_source ? 0 : k;
      const Index j = one_source ? k : 0;
      plan.entries.push_back({i, j, spread[k]});
      plan.cost += spread[k] * cost(i, j);
    }
    return plan;
  }

  NetworkSimplex solver(supply, balanced_demand(supply, demand), cost);
  solver.run();
  plan.entries = solver.positive_flows();
  plan.cost = solver.total_cost();
  return plan;
}

}  // namespace

Vector TransportPlan::row_sums() const {
  Vector s = Vector::Zero(source_size);
  for (const auto& e : entries) s[e.source] += e.mass;
  return s;
}

Vector TransportPlan::column_sums() const {
  Vector s = Vector::Zero(target_size);
  for (const auto& e : entries) s[e.target] += e.mass;
  return s;
}

RowMatrix squared_distances(const PointMatrix& x, const PointMatrix& y) {
  require(x.cols() == y.cols(), ErrorKind::dimension_mismatch,
          "point sets have dimensions " + std::to_string(x.cols()) + " and " +
              std::to_string(y.cols()));
  RowMatrix d(x.rows(), y.rows());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < y.rows(); ++j) d(i, j) = squared_distance(x.row(i), y.row(j));
  return d;
}

TransportPlan solve_ot(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  require(a.dim() == b.dim(), ErrorKind::dimension_mismatch,
          "cannot transport between dimensions " + std::to_string(a.dim()) + " and " +
              std::to_string(b.dim()));
  const RowMatrix cost = squared_distances(a.points(), b.points());
  return solve_weights(a.weights(), b.weights(), cost);
}

double w2sq(const DiscreteMeasure& a, const DiscreteMeasure& b) { return solve_ot(a, b).cost; }

double w2(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return std::sqrt(std::max(0.0, w2sq(a, b)));
}

PointMatrix barycentric_projection(const TransportPlan& plan, const DiscreteMeasure& source,
                                   const DiscreteMeasure& target) {
  require(plan.source_size == source.size() && plan.target_size == target.size(),
          ErrorKind::dimension_mismatch, "plan shape does not match the measures");
  PointMatrix mapped = PointMatrix::Zero(source.size(), target.dim());
  Vector mass = Vector::Zero(source.size());
  std::vector<Index> only(static_cast<std::size_t>(source.size()), -1);
  std::vector<int> count(static_cast<std::size_t>(source.size()), 0);
  for (const auto& e : plan.entries) {
    mapped.row(e.source) += e.mass * target.point(e.target);
    mass[e.source] += e.mass;
    only[static_cast<std::size_t>(e.source)] = e.target;
    ++count[static_cast<std::size_t>(e.source)];
  }
  for (Index i = 0; i < source.size(); ++i) {
    require(mass[i] > 0.0, ErrorKind::invalid_argument,
            "source atom " + std::to_string(i) + " carries no plan mass");
    // A row sent to a single atom maps exactly onto it.
    if (count[static_cast<std::size_t>(i)] == 1)
      mapped.row(i) = target.point(only[static_cast<std::size_t>(i)]);
    else
      mapped.row(i) /= mass[i];
  }
  return mapped;
}

std::vector<Index> solve_assignment(const Matrix& cost) {
  require(cost.rows() == cost.cols() && cost.rows() > 0, ErrorKind::invalid_argument,
          "assignment needs a nonempty square cost matrix");
  const Index n = cost.rows();
  std::vector<Index> perm(static_cast<std::size_t>(n), -1);
  if (n == 1) {
    perm[0] = 0;
    return perm;
  }
  // Unit marginals keep every flow an exact small integer in double arithmetic.
  const RowMatrix c = cost;
  NetworkSimplex solver(Vector::Ones(n), Vector::Ones(n), c);
  solver.run();
  for (const auto& e : solver.positive_flows()) {
    if (e.mass > 0.5) perm[static_cast<std::size_t>(e.source)] = e.target;
  }
  for (Index p : perm)
    require(p >= 0, ErrorKind::solver, "assignment solve did not return a permutation");
  return perm;
}

NestedCoupling nested_w2sq(const std::vector<DiscreteMeasure>& a,
                           const std::vector<DiscreteMeasure>& b) {
  require(a.size() == b.size() && !a.empty(), ErrorKind::invalid_argument,
          "nested W2 needs two nonempty families of equal size");
  const Index n = static_cast<Index>(a.size());
  NestedCoupling out;
  out.cost.resize(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    for (Index j = 0; j < n; ++j) out.cost(static_cast<Index>(i), j) = w2sq(a[i], b[static_cast<std::size_t>(j)]);
  });
  out.permutation = solve_assignment(out.cost);
  // Any cycle of the matching that does no better than leaving its members in
  // place is undone, so ties resolve to fixed points.
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (Index start = 0; start < n; ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    std::vector<Index> cycle;
    for (Index i = start; !seen[static_cast<std::size_t>(i)]; i = out.permutation[static_cast<std::size_t>(i)]) {
      seen[static_cast<std::size_t>(i)] = 1;
      cycle.push_back(i);
    }
    if (cycle.size() < 2) continue;
    double matched = 0.0, fixed = 0.0;
    for (Index i : cycle) {
      matched += out.cost(i, out.permutation[static_cast<std::size_t>(i)]);
      fixed += out.cost(i, i);
    }
    if (fixed <= matched + 1e-12 * std::max(1.0, std::abs(matched)))
      for (Index i : cycle) out.permutation[static_cast<std::size_t>(i)] = i;
  }
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += out.cost(i, out.permutation[static_cast<std::size_t>(i)]);
  out.value = total / static_cast<double>(n);
  return out;
}

SharedSupportW2::SharedSupportW2(const PointMatrix& support)
    : cost_(squared_distances(support, support)) {}

double SharedSupportW2::operator()(const Vector& weights_a, const Vector& weights_b) const {
  require(weights_a.size() == cost_.rows() && weights_b.size() == cost_.rows(),
          ErrorKind::dimension_mismatch, "weight vectors do not match the shared support size");
  return solve_weights(weights_a, weights_b, cost_).cost;
}

double w2sq_shared_support(const Vector& weights_a, const Vector& weights_b,
                           const PointMatrix& support) {
  return SharedSupportW2(support)(weights_a, weights_b);
}

void save_plan_csv(const TransportPlan& plan, const std::filesystem::path& path) {
  std::string text = "# cost=" + format_double(plan.cost) + "\n";
  for (const auto& e : plan.entries)
    text += std::to_string(e.source) + "," + std::to_string(e.target) + "," +
            format_double(e.mass) + "\n";
  write_text(text, path);
}

}  // namespace mqe
