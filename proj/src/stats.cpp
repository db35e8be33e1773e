#include "mqe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mqe/error.hpp"
#include "mqe/io.hpp"
#include "mqe/ot.hpp"
#include "mqe/parallel.hpp"

namespace mqe {

namespace {

Matrix fill_symmetric(std::size_t n, const std::function<double(std::size_t, std::size_t)>& entry) {
  Matrix d = Matrix::Zero(static_cast<Index>(n), static_cast<Index>(n));
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = entry(i, j);
      d(static_cast<Index>(i), static_cast<Index>(j)) = v;
      d(static_cast<Index>(j), static_cast<Index>(i)) = v;
    }
  });
  return d;
}

double block_mean(const Matrix& pairwise, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  double s = 0.0;
  for (Index i : rows)
    for (Index j : cols) s += pairwise(i, j);
  return s / (static_cast<double>(rows.size()) * static_cast<double>(cols.size()));
}

std::vector<Index> nonempty_members(const std::vector<std::string>& labels, const std::string& cls) {
  auto members = class_members(labels, cls);
  require(!members.empty(), ErrorKind::invalid_argument, "unknown class '" + cls + "'");
  return members;
}

}  // namespace

Matrix pairwise_w2sq(const std::vector<DiscreteMeasure>& family) {
  require(!family.empty(), ErrorKind::invalid_argument, "empty family");
  return fill_symmetric(family.size(), [&](std::size_t i, std::size_t j) { return w2sq(family[i], family[j]); });
}

Matrix pairwise_w2sq(const QuantizedFamily& qf) {
  if (!qf.shared_support()) return pairwise_w2sq(qf.measures());
  const SharedSupportW2 solver(qf.centers.front().points());
  return fill_symmetric(qf.size(), [&](std::size_t i, std::size_t j) {
    return solver(qf.weights.row(static_cast<Index>(i)).transpose(),
                  qf.weights.row(static_cast<Index>(j)).transpose());
  });
}

double dispersion_from(const Matrix& pairwise) {
  const double n = static_cast<double>(pairwise.rows());
  return pairwise.sum() / (n * n);
}

double dispersion(const std::vector<DiscreteMeasure>& family) { return dispersion_from(pairwise_w2sq(family)); }
double dispersion(const QuantizedFamily& qf) { return dispersion_from(pairwise_w2sq(qf)); }

std::vector<std::string> class_list(const std::vector<std::string>& labels) {
  std::vector<std::string> out = labels;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Index> class_members(const std::vector<std::string>& labels, const std::string& cls) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == cls) out.push_back(static_cast<Index>(i));
  return out;
}

double wcss(const Matrix& pairwise, const std::vector<std::string>& labels, const std::string& cls) {
  const auto m = nonempty_members(labels, cls);
  return block_mean(pairwise, m, m);
}

double bcss(const Matrix& pairwise, const std::vector<std::string>& labels, const std::string& l1,
            const std::string& l2) {
  return block_mean(pairwise, nonempty_members(labels, l1), nonempty_members(labels, l2));
}

BarycenterResult free_support_barycenter(const std::vector<DiscreteMeasure>& family, Index K,
                                         RngStream& rng, int max_iter, double tol) {
  require(!family.empty(), ErrorKind::invalid_argument, "empty family");
  require(K >= 1, ErrorKind::invalid_argument, "K must be >= 1");
  const DiscreteMeasure first = merge_duplicate_atoms(family.front());
  PointMatrix init(K, first.dim());
  if (count_distinct_support(first) >= K) {
    const auto idx = weighted_sample_without_replacement(first.weights(), static_cast<std::size_t>(K), rng);
    for (Index k = 0; k < K; ++k) init.row(k) = first.point(idx[static_cast<std::size_t>(k)]);
  } else {
    init = subsample_measure(first, static_cast<std::size_t>(K), rng).points();
  }
  return free_support_barycenter(family, init, max_iter, tol);
}

BarycenterResult free_support_barycenter(const std::vector<DiscreteMeasure>& family,
                                         const PointMatrix& init, int max_iter, double tol) {
  require(!family.empty(), ErrorKind::invalid_argument, "empty family");
  require(max_iter >= 0, ErrorKind::invalid_argument, "max_iter must be >= 0");
  const std::size_t n = family.size();
  PointMatrix support = init;
  std::vector<TransportPlan> plans(n);
  auto solve_all = [&](const PointMatrix& s) {
    const DiscreteMeasure nu(s);
    parallel_for(n, [&](std::size_t i) { plans[i] = solve_ot(nu, family[i]); });
    double f = 0.0;
    for (const auto& p : plans) f += p.cost;
    return f / static_cast<double>(n);
  };

  double value = solve_all(support);
  std::vector<double> trace{value};
  int iterations = 0;
  while (iterations < max_iter) {
    const DiscreteMeasure nu(support);
    PointMatrix next = PointMatrix::Zero(support.rows(), support.cols());
    for (std::size_t i = 0; i < n; ++i) next += barycentric_projection(plans[i], nu, family[i]);
    next /= static_cast<double>(n);
    double movement = 0.0;
    for (Index k = 0; k < support.rows(); ++k)
      movement = std::max(movement, std::sqrt(squared_distance(next.row(k), support.row(k))));
    const auto saved = plans;
    const double next_value = solve_all(next);
    if (next_value > value) {  // rounding noise only; keep the previous iterate
      plans = saved;
      break;
    }
    ++iterations;
    support = std::move(next);
    value = next_value;
    trace.push_back(value);
    if (movement < tol) break;
  }
  return BarycenterResult{DiscreteMeasure(std::move(support)), std::move(trace), iterations};
}

Vector cell_diameters(const DiscreteMeasure& m, const Centers& centers) {
  const auto part = voronoi_assign(m, centers);
  std::vector<std::vector<Index>> cells(static_cast<std::size_t>(centers.size()));
  for (Index j = 0; j < m.size(); ++j)
    if (m.weight(j) > 0.0) cells[static_cast<std::size_t>(part.assignment[static_cast<std::size_t>(j)])].push_back(j);
  Vector diam = Vector::Zero(centers.size());
  parallel_for(cells.size(), [&](std::size_t k) {
    const auto& cell = cells[k];
    const auto c = centers.point(static_cast<Index>(k));
    double best = 0.0;
    for (std::size_t a = 0; a < cell.size(); ++a) {
      best = std::max(best, squared_distance(m.point(cell[a]), c));
      for (std::size_t b = a + 1; b < cell.size(); ++b)
        best = std::max(best, squared_distance(m.point(cell[a]), m.point(cell[b])));
    }
    diam[static_cast<Index>(k)] = best;
  });
  return diam;
}

Index grid_side(Index K, Index d) {
  require(K >= 1 && d >= 1, ErrorKind::invalid_argument, "grid needs K >= 1 and d >= 1");
  Index g = static_cast<Index>(std::floor(std::pow(static_cast<double>(K), 1.0 / static_cast<double>(d))));
  auto power = [d](Index base) {
    double p = 1.0;
    for (Index t = 0; t < d; ++t) p *= static_cast<double>(base);
    return p;
  };
  while (g > 1 && power(g) > static_cast<double>(K)) --g;
  while (power(g + 1) <= static_cast<double>(K)) ++g;
  return std::max<Index>(g, 1);
}

Centers grid_centers(Index K, Index d) {
  const Index g = grid_side(K, d);
  Index count = 1;
  for (Index t = 0; t < d; ++t) count *= g;
  PointMatrix c(count, d);
  for (Index r = 0; r < count; ++r) {
    Index rest = r;
    for (Index t = d - 1; t >= 0; --t) {
      c(r, t) = (static_cast<double>(rest % g) + 0.5) / static_cast<double>(g);
      rest /= g;
    }
  }
  return Centers(std::move(c));
}

double BoundReport::min_slack() const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& c : checks) s = std::min(s, c.slack());
  return s;
}

BoundReport dispersion_bound_check(const Matrix& pairwise_mu, const Matrix& pairwise_nu, double eps_K,
                                   const std::vector<double>& lambdas) {
  const double ss_mu = dispersion_from(pairwise_mu);
  const double ss_nu = dispersion_from(pairwise_nu);
  BoundReport report;
  for (double lambda : lambdas) {
    require(lambda > 0.0, ErrorKind::invalid_argument, "lambda must be positive");
    report.checks.push_back({"dispersion lambda=" + format_double(lambda), ss_nu,
                             (1.0 + 2.0 / lambda) * ss_mu + (4.0 + 2.0 * lambda) * eps_K, true});
  }
  return report;
}

BoundReport pairwise_bound_check(const Matrix& pairwise_mu, const Matrix& pairwise_nu,
                                 double max_cell_diameter) {
  BoundReport report;
  std::optional<BoundCheck> worst;
  for (Index i = 0; i < pairwise_mu.rows(); ++i) {
    for (Index j = i + 1; j < pairwise_mu.cols(); ++j) {
      BoundCheck c{"pairwise " + std::to_string(i) + "," + std::to_string(j), pairwise_nu(i, j),
                   3.0 * pairwise_mu(i, j) + 6.0 * max_cell_diameter, true};
      if (!worst || c.slack() < worst->slack()) worst = c;
    }
  }
  if (worst) report.checks.push_back(*worst);
  return report;
}

BoundReport class_bound_check(const Matrix& pairwise_mu, const Matrix& pairwise_nu,
                              const std::vector<std::string>& labels, double eps_K) {
  require(static_cast<Index>(labels.size()) == pairwise_mu.rows(), ErrorKind::invalid_argument,
          "label count differs from family size");
  const double n = static_cast<double>(labels.size());
  const auto classes = class_list(labels);
  BoundReport report;
  for (const auto& l : classes) {
    const double nl = static_cast<double>(class_members(labels, l).size());
    report.checks.push_back({"wcss " + l, wcss(pairwise_nu, labels, l),
                             3.0 * wcss(pairwise_mu, labels, l) + 6.0 * n / nl * eps_K, true});
  }
  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = a + 1; b < classes.size(); ++b) {
      const double n1 = static_cast<double>(class_members(labels, classes[a]).size());
      const double n2 = static_cast<double>(class_members(labels, classes[b]).size());
      report.checks.push_back({"bcss " + classes[a] + "," + classes[b],
                               bcss(pairwise_nu, labels, classes[a], classes[b]),
                               bcss(pairwise_mu, labels, classes[a], classes[b]) / 3.0 -
                                   (n / n1 + n / n2) * eps_K,
                               false});
    }
  }
  return report;
}

double kernel_lipschitz_constant(const Kernel& kernel) {
  kernel.validate();
  switch (kernel.kind) {
    case KernelKind::rbf: return 1.0 / kernel.sigma;
    case KernelKind::linear: return 1.0;
    case KernelKind::linear_plus_square: break;
  }
  fail(ErrorKind::invalid_argument, "the linear-plus-square kernel has no global constant C");
}

BoundReport mmd_bound_check(const std::vector<DiscreteMeasure>& mu, const std::vector<DiscreteMeasure>& nu,
                            const Kernel& kernel, double eps_K) {
  require(mu.size() == nu.size() && !mu.empty(), ErrorKind::invalid_argument,
          "families must be nonempty and of equal size");
  const double c = kernel_lipschitz_constant(kernel);
  std::vector<double> sq(mu.size());
  parallel_for(mu.size(), [&](std::size_t i) {
    const double v = mmd(mu[i], nu[i], kernel);
    sq[i] = v * v;
  });
  double mean = 0.0;
  for (double v : sq) mean += v;
  mean /= static_cast<double>(mu.size());
  BoundReport report;
  report.checks.push_back({"mmd", mean, c * c * eps_K, true});
  return report;
}

}  // namespace mqe
