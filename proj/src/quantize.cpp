#include "mqe/quantize.hpp"

#include <cmath>
#include <limits>

#include "mqe/error.hpp"
#include "mqe/parallel.hpp"

namespace mqe {

namespace {

constexpr double kDistinctSq = 1e-24;  // centers closer than 1e-12 count as equal

// Nearest center per point; strict comparison keeps the lowest index on ties.
void assign_raw(const PointMatrix& points, const PointMatrix& centers,
                std::vector<Index>& assignment, Vector& distance_sq) {
  const Index n = points.rows();
  const Index K = centers.rows();
  const Index d = points.cols();
  assignment.assign(static_cast<std::size_t>(n), 0);
  distance_sq.resize(n);
  const double* c = centers.data();
  for (Index j = 0; j < n; ++j) {
    const double* p = points.data() + j * d;
    double best = std::numeric_limits<double>::infinity();
    Index arg = 0;
    for (Index k = 0; k < K; ++k) {
      const double* ck = c + k * d;
      double s = 0.0;
      for (Index t = 0; t < d; ++t) {
        const double diff = p[t] - ck[t];
        s += diff * diff;
      }
      if (s < best) {
        best = s;
        arg = k;
      }
    }
    assignment[static_cast<std::size_t>(j)] = arg;
    distance_sq[j] = best;
  }
}

double weighted_objective(const Vector& weights, const Vector& distance_sq) {
  double s = 0.0;
  for (Index j = 0; j < weights.size(); ++j) s += weights[j] * distance_sq[j];
  return s;
}

void require_support(const DiscreteMeasure& m, Index K, const std::string& what) {
  require(K >= 1, ErrorKind::invalid_argument, "K must be >= 1");
  const Index distinct = count_distinct_support(m);
  require(distinct >= K, ErrorKind::support_too_small,
          what + " has " + std::to_string(distinct) + " distinct support points, K = " +
              std::to_string(K));
}

// Squared distance from every atom to the nearest row of centers flagged active.
Vector nearest_active_sq(const DiscreteMeasure& m, const PointMatrix& centers,
                         const std::vector<char>& active) {
  Vector best = Vector::Constant(m.size(), std::numeric_limits<double>::infinity());
  for (Index k = 0; k < centers.rows(); ++k) {
    if (!active[static_cast<std::size_t>(k)]) continue;
    for (Index j = 0; j < m.size(); ++j)
      best[j] = std::min(best[j], squared_distance(m.point(j), centers.row(k)));
  }
  return best;
}

// Moves every free center onto the atom with the largest weighted squared
// distance to the centers placed so far, one center at a time.
void reseed(const DiscreteMeasure& m, PointMatrix& centers, std::vector<char>& active,
            const PointMatrix& fallback) {
  Vector dist = nearest_active_sq(m, centers, active);
  for (Index k = 0; k < centers.rows(); ++k) {
    if (active[static_cast<std::size_t>(k)]) continue;
    Index arg = -1;
    double best = 0.0;
    for (Index j = 0; j < m.size(); ++j) {
      const double score = m.weight(j) * dist[j];
      if (score > best) {
        best = score;
        arg = j;
      }
    }
    if (arg < 0) {
      // Every weighted atom already sits on a center: take any uncovered atom.
      for (Index j = 0; j < m.size(); ++j) {
        if (dist[j] > kDistinctSq && (arg < 0 || dist[j] > dist[arg])) arg = j;
      }
    }
    if (arg >= 0) {
      centers.row(k) = m.point(arg);
    } else {
      centers.row(k) = fallback.row(k);
    }
    active[static_cast<std::size_t>(k)] = 1;
    for (Index j = 0; j < m.size(); ++j)
      dist[j] = std::min(dist[j], squared_distance(m.point(j), centers.row(k)));
  }
}

Centers seed_from(const DiscreteMeasure& m, PointMatrix chosen, Index have, Index K,
                  RngStream& rng) {
  chosen.conservativeResize(K, m.dim());
  Vector dist = Vector::Constant(m.size(), std::numeric_limits<double>::infinity());
  for (Index k = 0; k < have; ++k)
    for (Index j = 0; j < m.size(); ++j)
      dist[j] = std::min(dist[j], squared_distance(m.point(j), chosen.row(k)));
  for (Index k = have; k < K; ++k) {
    Index pick;
    if (k == 0) {
      pick = sample_index(m.weights(), rng);
    } else {
      Vector score = m.weights().cwiseProduct(dist);
      for (Index j = 0; j < score.size(); ++j)
        if (dist[j] <= kDistinctSq) score[j] = 0.0;
      pick = sample_index(score, rng);
    }
    chosen.row(k) = m.point(pick);
    for (Index j = 0; j < m.size(); ++j)
      dist[j] = std::min(dist[j], squared_distance(m.point(j), chosen.row(k)));
  }
  return Centers(std::move(chosen));
}

}  // namespace

Centers::Centers(PointMatrix points) : points_(std::move(points)) {
  require(points_.rows() >= 1 && points_.cols() >= 1, ErrorKind::invalid_argument,
          "centers must be a nonempty point set");
  require(points_.allFinite(), ErrorKind::invalid_argument, "centers have non-finite coordinates");
  for (Index a = 0; a < points_.rows(); ++a)
    for (Index b = a + 1; b < points_.rows(); ++b)
      if (squared_distance(points_.row(a), points_.row(b)) <= kDistinctSq)
        fail(ErrorKind::duplicate_centers,
             "centers " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
}

VoronoiPartition voronoi_assign(const PointMatrix& points, const Centers& centers) {
  require(points.cols() == centers.dim(), ErrorKind::dimension_mismatch,
          "points and centers differ in dimension");
  VoronoiPartition part;
  assign_raw(points, centers.points(), part.assignment, part.distance_sq);
  part.cell_masses = Vector::Zero(centers.size());
  return part;
}

VoronoiPartition voronoi_assign(const DiscreteMeasure& m, const Centers& centers) {
  VoronoiPartition part = voronoi_assign(m.points(), centers);
  for (Index j = 0; j < m.size(); ++j)
    part.cell_masses[part.assignment[static_cast<std::size_t>(j)]] += m.weight(j);
  return part;
}

double quantization_error(const DiscreteMeasure& m, const Centers& centers) {
  const auto part = voronoi_assign(m.points(), centers);
  return weighted_objective(m.weights(), part.distance_sq);
}

DiscreteMeasure voronoi_quantized(const DiscreteMeasure& m, const Centers& centers) {
  return DiscreteMeasure(centers.points(), voronoi_assign(m, centers).cell_masses);
}

Centers kmeanspp_init(const DiscreteMeasure& m, Index K, RngStream& rng) {
  require_support(m, K, "measure");
  return seed_from(m, PointMatrix(0, m.dim()), 0, K, rng);
}

Centers extend_centers(const DiscreteMeasure& m, const Centers& start, Index K, RngStream& rng) {
  require(start.dim() == m.dim(), ErrorKind::dimension_mismatch,
          "centers and measure differ in dimension");
  require(K >= start.size(), ErrorKind::invalid_argument, "cannot extend to fewer centers");
  // Every new center lands on an atom not yet covered, so enough distinct
  // atoms must lie away from the existing centers.
  const Vector dist = nearest_active_sq(m, start.points(),
                                        std::vector<char>(static_cast<std::size_t>(start.size()), 1));
  Index uncovered = 0;
  {
    std::vector<Index> keep;
    for (Index j = 0; j < m.size(); ++j)
      if (m.weight(j) > 0.0 && dist[j] > kDistinctSq) keep.push_back(j);
    if (!keep.empty()) {
      PointMatrix p(static_cast<Index>(keep.size()), m.dim());
      for (std::size_t r = 0; r < keep.size(); ++r) p.row(static_cast<Index>(r)) = m.point(keep[r]);
      uncovered = count_distinct_support(DiscreteMeasure(std::move(p)));
    }
  }
  require(uncovered >= K - start.size(), ErrorKind::support_too_small,
          "not enough uncovered support points to extend to K = " + std::to_string(K));
  return seed_from(m, start.points(), start.size(), K, rng);
}

LloydResult lloyd(const DiscreteMeasure& m, const Centers& init, const LloydParams& params) {
  require(init.dim() == m.dim(), ErrorKind::dimension_mismatch,
          "centers and measure differ in dimension");
  require(params.max_iter >= 1, ErrorKind::invalid_argument, "max_iter must be >= 1");
  const Index K = init.size();
  PointMatrix current = init.points();
  std::vector<Index> assignment;
  Vector dist;
  assign_raw(m.points(), current, assignment, dist);
  double objective = weighted_objective(m.weights(), dist);

  std::vector<double> trace{objective};
  int iterations = 0;
  while (iterations < params.max_iter && objective > 0.0) {
    PointMatrix next = PointMatrix::Zero(K, m.dim());
    Vector mass = Vector::Zero(K);
    for (Index j = 0; j < m.size(); ++j) {
      const Index k = assignment[static_cast<std::size_t>(j)];
      next.row(k) += m.weight(j) * m.point(j);
      mass[k] += m.weight(j);
    }
    std::vector<char> active(static_cast<std::size_t>(K), 0);
    for (Index k = 0; k < K; ++k) {
      if (mass[k] <= 0.0) continue;
      next.row(k) /= mass[k];
      bool collapsed = false;
      for (Index l = 0; l < k && !collapsed; ++l)
        collapsed = active[static_cast<std::size_t>(l)] &&
                    squared_distance(next.row(k), next.row(l)) <= kDistinctSq;
      active[static_cast<std::size_t>(k)] = collapsed ? 0 : 1;
    }
    reseed(m, next, active, current);

    std::vector<Index> next_assignment;
    Vector next_dist;
    assign_raw(m.points(), next, next_assignment, next_dist);
    const double next_objective = weighted_objective(m.weights(), next_dist);
    if (next_objective > objective) break;  // rounding noise; keep the previous step

    ++iterations;
    const double decrease = objective - next_objective;
    current = std::move(next);
    assignment = std::move(next_assignment);
    dist = std::move(next_dist);
    const double previous = objective;
    objective = next_objective;
    trace.push_back(objective);
    if (decrease < params.rel_tol * previous) break;
  }
  return LloydResult{Centers(std::move(current)), std::move(trace), iterations};
}

LloydResult quantize_measure(const DiscreteMeasure& m, Index K, const RngStream& rng,
                             const LloydParams& params) {
  require(params.restarts >= 1, ErrorKind::invalid_argument, "restarts must be >= 1");
  std::optional<LloydResult> best;
  for (int r = 0; r < params.restarts; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    LloydResult run = lloyd(m, kmeanspp_init(m, K, sub), params);
    if (!best || run.objective() < best->objective()) best = std::move(run);
  }
  return std::move(*best);
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::per_measure: return "per-measure";
    case Scheme::mean_measure: return "mean-measure";
    case Scheme::random_subset: return "random-subset";
  }
  return "?";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "per-measure" || s == "each") return Scheme::per_measure;
  if (s == "mean-measure" || s == "mean") return Scheme::mean_measure;
  if (s == "random-subset" || s == "random") return Scheme::random_subset;
  fail(ErrorKind::invalid_argument, "unknown scheme '" + s + "' (expected each, mean or random)");
}

const Centers& QuantizedFamily::centers_of(std::size_t i) const {
  return shared_support() ? centers.front() : centers.at(i);
}

DiscreteMeasure QuantizedFamily::measure(std::size_t i) const {
  return DiscreteMeasure(centers_of(i).points(), weights.row(static_cast<Index>(i)).transpose());
}

std::vector<DiscreteMeasure> QuantizedFamily::measures() const {
  std::vector<DiscreteMeasure> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(measure(i));
  return out;
}

QuantizedFamily quantize_each(const Dataset& ds, Index K, const RngStream& rng,
                              const LloydParams& params) {
  for (std::size_t i = 0; i < ds.size(); ++i)
    require_support(ds.measure(i), K, "measure '" + ds.ids()[i] + "'");
  std::vector<std::optional<LloydResult>> runs(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    runs[i] = quantize_measure(ds.measure(i), K, rng.substream(i), params);
  });

  QuantizedFamily qf;
  qf.scheme = Scheme::per_measure;
  qf.K = K;
  qf.seed = rng.seed();
  qf.weights.resize(static_cast<Index>(ds.size()), K);
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto part = voronoi_assign(ds.measure(i), runs[i]->centers);
    qf.weights.row(static_cast<Index>(i)) = part.cell_masses.transpose();
    total += weighted_objective(ds.measure(i).weights(), part.distance_sq);
    qf.centers.push_back(runs[i]->centers);
    qf.lloyd_iters.push_back(runs[i]->iterations);
  }
  qf.eps_K = total / static_cast<double>(ds.size());
  return qf;
}

DiscreteMeasure mean_measure(const Dataset& ds, std::optional<std::size_t> subsample,
                             RngStream& rng) {
  const Index total = static_cast<Index>(ds.total_points());
  PointMatrix p(total, ds.dim());
  Vector w(total);
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  Index row = 0;
  for (const auto& m : ds.measures()) {
    p.middleRows(row, m.size()) = m.points();
    w.segment(row, m.size()) = m.weights() * inv_n;
    row += m.size();
  }
  DiscreteMeasure full(std::move(p), std::move(w));
  if (!subsample) return full;
  return subsample_measure(full, *subsample, rng);
}

std::size_t default_mean_subsample(const Dataset& ds) {
  return (ds.total_points() + ds.size() - 1) / ds.size();
}

QuantizedFamily quantize_on_centers(const Dataset& ds, const Centers& centers) {
  const Index K = centers.size();
  std::vector<VoronoiPartition> parts(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) { parts[i] = voronoi_assign(ds.measure(i), centers); });

  QuantizedFamily qf;
  qf.scheme = Scheme::mean_measure;
  qf.K = K;
  qf.centers.push_back(centers);
  qf.weights.resize(static_cast<Index>(ds.size()), K);
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    qf.weights.row(static_cast<Index>(i)) = parts[i].cell_masses.transpose();
    total += weighted_objective(ds.measure(i).weights(), parts[i].distance_sq);
  }
  qf.eps_K = total / static_cast<double>(ds.size());
  qf.lloyd_iters.push_back(0);
  return qf;
}

QuantizedFamily quantize_mean(const Dataset& ds, Index K, const RngStream& rng,
                              const LloydParams& params, std::optional<std::size_t> subsample) {
  RngStream sample_rng = rng.substream(0);
  const DiscreteMeasure full = mean_measure(ds, std::nullopt, sample_rng);
  require_support(full, K, "mean measure");
  std::optional<DiscreteMeasure> train;
  if (subsample) {
    train = subsample_measure(full, *subsample, sample_rng);
    if (count_distinct_support(*train) < K) train.reset();
  }
  const LloydResult run = quantize_measure(train ? *train : full, K, rng.substream(1), params);
  QuantizedFamily qf = quantize_on_centers(ds, run.centers);
  qf.seed = rng.seed();
  qf.lloyd_iters = {run.iterations};
  return qf;
}

QuantizedFamily random_subset_quantize(const Dataset& ds, Index K, const RngStream& rng) {
  for (std::size_t i = 0; i < ds.size(); ++i)
    require_support(ds.measure(i), K, "measure '" + ds.ids()[i] + "'");
  std::vector<std::optional<Centers>> picked(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    const DiscreteMeasure merged = merge_duplicate_atoms(ds.measure(i));
    RngStream sub = rng.substream(i);
    const auto idx = weighted_sample_without_replacement(merged.weights(),
                                                         static_cast<std::size_t>(K), sub);
    PointMatrix c(K, merged.dim());
    for (Index k = 0; k < K; ++k) c.row(k) = merged.point(idx[static_cast<std::size_t>(k)]);
    picked[i] = Centers(std::move(c));
  });

  QuantizedFamily qf;
  qf.scheme = Scheme::random_subset;
  qf.K = K;
  qf.seed = rng.seed();
  qf.weights.resize(static_cast<Index>(ds.size()), K);
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto part = voronoi_assign(ds.measure(i), *picked[i]);
    qf.weights.row(static_cast<Index>(i)) = part.cell_masses.transpose();
    total += weighted_objective(ds.measure(i).weights(), part.distance_sq);
    qf.centers.push_back(*picked[i]);
    qf.lloyd_iters.push_back(0);
  }
  qf.eps_K = total / static_cast<double>(ds.size());
  return qf;
}

namespace {

LloydResult nested_run(const DiscreteMeasure& m, Index K, const std::optional<Centers>& previous,
                       const RngStream& rng, const LloydParams& params) {
  LloydResult best = quantize_measure(m, K, rng.substream(0), params);
  if (previous) {
    RngStream sub = rng.substream(1);
    LloydResult warm = lloyd(m, extend_centers(m, *previous, K, sub), params);
    if (warm.objective() <= best.objective()) best = std::move(warm);
  }
  return best;
}

}  // namespace

NestedQuantizer::NestedQuantizer(const Dataset& ds, Scheme scheme, const RngStream& rng,
                                 const LloydParams& params, std::optional<std::size_t> subsample)
    : ds_(ds), scheme_(scheme), rng_(rng), params_(params) {
  require(params.restarts >= 1, ErrorKind::invalid_argument, "restarts must be >= 1");
  if (scheme == Scheme::mean_measure) {
    RngStream sample_rng = rng.substream(0);
    train_ = mean_measure(ds, subsample, sample_rng);
  }
}

QuantizedFamily NestedQuantizer::next(Index K) {
  require(K > last_K_, ErrorKind::invalid_argument, "K must increase from one step to the next");
  const std::uint64_t step = step_++;
  last_K_ = K;

  if (scheme_ == Scheme::random_subset) return random_subset_quantize(ds_, K, rng_.substream(step));

  if (scheme_ == Scheme::mean_measure) {
    if (count_distinct_support(*train_) < K) {
      // The subsample is too poor for this K; fall back to the full mean measure.
      RngStream unused = rng_.substream(0);
      train_ = mean_measure(ds_, std::nullopt, unused);
      require_support(*train_, K, "mean measure");
    }
    const std::optional<Centers> prev =
        previous_.empty() ? std::nullopt : std::optional<Centers>(previous_.front());
    LloydResult run = nested_run(*train_, K, prev, rng_.substream(1).substream(step), params_);
    QuantizedFamily qf = quantize_on_centers(ds_, run.centers);
    qf.seed = rng_.seed();
    qf.lloyd_iters = {run.iterations};
    previous_ = {run.centers};
    return qf;
  }

  for (std::size_t i = 0; i < ds_.size(); ++i)
    require_support(ds_.measure(i), K, "measure '" + ds_.ids()[i] + "'");
  std::vector<std::optional<LloydResult>> runs(ds_.size());
  parallel_for(ds_.size(), [&](std::size_t i) {
    const std::optional<Centers> prev =
        previous_.empty() ? std::nullopt : std::optional<Centers>(previous_[i]);
    runs[i] = nested_run(ds_.measure(i), K, prev, rng_.substream(i).substream(step), params_);
  });
  QuantizedFamily qf;
  qf.scheme = Scheme::per_measure;
  qf.K = K;
  qf.seed = rng_.seed();
  qf.weights.resize(static_cast<Index>(ds_.size()), K);
  double total = 0.0;
  previous_.clear();
  for (std::size_t i = 0; i < ds_.size(); ++i) {
    const auto part = voronoi_assign(ds_.measure(i), runs[i]->centers);
    qf.weights.row(static_cast<Index>(i)) = part.cell_masses.transpose();
    total += weighted_objective(ds_.measure(i).weights(), part.distance_sq);
    qf.centers.push_back(runs[i]->centers);
    qf.lloyd_iters.push_back(runs[i]->iterations);
    previous_.push_back(runs[i]->centers);
  }
  qf.eps_K = total / static_cast<double>(ds_.size());
  return qf;
}

std::vector<QuantizedFamily> quantize_grid(const Dataset& ds, Scheme scheme, const std::vector<Index>& Ks,
                                           const RngStream& rng, const LloydParams& params,
                                           std::optional<std::size_t> subsample) {
  require(!Ks.empty(), ErrorKind::invalid_argument, "K grid is empty");
  NestedQuantizer nq(ds, scheme, rng, params, subsample);
  std::vector<QuantizedFamily> out;
  for (Index K : Ks) out.push_back(nq.next(K));
  return out;
}

}  // namespace mqe
