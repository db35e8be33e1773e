#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mqe/measure.hpp"

namespace mqe {

/// K pairwise distinct points. Their order is the Voronoi tie-break order.
class Centers {
 public:
  /// Throws duplicate_centers if two rows are within 1e-12 of each other.
  explicit Centers(PointMatrix points);

  const PointMatrix& points() const noexcept { return points_; }
  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }
  auto point(Index k) const { return points_.row(k); }

 private:
  PointMatrix points_;
};

struct VoronoiPartition {
  /// Cell index of every input point: the lowest index among its nearest centers.
  std::vector<Index> assignment;
  /// Squared distance of every input point to its assigned center.
  Vector distance_sq;
  /// Total weight per cell (zero when no weights were given).
  Vector cell_masses;
};

VoronoiPartition voronoi_assign(const PointMatrix& points, const Centers& centers);
VoronoiPartition voronoi_assign(const DiscreteMeasure& m, const Centers& centers);

/// sum_j w_j min_k |x_k - p_j|^2
double quantization_error(const DiscreteMeasure& m, const Centers& centers);

/// sum_k mass_k delta_{x_k} with the Voronoi cell masses of m. Empty cells keep weight 0.
DiscreteMeasure voronoi_quantized(const DiscreteMeasure& m, const Centers& centers);

/// k-means++ seeding: first center drawn by weight, then by weight * D^2.
Centers kmeanspp_init(const DiscreteMeasure& m, Index K, RngStream& rng);

/// Continues k-means++ seeding from existing centers up to K centers in total.
Centers extend_centers(const DiscreteMeasure& m, const Centers& start, Index K, RngStream& rng);

struct LloydParams {
  int max_iter = 100;
  double rel_tol = 1e-7;
  int restarts = 1;
};

struct LloydResult {
  Centers centers;
  /// Objective at the initial centers followed by one value per accepted step.
  std::vector<double> trace;
  int iterations = 0;
  double objective() const { return trace.back(); }
};

LloydResult lloyd(const DiscreteMeasure& m, const Centers& init, const LloydParams& params);

/// k-means++ then Lloyd, repeated params.restarts times on substreams of rng;
/// the lowest final objective wins (earliest restart on ties).
LloydResult quantize_measure(const DiscreteMeasure& m, Index K, const RngStream& rng,
                             const LloydParams& params);

enum class Scheme { per_measure, mean_measure, random_subset };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

struct QuantizedFamily {
  Scheme scheme = Scheme::per_measure;
  Index K = 0;
  /// One entry per measure, or a single shared entry for the mean-measure scheme.
  std::vector<Centers> centers;
  /// N x K, row i holds the cell masses of measure i.
  Matrix weights;
  double eps_K = 0.0;
  std::uint64_t seed = 0;
  /// Lloyd iterations per run (one entry per measure, or one for the shared run).
  std::vector<int> lloyd_iters;

  bool shared_support() const noexcept { return scheme == Scheme::mean_measure; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(weights.rows()); }
  const Centers& centers_of(std::size_t i) const;
  /// The i-th quantized measure, zero-weight atoms included.
  DiscreteMeasure measure(std::size_t i) const;
  std::vector<DiscreteMeasure> measures() const;
};

QuantizedFamily quantize_each(const Dataset& ds, Index K, const RngStream& rng,
                              const LloydParams& params);

/// Concatenated supports with weights w / N, optionally subsampled i.i.d.
DiscreteMeasure mean_measure(const Dataset& ds, std::optional<std::size_t> subsample,
                             RngStream& rng);

/// ceil((1/N) sum_i m_i)
std::size_t default_mean_subsample(const Dataset& ds);

/// Lloyd on the (optionally subsampled) mean measure; eps_K is always taken on
/// the full mean measure. Falls back to the full mean measure when the
/// subsample has fewer than K distinct points.
QuantizedFamily quantize_mean(const Dataset& ds, Index K, const RngStream& rng,
                              const LloydParams& params, std::optional<std::size_t> subsample);

/// Shared-support family for given centers, without any optimization.
QuantizedFamily quantize_on_centers(const Dataset& ds, const Centers& centers);

QuantizedFamily random_subset_quantize(const Dataset& ds, Index K, const RngStream& rng);

/// Quantizes one family for each K of an increasing sequence. For the
/// Lloyd-based schemes each step also runs from the previous solution extended
/// by k-means++ seeding and keeps the better of the warm and fresh runs, so the
/// Lloyd objective never increases along the sequence.
class NestedQuantizer {
 public:
  NestedQuantizer(const Dataset& ds, Scheme scheme, const RngStream& rng, const LloydParams& params,
                  std::optional<std::size_t> subsample = std::nullopt);

  QuantizedFamily next(Index K);

 private:
  const Dataset& ds_;
  Scheme scheme_;
  RngStream rng_;
  LloydParams params_;
  std::optional<DiscreteMeasure> train_;
  std::vector<Centers> previous_;
  Index last_K_ = 0;
  std::uint64_t step_ = 0;
};

std::vector<QuantizedFamily> quantize_grid(const Dataset& ds, Scheme scheme, const std::vector<Index>& Ks,
                                           const RngStream& rng, const LloydParams& params,
                                           std::optional<std::size_t> subsample = std::nullopt);

}  // namespace mqe
