#pragma once

#include <cstdint>
#include <vector>

#include "mqe/measure.hpp"

namespace testing_support {

using namespace mqe;

inline PointMatrix random_points(Index n, Index d, RngStream& rng, double lo = -1.0, double hi = 1.0) {
  PointMatrix p(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index t = 0; t < d; ++t) p(i, t) = rng.uniform(lo, hi);
  return p;
}

inline Vector random_weights(Index n, RngStream& rng) {
  Vector w(n);
  for (Index i = 0; i < n; ++i) w[i] = 0.05 + rng.uniform01();
  return w;
}

inline DiscreteMeasure random_measure(Index n, Index d, RngStream& rng, bool uniform = false,
                                      double shift = 0.0) {
  PointMatrix p = random_points(n, d, rng);
  p.array() += shift;
  if (uniform) return DiscreteMeasure(std::move(p));
  return DiscreteMeasure(std::move(p), random_weights(n, rng));
}

inline std::vector<DiscreteMeasure> random_family(Index N, Index n, Index d, RngStream& rng) {
  std::vector<DiscreteMeasure> out;
  for (Index i = 0; i < N; ++i) out.push_back(random_measure(n, d, rng));
  return out;
}

}  // namespace testing_support
