#include "mqe/kme.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "mqe/error.hpp"
#include "mqe/io.hpp"
#include "mqe/parallel.hpp"

namespace mqe {

Kernel Kernel::rbf(double sigma) {
  Kernel k{KernelKind::rbf, sigma};
  k.validate();
  return k;
}

Kernel Kernel::parse(const std::string& spec) {
  if (spec == "linear") return linear();
  if (spec == "linsq" || spec == "linear-plus-square") return linear_plus_square();
  if (spec.rfind("rbf:", 0) == 0) {
    const std::string value = spec.substr(4);
    double sigma = 0.0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), sigma);
    require(ec == std::errc() && end == value.data() + value.size(), ErrorKind::invalid_argument,
            "cannot parse rbf bandwidth in kernel spec '" + spec + "'");
    return rbf(sigma);
  }
  fail(ErrorKind::invalid_argument,
       "unknown kernel spec '" + spec + "' (expected rbf:<sigma>, linear or linsq)");
}

std::string Kernel::spec() const {
  switch (kind) {
    case KernelKind::rbf: return "rbf:" + format_double(sigma);
    case KernelKind::linear: return "linear";
    case KernelKind::linear_plus_square: return "linsq";
  }
  return "?";
}

void Kernel::validate() const {
  if (kind == KernelKind::rbf)
    require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::invalid_argument,
            "rbf bandwidth must be positive, got " + format_double(sigma));
}

double Kernel::operator()(const double* x, const double* y, Index d) const {
  if (kind == KernelKind::rbf) {
    double s = 0.0;
    for (Index t = 0; t < d; ++t) {
      const double diff = x[t] - y[t];
      s += diff * diff;
    }
    return std::exp(-s / (2.0 * sigma * sigma));
  }
  double dot = 0.0;
  for (Index t = 0; t < d; ++t) dot += x[t] * y[t];
  return kind == KernelKind::linear ? dot : dot + dot * dot;
}

Matrix kernel_matrix(const PointMatrix& x, const PointMatrix& y, const Kernel& kernel) {
  require(x.cols() == y.cols(), ErrorKind::dimension_mismatch, "point sets differ in dimension");
  const Index d = x.cols();
  Matrix k(x.rows(), y.rows());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < y.rows(); ++j) k(i, j) = kernel(x.data() + i * d, y.data() + j * d, d);
  return k;
}

double kme_inner(const DiscreteMeasure& a, const DiscreteMeasure& b, const Kernel& kernel) {
  require(a.dim() == b.dim(), ErrorKind::dimension_mismatch, "measures differ in dimension");
  const Index d = a.dim();
  const double* pa = a.points().data();
  const double* pb = b.points().data();
  double total = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    if (a.weight(k) == 0.0) continue;
    double row = 0.0;
    for (Index l = 0; l < b.size(); ++l) row += b.weight(l) * kernel(pa + k * d, pb + l * d, d);
    total += a.weight(k) * row;
  }
  return total;
}

Matrix kme_gram(const std::vector<DiscreteMeasure>& family, const Kernel& kernel) {
  kernel.validate();
  require(!family.empty(), ErrorKind::invalid_argument, "empty family");
  const std::size_t n = family.size();
  Matrix g(static_cast<Index>(n), static_cast<Index>(n));
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = kme_inner(family[i], family[j], kernel);
      g(static_cast<Index>(i), static_cast<Index>(j)) = v;
      g(static_cast<Index>(j), static_cast<Index>(i)) = v;
    }
  });
  return g;
}

double mmd(const DiscreteMeasure& a, const DiscreteMeasure& b, const Kernel& kernel) {
  kernel.validate();
  const double sq = kme_inner(a, a, kernel) - 2.0 * kme_inner(a, b, kernel) + kme_inner(b, b, kernel);
  return std::sqrt(std::max(0.0, sq));
}

Vector RffMap::features_of(const double* x) const {
  const Index h = frequencies.rows();
  const Index d = frequencies.cols();
  Vector f(2 * h);
  for (Index r = 0; r < h; ++r) {
    double dot = 0.0;
    for (Index t = 0; t < d; ++t) dot += frequencies(r, t) * x[t];
    f[r] = scale * std::cos(dot);
    f[h + r] = scale * std::sin(dot);
  }
  return f;
}

RffMap rff_map(const Kernel& kernel, Index d, Index s, RngStream& rng, bool raw) {
  require(kernel.kind == KernelKind::rbf, ErrorKind::invalid_argument,
          "random Fourier features need an rbf kernel");
  kernel.validate();
  require(s >= 2 && s % 2 == 0, ErrorKind::invalid_argument,
          "feature count s must be even and >= 2, got " + std::to_string(s));
  RffMap map;
  map.sigma = kernel.sigma;
  map.seed = rng.seed();
  map.scale = raw ? 1.0 : std::sqrt(2.0 / static_cast<double>(s));
  map.frequencies.resize(s / 2, d);
  for (Index r = 0; r < s / 2; ++r)
    for (Index t = 0; t < d; ++t) map.frequencies(r, t) = rng.normal() / kernel.sigma;
  return map;
}

Vector rff_embed(const DiscreteMeasure& m, const RffMap& map) {
  require(m.dim() == map.frequencies.cols(), ErrorKind::dimension_mismatch,
          "measure and feature map differ in dimension");
  Vector out = Vector::Zero(map.features());
  for (Index j = 0; j < m.size(); ++j) {
    if (m.weight(j) == 0.0) continue;
    out += m.weight(j) * map.features_of(m.points().data() + j * m.dim());
  }
  return out;
}

Matrix rff_embed_all(const std::vector<DiscreteMeasure>& family, const RffMap& map) {
  Matrix out(static_cast<Index>(family.size()), map.features());
  parallel_for(family.size(), [&](std::size_t i) {
    out.row(static_cast<Index>(i)) = rff_embed(family[i], map).transpose();
  });
  return out;
}

NystromKme nystrom_fit_landmarks(const DiscreteMeasure& m, const PointMatrix& landmarks,
                                 const Kernel& kernel, std::optional<double> ridge) {
  kernel.validate();
  require(landmarks.rows() >= 1, ErrorKind::invalid_argument, "need at least one landmark");
  const Index K = landmarks.rows();
  const Matrix kll = kernel_matrix(landmarks, landmarks, kernel);
  const Vector rhs = kernel_matrix(landmarks, m.points(), kernel) * m.weights();
  NystromKme fit;
  fit.landmarks = landmarks;
  fit.ridge = ridge ? *ridge : 1e-8 * kll.trace() / static_cast<double>(K);
  require(fit.ridge >= 0.0, ErrorKind::invalid_argument, "ridge must be >= 0");
  const Matrix system = kll + fit.ridge * Matrix::Identity(K, K);
  if (fit.ridge > 0.0) {
    Eigen::LLT<Matrix> llt(system);
    require(llt.info() == Eigen::Success, ErrorKind::singular,
            "landmark kernel system is not positive definite; increase the ridge");
    fit.alpha = llt.solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<Matrix> qr(system);
    require(qr.rank() == K, ErrorKind::singular,
            "landmark kernel matrix is singular with ridge 0; set a positive ridge");
    fit.alpha = qr.solve(rhs);
  }
  require(fit.alpha.allFinite(), ErrorKind::singular, "Nystrom weights are not finite");
  return fit;
}

NystromKme nystrom_fit(const DiscreteMeasure& m, Index K, const Kernel& kernel,
                       std::optional<double> ridge, RngStream& rng) {
  require(K >= 1, ErrorKind::invalid_argument, "K must be >= 1");
  const DiscreteMeasure merged = merge_duplicate_atoms(m);
  const auto idx = weighted_sample_without_replacement(merged.weights(), static_cast<std::size_t>(K), rng);
  PointMatrix landmarks(K, m.dim());
  for (Index k = 0; k < K; ++k) landmarks.row(k) = merged.point(idx[static_cast<std::size_t>(k)]);
  return nystrom_fit_landmarks(m, landmarks, kernel, ridge);
}

double nystrom_residual_sq(const NystromKme& fit, const DiscreteMeasure& m, const Kernel& kernel) {
  const double self = kme_inner(m, m, kernel);
  const Vector klm = kernel_matrix(fit.landmarks, m.points(), kernel) * m.weights();
  const Matrix kll = kernel_matrix(fit.landmarks, fit.landmarks, kernel);
  return self - 2.0 * fit.alpha.dot(klm) + fit.alpha.dot(kll * fit.alpha);
}

Matrix nystrom_gram(const std::vector<NystromKme>& family, const Kernel& kernel) {
  kernel.validate();
  require(!family.empty(), ErrorKind::invalid_argument, "empty family");
  const std::size_t n = family.size();
  Matrix g(static_cast<Index>(n), static_cast<Index>(n));
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = family[i].alpha.dot(
          kernel_matrix(family[i].landmarks, family[j].landmarks, kernel) * family[j].alpha);
      g(static_cast<Index>(i), static_cast<Index>(j)) = v;
      g(static_cast<Index>(j), static_cast<Index>(i)) = v;
    }
  });
  return g;
}

double median_heuristic(const Dataset& ds, std::size_t pair_budget, RngStream& rng) {
  Vector pairs(static_cast<Index>(ds.size()));
  double total_pairs = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double n = static_cast<double>(ds.measure(i).size());
    pairs[static_cast<Index>(i)] = n * (n - 1.0) / 2.0;
    total_pairs += pairs[static_cast<Index>(i)];
  }
  require(total_pairs > 0.0, ErrorKind::invalid_argument,
          "median heuristic needs a measure with at least two points");

  std::vector<double> values;
  if (total_pairs <= static_cast<double>(pair_budget)) {
    for (const auto& m : ds.measures())
      for (Index a = 0; a < m.size(); ++a)
        for (Index b = a + 1; b < m.size(); ++b) values.push_back(squared_distance(m.point(a), m.point(b)));
  } else {
    values.reserve(pair_budget);
    for (std::size_t r = 0; r < pair_budget; ++r) {
      const auto& m = ds.measure(static_cast<std::size_t>(sample_index(pairs, rng)));
      const auto n = static_cast<std::uint64_t>(m.size());
      const auto a = static_cast<Index>(rng.below(n));
      auto b = static_cast<Index>(rng.below(n - 1));
      if (b >= a) ++b;
      values.push_back(squared_distance(m.point(a), m.point(b)));
    }
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  const double median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  require(median > 0.0, ErrorKind::invalid_argument,
          "median squared distance is 0; set the rbf bandwidth manually");
  return std::sqrt(median);
}

}  // namespace mqe
