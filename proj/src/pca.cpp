#include "mqe/pca.hpp"

#include <algorithm>
#include <cmath>

#include "mqe/error.hpp"
#include "mqe/parallel.hpp"

namespace mqe {

namespace {

struct Spectrum {
  Vector values;   // descending
  Matrix vectors;  // unit columns
};

Spectrum symmetric_spectrum(const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(g);
  require(solver.info() == Eigen::Success, ErrorKind::solver, "eigendecomposition failed");
  const Index n = g.rows();
  Spectrum s;
  s.values = solver.eigenvalues().reverse();
  s.vectors = solver.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < n; ++j) {
    Index arg = 0;
    s.vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (s.vectors(arg, j) < 0.0) s.vectors.col(j) *= -1.0;
  }
  return s;
}

void require_symmetric(const Matrix& g) {
  require(g.rows() == g.cols() && g.rows() > 0, ErrorKind::invalid_argument, "Gram matrix must be square");
  require(g.allFinite(), ErrorKind::invalid_argument, "Gram matrix has non-finite entries");
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = i + 1; j < g.cols(); ++j)
      require(std::abs(g(i, j) - g(j, i)) <= 1e-12 * std::max(1.0, std::abs(g(i, j))),
              ErrorKind::invalid_argument,
              "Gram matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
}

// Eigenvalues at or below this fraction of the largest are treated as zero.
constexpr double kRankTol = 1e-12;

}  // namespace

Matrix double_center(const Matrix& gram) {
  const Index n = gram.rows();
  const Matrix j = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  return j * gram * j;
}

PcaResult gram_pca(const Matrix& gram, Index q, bool centered) {
  require_symmetric(gram);
  const Index n = gram.rows();
  require(q >= 1 && q <= n, ErrorKind::invalid_argument,
          "q must lie in [1, N] = [1, " + std::to_string(n) + "], got " + std::to_string(q));
  Matrix g = 0.5 * (gram + gram.transpose());
  if (centered) g = double_center(g);
  const Spectrum s = symmetric_spectrum(0.5 * (g + g.transpose()));
  const double top = std::max(s.values[0], 0.0);

  PcaResult r;
  r.centered = centered;
  r.eigenvalues = s.values.head(q);
  r.scores.resize(n, q);
  r.coefficients.resize(n, q);
  for (Index j = 0; j < q; ++j) {
    const double lambda = s.values[j];
    r.scores.col(j) = std::sqrt(std::max(lambda, 0.0)) * s.vectors.col(j);
    if (lambda > kRankTol * top && lambda > 0.0)
      r.coefficients.col(j) = s.vectors.col(j) / std::sqrt(lambda);
    else
      r.coefficients.col(j).setZero();
  }
  return r;
}

double pca_excess_risk_from_grams(const Matrix& gram, const Matrix& gram_quantized,
                                  const Matrix& cross, Index q) {
  require_symmetric(gram);
  require_symmetric(gram_quantized);
  const Index n = gram.rows();
  require(gram_quantized.rows() == n && cross.rows() == n && cross.cols() == n,
          ErrorKind::dimension_mismatch, "Gram matrices of different sizes");
  require(q >= 1 && q <= n, ErrorKind::invalid_argument, "q must lie in [1, N]");
  const Spectrum full = symmetric_spectrum(gram);
  const Spectrum quant = symmetric_spectrum(gram_quantized);

  double captured_full = 0.0;
  for (Index j = 0; j < q; ++j) captured_full += std::max(full.values[j], 0.0);
  const double top = std::max(quant.values[0], 0.0);
  double captured_quant = 0.0;
  for (Index j = 0; j < q; ++j) {
    const double lambda = quant.values[j];
    if (!(lambda > kRankTol * top && lambda > 0.0)) continue;
    captured_quant += (cross * quant.vectors.col(j)).squaredNorm() / lambda;
  }
  return (captured_full - captured_quant) / static_cast<double>(n);
}

double pca_excess_risk(const std::vector<LotEmbedding>& full,
                       const std::vector<LotEmbedding>& quantized, Index q) {
  require(full.size() == quantized.size() && !full.empty(), ErrorKind::invalid_argument,
          "embedding families must be nonempty and of equal size");
  const std::size_t n = full.size();
  Matrix cross(static_cast<Index>(n), static_cast<Index>(n));
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t l = 0; l < n; ++l)
      cross(static_cast<Index>(i), static_cast<Index>(l)) = lot_inner(full[i], quantized[l]);
  });
  return pca_excess_risk_from_grams(lot_gram(full), lot_gram(quantized), cross, q);
}

}  // namespace mqe
