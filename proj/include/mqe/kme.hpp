#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mqe/measure.hpp"

namespace mqe {

enum class KernelKind { rbf, linear, linear_plus_square };

struct Kernel {
  KernelKind kind = KernelKind::rbf;
  double sigma = 1.0;  // rbf bandwidth

  static Kernel rbf(double sigma);
  static Kernel linear() { return Kernel{KernelKind::linear, 1.0}; }
  static Kernel linear_plus_square() { return Kernel{KernelKind::linear_plus_square, 1.0}; }

  /// "rbf:<sigma>", "linear" or "linsq".
  static Kernel parse(const std::string& spec);
  std::string spec() const;
  void validate() const;

  double operator()(const double* x, const double* y, Index d) const;
  template <typename A, typename B>
  double operator()(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    const Eigen::RowVectorXd a = x;
    const Eigen::RowVectorXd b = y;
    return (*this)(a.data(), b.data(), a.size());
  }
};

/// K(X, Y)_{kl} = k(x_k, y_l)
Matrix kernel_matrix(const PointMatrix& x, const PointMatrix& y, const Kernel& kernel);

/// sum_{k,l} a_k b_l k(x_k, y_l)
double kme_inner(const DiscreteMeasure& a, const DiscreteMeasure& b, const Kernel& kernel);
Matrix kme_gram(const std::vector<DiscreteMeasure>& family, const Kernel& kernel);
double mmd(const DiscreteMeasure& a, const DiscreteMeasure& b, const Kernel& kernel);

/// Random Fourier features for the rbf kernel:
/// phi(x) = scale * (cos(w_1.x), ..., cos(w_h.x), sin(w_1.x), ..., sin(w_h.x)), h = s / 2.
struct RffMap {
  PointMatrix frequencies;  // h x d
  double sigma = 1.0;
  double scale = 1.0;       // sqrt(2 / s), or 1 for the raw map
  std::uint64_t seed = 0;

  Index features() const noexcept { return 2 * frequencies.rows(); }
  Vector features_of(const double* x) const;
};

/// Frequencies i.i.d. N(0, sigma^-2 I_d).
RffMap rff_map(const Kernel& kernel, Index d, Index s, RngStream& rng, bool raw = false);
Vector rff_embed(const DiscreteMeasure& m, const RffMap& map);
/// N x s matrix of embedded measures.
Matrix rff_embed_all(const std::vector<DiscreteMeasure>& family, const RffMap& map);

struct NystromKme {
  PointMatrix landmarks;
  Vector alpha;
  double ridge = 0.0;
};

/// Landmarks drawn from m without replacement, proportional to weight.
/// ridge defaults to 1e-8 * trace(K_LL) / K.
NystromKme nystrom_fit(const DiscreteMeasure& m, Index K, const Kernel& kernel,
                       std::optional<double> ridge, RngStream& rng);
NystromKme nystrom_fit_landmarks(const DiscreteMeasure& m, const PointMatrix& landmarks,
                                 const Kernel& kernel, std::optional<double> ridge);
/// |sum_k alpha_k k(x_k, .) - phi(m)|_H^2
double nystrom_residual_sq(const NystromKme& fit, const DiscreteMeasure& m, const Kernel& kernel);
Matrix nystrom_gram(const std::vector<NystromKme>& family, const Kernel& kernel);

/// sigma = sqrt(median squared distance between points of the same measure),
/// over all pairs when there are at most pair_budget of them, else over
/// pair_budget sampled pairs.
double median_heuristic(const Dataset& ds, std::size_t pair_budget, RngStream& rng);

}  // namespace mqe
