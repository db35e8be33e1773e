#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mqe/kme.hpp"
#include "mqe/measure.hpp"
#include "mqe/quantize.hpp"

namespace mqe {

/// D_ij = W2^2(family_i, family_j)
Matrix pairwise_w2sq(const std::vector<DiscreteMeasure>& family);
/// Uses one shared K x K cost matrix when the family shares its support.
Matrix pairwise_w2sq(const QuantizedFamily& qf);

/// (1/N^2) sum_ij D_ij
double dispersion_from(const Matrix& pairwise);
double dispersion(const std::vector<DiscreteMeasure>& family);
double dispersion(const QuantizedFamily& qf);

/// Distinct labels in sorted order.
std::vector<std::string> class_list(const std::vector<std::string>& labels);
std::vector<Index> class_members(const std::vector<std::string>& labels, const std::string& cls);

/// (1/N_l^2) sum_{i,j in I_l} D_ij
double wcss(const Matrix& pairwise, const std::vector<std::string>& labels, const std::string& cls);
/// (1/(N_l1 N_l2)) sum_{i in I_l1, j in I_l2} D_ij
double bcss(const Matrix& pairwise, const std::vector<std::string>& labels, const std::string& l1,
            const std::string& l2);

struct BarycenterResult {
  DiscreteMeasure measure;
  /// (1/N) sum_i W2^2(nu_t, mu_i) for every accepted iterate, starting with the initial one.
  std::vector<double> trace;
  int iterations = 0;
};

/// Fixed uniform weights 1/K; alternates optimal plans to every measure and
/// moving each atom to the average of its barycentric images.
BarycenterResult free_support_barycenter(const std::vector<DiscreteMeasure>& family, Index K,
                                         RngStream& rng, int max_iter, double tol);
BarycenterResult free_support_barycenter(const std::vector<DiscreteMeasure>& family,
                                         const PointMatrix& init, int max_iter, double tol);

/// Per cell, the largest squared distance between two points of
/// {atoms of m with positive weight in the cell} and the cell's center.
Vector cell_diameters(const DiscreteMeasure& m, const Centers& centers);

/// g^d centers at ((a_1 + 1/2)/g, ..., (a_d + 1/2)/g), a_t in {0..g-1}, g = floor(K^(1/d)),
/// listed with the first coordinate varying slowest.
Centers grid_centers(Index K, Index d);
Index grid_side(Index K, Index d);

struct BoundCheck {
  std::string name;
  double value = 0.0;  // left-hand side
  double bound = 0.0;  // right-hand side
  bool upper = true;   // value <= bound when true, value >= bound otherwise
  double slack() const { return upper ? bound - value : value - bound; }
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  double min_slack() const;
  bool holds(double tol = 1e-9) const { return checks.empty() || min_slack() >= -tol; }
};

/// SS(nu) <= (1 + 2/lambda) SS(mu) + (4 + 2 lambda) eps_K for each lambda.
BoundReport dispersion_bound_check(const Matrix& pairwise_mu, const Matrix& pairwise_nu, double eps_K,
                                   const std::vector<double>& lambdas);

/// Shared-support scheme: W2^2(nu_i, nu_j) <= 3 W2^2(mu_i, mu_j) + 6 max_k diam_k, worst pair reported.
BoundReport pairwise_bound_check(const Matrix& pairwise_mu, const Matrix& pairwise_nu,
                                 double max_cell_diameter);

/// WCSS(l, nu) <= 3 WCSS(l, mu) + (6N/N_l) eps_K for every class and
/// BCSS(l1, l2, nu) >= BCSS(l1, l2, mu)/3 - (N/N_l1 + N/N_l2) eps_K for every class pair.
BoundReport class_bound_check(const Matrix& pairwise_mu, const Matrix& pairwise_nu,
                              const std::vector<std::string>& labels, double eps_K);

/// Constant C with k(x,x) + k(y,y) - 2k(x,y) <= C^2 |x - y|^2: 1/sigma for rbf, 1 for linear.
double kernel_lipschitz_constant(const Kernel& kernel);

/// (1/N) sum_i MMD^2(mu_i, nu_i) <= C^2 eps_K
BoundReport mmd_bound_check(const std::vector<DiscreteMeasure>& mu, const std::vector<DiscreteMeasure>& nu,
                            const Kernel& kernel, double eps_K);

}  // namespace mqe
