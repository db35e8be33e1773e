#pragma once

#include <cstdint>
#include <vector>

#include "mqe/measure.hpp"

namespace mqe {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FlowEntry {
  Index source;
  Index target;
  double mass;
};

/// Primal network simplex for the uncapacitated transportation problem
///
///   min sum_ij C_ij P_ij  s.t.  P 1 = supply, P^T 1 = demand, P >= 0
///
/// on the complete bipartite graph. Arc (i, j) has index i * n_targets + j.
/// Entering arcs come from a block search over arc indices; the first arc
/// with the most negative reduced cost in a block wins, so runs are
/// deterministic for a given input order. Leaving arcs follow the strongly
/// feasible tree rule, which rules out cycling on degenerate pivots.
class NetworkSimplex {
 public:
  /// supply and demand must be nonnegative with equal sums (up to rounding,
  /// which the artificial root absorbs).
  NetworkSimplex(const Vector& supply, const Vector& demand, const RowMatrix& cost);

  /// Solves; throws Error(solver) on infeasibility or iteration overflow.
  void run();

  /// Arcs carrying positive flow, ordered by (source, target).
  std::vector<FlowEntry> positive_flows() const;
  double total_cost() const;
  std::uint64_t iterations() const noexcept { return iterations_; }

 private:
  enum : signed char { kTree = 0, kLower = 1 };

  using Node = std::int64_t;
  using Arc = std::int64_t;

  Node source_of(Arc a) const;
  Node target_of(Arc a) const;
  double cost_of(Arc a) const;
  double reduced_cost(Arc a) const;

  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow(bool change);
  void update_tree_structure();
  void update_potential();
  void initial_pivots();
  void pivot();

  Node n_sources_;
  Node n_targets_;
  Node n_nodes_;
  Arc n_real_arcs_;
  const RowMatrix& cost_;

  std::vector<double> supply_;
  std::vector<double> flow_;
  std::vector<signed char> state_;
  std::vector<Node> art_source_;
  std::vector<Node> art_target_;
  std::vector<double> art_cost_;

  std::vector<double> pi_;
  std::vector<Node> parent_;
  std::vector<Arc> pred_;
  std::vector<Node> thread_;
  std::vector<Node> rev_thread_;
  std::vector<Node> succ_num_;
  std::vector<Node> last_succ_;
  std::vector<char> forward_;
  std::vector<Node> dirty_revs_;

  Arc next_arc_ = 0;
  Arc block_size_ = 0;
  double epsilon_ = 0.0;

  Arc in_arc_ = 0;
  Node join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0;
  double delta_ = 0.0;
  std::uint64_t iterations_ = 0;
};

}  // namespace mqe
