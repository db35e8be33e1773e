#include "mqe/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mqe/error.hpp"

namespace mqe {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResidualTolerance = 1e-9;
}  // namespace

NetworkSimplex::NetworkSimplex(const Vector& supply, const Vector& demand, const RowMatrix& cost)
    : n_sources_(supply.size()),
      n_targets_(demand.size()),
      n_nodes_(n_sources_ + n_targets_),
      n_real_arcs_(n_sources_ * n_targets_),
      cost_(cost) {
  require(n_sources_ > 0 && n_targets_ > 0, ErrorKind::invalid_argument,
          "transport problem needs nonempty supply and demand");
  require(cost.rows() == n_sources_ && cost.cols() == n_targets_, ErrorKind::dimension_mismatch,
          "cost matrix shape does not match supply/demand sizes");

  supply_.assign(static_cast<std::size_t>(n_nodes_ + 1), 0.0);
  for (Node i = 0; i < n_sources_; ++i) supply_[static_cast<std::size_t>(i)] = supply[i];
  for (Node j = 0; j < n_targets_; ++j)
    supply_[static_cast<std::size_t>(n_sources_ + j)] = -demand[j];

  const std::size_t all_arcs = static_cast<std::size_t>(n_real_arcs_ + n_nodes_);
  flow_.assign(all_arcs, 0.0);
  state_.assign(all_arcs, kLower);
  art_source_.assign(static_cast<std::size_t>(n_nodes_), 0);
  art_target_.assign(static_cast<std::size_t>(n_nodes_), 0);
  art_cost_.assign(static_cast<std::size_t>(n_nodes_), 0.0);

  const std::size_t all_nodes = static_cast<std::size_t>(n_nodes_ + 1);
  pi_.assign(all_nodes, 0.0);
  parent_.assign(all_nodes, 0);
  pred_.assign(all_nodes, 0);
  thread_.assign(all_nodes, 0);
  rev_thread_.assign(all_nodes, 0);
  succ_num_.assign(all_nodes, 0);
  last_succ_.assign(all_nodes, 0);
  forward_.assign(all_nodes, 0);

  epsilon_ = 100.0 * std::numeric_limits<double>::epsilon();
  block_size_ = std::max<Arc>(static_cast<Arc>(std::sqrt(static_cast<double>(n_real_arcs_))), 10);
}

NetworkSimplex::Node NetworkSimplex::source_of(Arc a) const {
  return a < n_real_arcs_ ? a / n_targets_ : art_source_[static_cast<std::size_t>(a - n_real_arcs_)];
}

NetworkSimplex::Node NetworkSimplex::target_of(Arc a) const {
  return a < n_real_arcs_ ? n_sources_ + a % n_targets_
                          : art_target_[static_cast<std::size_t>(a - n_real_arcs_)];
}

double NetworkSimplex::cost_of(Arc a) const {
  return a < n_real_arcs_ ? cost_.data()[a] : art_cost_[static_cast<std::size_t>(a - n_real_arcs_)];
}

double NetworkSimplex::reduced_cost(Arc a) const {
  return state_[static_cast<std::size_t>(a)] *
         (cost_of(a) + pi_[static_cast<std::size_t>(source_of(a))] -
          pi_[static_cast<std::size_t>(target_of(a))]);
}

void NetworkSimplex::run() {
  double max_cost = 0.0;
  for (Arc a = 0; a < n_real_arcs_; ++a) {
    require(std::isfinite(cost_.data()[a]), ErrorKind::invalid_argument, "non-finite transport cost");
    max_cost = std::max(max_cost, std::abs(cost_.data()[a]));
  }
  const double art_cost = (max_cost + 1.0) * static_cast<double>(n_nodes_);

  // Artificial root with one tree arc per node: a feasible starting basis.
  const Node root = n_nodes_;
  parent_[root] = -1;
  pred_[root] = -1;
  thread_[root] = 0;
  rev_thread_[0] = root;
  succ_num_[root] = n_nodes_ + 1;
  last_succ_[root] = root - 1;
  pi_[root] = 0.0;
  for (Node u = 0; u < n_nodes_; ++u) {
    const Arc e = n_real_arcs_ + u;
    const auto su = static_cast<std::size_t>(u);
    const auto se = static_cast<std::size_t>(e);
    parent_[su] = root;
    pred_[su] = e;
    thread_[su] = u + 1;
    rev_thread_[su + 1] = u;
    succ_num_[su] = 1;
    last_succ_[su] = u;
    state_[se] = kTree;
    if (supply_[su] >= 0.0) {
      forward_[su] = 1;
      pi_[su] = 0.0;
      art_source_[su] = u;
      art_target_[su] = root;
      flow_[se] = supply_[su];
      art_cost_[su] = 0.0;
    } else {
      forward_[su] = 0;
      pi_[su] = art_cost;
      art_source_[su] = root;
      art_target_[su] = u;
      flow_[se] = -supply_[su];
      art_cost_[su] = art_cost;
    }
  }

  initial_pivots();

  const std::uint64_t max_iterations =
      100 * static_cast<std::uint64_t>(n_real_arcs_ + n_nodes_) + 1'000'000;
  while (find_entering_arc()) {
    if (++iterations_ > max_iterations)
      fail(ErrorKind::solver, "network simplex exceeded its iteration budget");
    pivot();
  }

  for (Arc e = n_real_arcs_; e < n_real_arcs_ + n_nodes_; ++e) {
    double& f = flow_[static_cast<std::size_t>(e)];
    if (std::abs(f) > kResidualTolerance)
      fail(ErrorKind::solver, "transport problem infeasible: unbalanced marginals");
    f = 0.0;
  }
}

void NetworkSimplex::pivot() {
  find_join_node();
  const bool change = find_leaving_arc();
  if (!change || delta_ == kInf) fail(ErrorKind::solver, "transport problem unbounded");
  change_flow(change);
  update_tree_structure();
  update_potential();
}

void NetworkSimplex::initial_pivots() {
  // Cheapest incoming arc for every demand node.
  std::vector<Arc> candidates;
  candidates.reserve(static_cast<std::size_t>(n_targets_));
  for (Node j = 0; j < n_targets_; ++j) {
    if (supply_[static_cast<std::size_t>(n_sources_ + j)] == 0.0) continue;
    Arc best = -1;
    double best_cost = kInf;
    for (Node i = 0; i < n_sources_; ++i) {
      const Arc a = i * n_targets_ + j;
      if (cost_.data()[a] < best_cost) {
        best_cost = cost_.data()[a];
        best = a;
      }
    }
    if (best >= 0) candidates.push_back(best);
  }
  for (Arc a : candidates) {
    in_arc_ = a;
    if (reduced_cost(a) >= 0.0) continue;
    pivot();
  }
}

bool NetworkSimplex::find_entering_arc() {
  auto tolerance = [&](Arc a) {
    const double scale =
        std::max({std::abs(pi_[static_cast<std::size_t>(source_of(a))]),
                  std::abs(pi_[static_cast<std::size_t>(target_of(a))]), std::abs(cost_of(a))});
    return epsilon_ * scale;
  };
  double min = 0.0;
  Arc e = next_arc_;
  Arc count = block_size_;
  for (Arc scanned = 0; scanned < n_real_arcs_; ++scanned, ++e) {
    if (e == n_real_arcs_) e = 0;
    const double c = reduced_cost(e);
    if (c < min) {
      min = c;
      in_arc_ = e;
    }
    if (--count == 0) {
      if (min < 0.0 && min < -tolerance(in_arc_)) {
        next_arc_ = e;
        return true;
      }
      count = block_size_;
    }
  }
  if (min < 0.0 && min < -tolerance(in_arc_)) {
    next_arc_ = e == n_real_arcs_ ? 0 : e;
    return true;
  }
  return false;
}

void NetworkSimplex::find_join_node() {
  Node u = source_of(in_arc_);
  Node v = target_of(in_arc_);
  while (u != v) {
    if (succ_num_[static_cast<std::size_t>(u)] < succ_num_[static_cast<std::size_t>(v)])
      u = parent_[static_cast<std::size_t>(u)];
    else
      v = parent_[static_cast<std::size_t>(v)];
  }
  join_ = u;
}

bool NetworkSimplex::find_leaving_arc() {
  Node first, second;
  if (state_[static_cast<std::size_t>(in_arc_)] == kLower) {
    first = source_of(in_arc_);
    second = target_of(in_arc_);
  } else {
    first = target_of(in_arc_);
    second = source_of(in_arc_);
  }
  delta_ = kInf;
  int result = 0;
  for (Node u = first; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const auto su = static_cast<std::size_t>(u);
    const double d = forward_[su] ? flow_[static_cast<std::size_t>(pred_[su])] : kInf;
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (Node u = second; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const auto su = static_cast<std::size_t>(u);
    const double d = forward_[su] ? kInf : flow_[static_cast<std::size_t>(pred_[su])];
    if (d <= delta_) {
      delta_ = d;
      u_out_ = u;
      result = 2;
    }
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return result != 0;
}

void NetworkSimplex::change_flow(bool change) {
  if (delta_ > 0.0) {
    const double val = state_[static_cast<std::size_t>(in_arc_)] * delta_;
    flow_[static_cast<std::size_t>(in_arc_)] += val;
    for (Node u = source_of(in_arc_); u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto su = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[su])] += forward_[su] ? -val : val;
    }
    for (Node u = target_of(in_arc_); u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto su = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[su])] += forward_[su] ? val : -val;
    }
  }
  if (change) {
    state_[static_cast<std::size_t>(in_arc_)] = kTree;
    const auto leaving = static_cast<std::size_t>(pred_[static_cast<std::size_t>(u_out_)]);
    // Uncapacitated arcs leave the basis at their lower bound.
    state_[leaving] = kLower;
  } else {
    state_[static_cast<std::size_t>(in_arc_)] = static_cast<signed char>(-state_[static_cast<std::size_t>(in_arc_)]);
  }
}

void NetworkSimplex::update_tree_structure() {
  auto& parent = parent_;
  auto& thread = thread_;
  auto& rev = rev_thread_;
  auto& last_succ = last_succ_;
  auto& succ_num = succ_num_;
  auto at = [](Node n) { return static_cast<std::size_t>(n); };

  Node u = last_succ[at(u_in_)];
  const Node old_rev_thread = rev[at(u_out_)];
  const Node old_succ_num = succ_num[at(u_out_)];
  const Node old_last_succ = last_succ[at(u_out_)];
  const Node v_out = parent[at(u_out_)];
  Node right = thread[at(u)];

  Node last;
  if (old_rev_thread == v_in_)
    last = thread[at(last_succ[at(u_out_)])];
  else
    last = thread[at(v_in_)];

  // Re-hang the stem (u_in ... u_out) below v_in, fixing the thread order.
  Node stem = u_in_;
  thread[at(v_in_)] = stem;
  dirty_revs_.clear();
  dirty_revs_.push_back(v_in_);
  Node par_stem = v_in_;
  while (stem != u_out_) {
    const Node new_stem = parent[at(stem)];
    thread[at(u)] = new_stem;
    dirty_revs_.push_back(u);

    const Node w = rev[at(stem)];
    thread[at(w)] = right;
    rev[at(right)] = w;

    parent[at(stem)] = par_stem;
    par_stem = stem;
    stem = new_stem;

    u = last_succ[at(stem)] == last_succ[at(par_stem)] ? rev[at(par_stem)] : last_succ[at(stem)];
    right = thread[at(u)];
  }
  parent[at(u_out_)] = par_stem;
  thread[at(u)] = last;
  rev[at(last)] = u;
  last_succ[at(u_out_)] = u;

  if (old_rev_thread != v_in_) {
    thread[at(old_rev_thread)] = right;
    rev[at(right)] = old_rev_thread;
  }
  for (Node d : dirty_revs_) rev[at(thread[at(d)])] = d;

  // Arc directions, subtree sizes and last successors along the reversed stem.
  Node tmp_sc = 0;
  const Node tmp_ls = last_succ[at(u_out_)];
  u = u_out_;
  while (u != u_in_) {
    const Node w = parent[at(u)];
    pred_[at(u)] = pred_[at(w)];
    forward_[at(u)] = !forward_[at(w)];
    tmp_sc += succ_num[at(u)] - succ_num[at(w)];
    succ_num[at(u)] = tmp_sc;
    last_succ[at(w)] = tmp_ls;
    u = w;
  }
  pred_[at(u_in_)] = in_arc_;
  forward_[at(u_in_)] = (u_in_ == source_of(in_arc_));
  succ_num[at(u_in_)] = old_succ_num;

  Node up_limit_in = -1;
  Node up_limit_out = -1;
  if (last_succ[at(join_)] == v_in_)
    up_limit_out = join_;
  else
    up_limit_in = join_;

  for (u = v_in_; u != up_limit_in && last_succ[at(u)] == v_in_; u = parent[at(u)])
    last_succ[at(u)] = last_succ[at(u_out_)];

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (u = v_out; u != up_limit_out && last_succ[at(u)] == old_last_succ; u = parent[at(u)])
      last_succ[at(u)] = old_rev_thread;
  } else {
    for (u = v_out; u != up_limit_out && last_succ[at(u)] == old_last_succ; u = parent[at(u)])
      last_succ[at(u)] = last_succ[at(u_out_)];
  }

  for (u = v_in_; u != join_; u = parent[at(u)]) succ_num[at(u)] += old_succ_num;
  for (u = v_out; u != join_; u = parent[at(u)]) succ_num[at(u)] -= old_succ_num;
}

void NetworkSimplex::update_potential() {
  const auto at = [](Node n) { return static_cast<std::size_t>(n); };
  const Arc pred = pred_[at(u_in_)];
  const double sigma = forward_[at(u_in_)]
                           ? pi_[at(v_in_)] - pi_[at(u_in_)] - cost_of(pred)
                           : pi_[at(v_in_)] - pi_[at(u_in_)] + cost_of(pred);
  const Node end = thread_[at(last_succ_[at(u_in_)])];
  for (Node u = u_in_; u != end; u = thread_[at(u)]) pi_[at(u)] += sigma;
}

std::vector<FlowEntry> NetworkSimplex::positive_flows() const {
  std::vector<FlowEntry> out;
  for (Arc a = 0; a < n_real_arcs_; ++a) {
    const double f = flow_[static_cast<std::size_t>(a)];
    if (f > 0.0) out.push_back({a / n_targets_, a % n_targets_, f});
  }
  return out;
}

double NetworkSimplex::total_cost() const {
  double total = 0.0;
  for (Arc a = 0; a < n_real_arcs_; ++a) {
    const double f = flow_[static_cast<std::size_t>(a)];
    if (f != 0.0) total += f * cost_.data()[a];
  }
  return total;
}

}  // namespace mqe
