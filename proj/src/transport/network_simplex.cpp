#include <algorithm>
#include <cmath>
#include <deque>

#include "wassbary/error.hpp"
#include "wassbary/solvers.hpp"

namespace wassbary::solvers {

namespace {

// a * M + b for a symbolic, arbitrarily large M.
struct BigM {
  long m = 0;
  double r = 0.0;
};

BigM operator+(BigM x, BigM y) { return {x.m + y.m, x.r + y.r}; }
BigM operator-(BigM x, BigM y) { return {x.m - y.m, x.r - y.r}; }

struct TreeArc {
  int from;
  int to;
  long id;  // i * n + j for real arcs, -1 for artificial ones
  double flow;
};

class Simplex {
 public:
  Simplex(const Vector& supply, const Vector& demand, const Matrix& cost)
      : m_(static_cast<int>(supply.size())), n_(static_cast<int>(demand.size())), cost_(cost) {
    root_ = m_ + n_;
    nodes_ = m_ + n_ + 1;
    for (int i = 0; i < m_; ++i) tree_.push_back({i, root_, -1, supply[i]});
    for (int j = 0; j < n_; ++j) tree_.push_back({root_, m_ + j, -1, demand[j]});
    const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    eps_ = 1e-12 * scale;
    parent_.resize(static_cast<std::size_t>(nodes_));
    parent_arc_.resize(static_cast<std::size_t>(nodes_));
    depth_.resize(static_cast<std::size_t>(nodes_));
    pot_.resize(static_cast<std::size_t>(nodes_));
    adj_start_.resize(static_cast<std::size_t>(nodes_) + 1);
    adj_.resize(2 * tree_.size());
  }

  FlowSolution run() {
    const long arcs = static_cast<long>(m_) * n_;
    const long block = std::max<long>(static_cast<long>(std::sqrt(static_cast<double>(arcs))), 16);
    long cursor = 0;
    FlowSolution out;
    rebuild();
    for (;;) {
      long entering = -1;
      BigM best{0, -eps_};
      long scanned = 0;
      while (scanned < arcs) {
        const long stop = std::min(scanned + block, arcs);
        for (; scanned < stop; ++scanned) {
          const long a = cursor;
          cursor = cursor + 1 == arcs ? 0 : cursor + 1;
          const int i = static_cast<int>(a / n_), j = static_cast<int>(a % n_);
          const BigM rc = BigM{0, cost_(i, j)} + pot_[static_cast<std::size_t>(i)] - pot_[static_cast<std::size_t>(m_ + j)];
          if (rc.m < best.m || (rc.m == best.m && rc.r < best.r)) {
            best = rc;
            entering = a;
          }
        }
        if (entering >= 0) break;
      }
      if (entering < 0) break;
      pivot(entering);
      ++out.pivots;
      rebuild();
    }
    double total_artificial = 0.0;
    for (const auto& t : tree_) {
      if (t.id < 0) {
        total_artificial += t.flow;
      } else if (t.flow > 0.0) {
        const auto i = static_cast<std::size_t>(t.id / n_), j = static_cast<std::size_t>(t.id % n_);
        out.plan.push_back({i, j, t.flow});
        out.cost += t.flow * cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    require(total_artificial <= 1e-9, ErrorKind::Domain, "transport marginals have different total mass");
    std::sort(out.plan.begin(), out.plan.end(), [](const PlanEntry& a, const PlanEntry& b) {
      return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    return out;
  }

 private:
  BigM arc_cost(const TreeArc& t) const {
    if (t.id < 0) return {1, 0.0};
    return {0, cost_(static_cast<Eigen::Index>(t.id / n_), static_cast<Eigen::Index>(t.id % n_))};
  }

  // Parents, depths and potentials of the current spanning tree, by BFS from the root.
  void rebuild() {
    std::fill(adj_start_.begin(), adj_start_.end(), 0);
    for (const auto& t : tree_) {
      ++adj_start_[static_cast<std::size_t>(t.from) + 1];
      ++adj_start_[static_cast<std::size_t>(t.to) + 1];
    }
    for (std::size_t k = 1; k < adj_start_.size(); ++k) adj_start_[k] += adj_start_[k - 1];
    std::vector<int> fill(adj_start_.begin(), adj_start_.end() - 1);
    for (int e = 0; e < static_cast<int>(tree_.size()); ++e) {
      adj_[static_cast<std::size_t>(fill[static_cast<std::size_t>(tree_[static_cast<std::size_t>(e)].from)]++)] = e;
      adj_[static_cast<std::size_t>(fill[static_cast<std::size_t>(tree_[static_cast<std::size_t>(e)].to)]++)] = e;
    }
    std::fill(parent_.begin(), parent_.end(), -2);
    parent_[static_cast<std::size_t>(root_)] = -1;
    parent_arc_[static_cast<std::size_t>(root_)] = -1;
    depth_[static_cast<std::size_t>(root_)] = 0;
    pot_[static_cast<std::size_t>(root_)] = {};
    queue_.clear();
    queue_.push_back(root_);
    while (!queue_.empty()) {
      const int x = queue_.front();
      queue_.pop_front();
      const auto sx = static_cast<std::size_t>(x);
      for (int k = adj_start_[sx]; k < adj_start_[sx + 1]; ++k) {
        const int e = adj_[static_cast<std::size_t>(k)];
        const auto& t = tree_[static_cast<std::size_t>(e)];
        const int y = t.from == x ? t.to : t.from;
        const auto sy = static_cast<std::size_t>(y);
        if (parent_[sy] != -2) continue;
        parent_[sy] = x;
        parent_arc_[sy] = e;
        depth_[sy] = depth_[sx] + 1;
        // Tree arcs have zero reduced cost c + pi(from) - pi(to).
        pot_[sy] = t.from == x ? pot_[sx] + arc_cost(t) : pot_[sx] - arc_cost(t);
        queue_.push_back(y);
      }
    }
  }

  void pivot(long entering) {
    const int u = static_cast<int>(entering / n_);
    const int v = m_ + static_cast<int>(entering % n_);
    // Paths from u and v up to their common ancestor (the apex).
    std::vector<int> up_u, up_v;  // nodes whose parent arc lies on the cycle
    int a = u, b = v;
    while (a != b) {
      if (depth_[static_cast<std::size_t>(a)] >= depth_[static_cast<std::size_t>(b)]) {
        up_u.push_back(a);
        a = parent_[static_cast<std::size_t>(a)];
      } else {
        up_v.push_back(b);
        b = parent_[static_cast<std::size_t>(b)];
      }
    }
    // The cycle is traversed apex -> u -> v -> apex. On the u side arcs are
    // crossed parent to child, on the v side child to parent; arcs pointing
    // against the traversal lose flow.
    auto against_on_u = [&](int x) { return tree_[static_cast<std::size_t>(parent_arc_[static_cast<std::size_t>(x)])].to == parent_[static_cast<std::size_t>(x)]; };
    auto against_on_v = [&](int x) { return tree_[static_cast<std::size_t>(parent_arc_[static_cast<std::size_t>(x)])].from == parent_[static_cast<std::size_t>(x)]; };
    double theta = std::numeric_limits<double>::infinity();
    for (int x : up_u)
      if (against_on_u(x)) theta = std::min(theta, tree_[static_cast<std::size_t>(parent_arc_[static_cast<std::size_t>(x)])].flow);
    for (int x : up_v)
      if (against_on_v(x)) theta = std::min(theta, tree_[static_cast<std::size_t>(parent_arc_[static_cast<std::size_t>(x)])].flow);
    require(std::isfinite(theta), ErrorKind::Domain, "unbounded transport problem");
    // Last blocking arc in traversal order: scan the v side from the apex
    // down, then the u side from u up.
    int leaving = -1;
    for (auto it = up_v.rbegin(); it != up_v.rend() && leaving < 0; ++it) {
      const int e = parent_arc_[static_cast<std::size_t>(*it)];
      if (against_on_v(*it) && tree_[static_cast<std::size_t>(e)].flow == theta) leaving = e;
    }
    for (auto it = up_u.begin(); it != up_u.end() && leaving < 0; ++it) {
      const int e = parent_arc_[static_cast<std::size_t>(*it)];
      if (against_on_u(*it) && tree_[static_cast<std::size_t>(e)].flow == theta) leaving = e;
    }
    if (theta > 0.0) {
      for (int x : up_u) {
        auto& t = tree_[static_cast<std::size_t>(parent_arc_[static_cast<std::size_t>(x)])];
        t.flow = against_on_u(x) ? t.flow - theta : t.flow + theta;
      }
      for (int x : up_v) {
        auto& t = tree_[static_cast<std::size_t>(parent_arc_[static_cast<std::size_t>(x)])];
        t.flow = against_on_v(x) ? t.flow - theta : t.flow + theta;
      }
    }
    tree_[static_cast<std::size_t>(leaving)] = {u, v, entering, theta};
  }

  int m_, n_, root_, nodes_;
  const Matrix& cost_;
  double eps_;
  std::vector<TreeArc> tree_;
  std::vector<int> parent_, parent_arc_, depth_;
  std::vector<BigM> pot_;
  std::vector<int> adj_start_, adj_;
  std::deque<int> queue_;
};

}  // namespace

FlowSolution network_simplex(const Vector& supply, const Vector& demand, const Matrix& cost) {
  require(supply.size() > 0 && demand.size() > 0, ErrorKind::Domain, "empty transport problem");
  require(cost.rows() == supply.size() && cost.cols() == demand.size(), ErrorKind::Shape,
          "cost matrix does not match the marginals");
  require(std::abs(supply.sum() - demand.sum()) <= 1e-9 * std::max(1.0, supply.sum()), ErrorKind::Domain,
          "transport marginals have different total mass");
  // Scale the demand so totals agree exactly enough for the artificial flows to vanish.
  Vector d = demand * (supply.sum() / demand.sum());
  Simplex s(supply, d, cost);
  return s.run();
}

}  // namespace wassbary::solvers
