#include <cmath>
#include <limits>

#include "wassbary/error.hpp"
#include "wassbary/solvers.hpp"

namespace wassbary::solvers {

namespace {

constexpr double kEps = 1e-11;

struct Tableau {
  Matrix t;                // rows 0..m-1 constraints, row m objective; last column rhs
  std::vector<int> basis;  // basic column of each constraint row

  int rows() const { return static_cast<int>(basis.size()); }
  int rhs() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < t.rows(); ++i)
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    basis[static_cast<std::size_t>(r)] = c;
  }

  // Minimises the objective row over columns [0, ncols); false if unbounded.
  bool optimise(int ncols) {
    const int obj = rows();
    for (;;) {
      int enter = -1;
      for (int j = 0; j < ncols; ++j)
        if (t(obj, j) < -kEps) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < obj; ++i) {
        if (t(i, enter) <= kEps) continue;
        const double ratio = t(i, rhs()) / t(i, enter);
        if (ratio < best - kEps || (ratio < best + kEps && leave >= 0 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpSolution simplex(const Matrix& a, const Vector& b, const Vector& c) {
  const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  require(b.size() == m && c.size() == n, ErrorKind::Shape, "linear program dimensions disagree");
  require((b.array() >= 0.0).all(), ErrorKind::Domain, "right-hand side must be nonnegative");

  // columns: n structural, m artificial, rhs
  Tableau tab{Matrix::Zero(m + 1, n + m + 1), std::vector<int>(static_cast<std::size_t>(m))};
  tab.t.topLeftCorner(m, n) = a;
  tab.t.block(0, n, m, m).setIdentity();
  tab.t.col(n + m).head(m) = b;
  for (int i = 0; i < m; ++i) {
    tab.basis[static_cast<std::size_t>(i)] = n + i;
    tab.t.row(m) -= tab.t.row(i);  // phase one: minimise the sum of artificials
  }
  tab.t.block(m, n, 1, m).setZero();
  tab.optimise(n + m);
  const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
  if (-tab.t(m, n + m) > 1e-9 * scale) fail(ErrorKind::Domain, "linear program is infeasible");

  // Drive remaining artificials out; rows where that is impossible are redundant.
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    if (tab.basis[static_cast<std::size_t>(i)] < n) {
      keep.push_back(i);
      continue;
    }
    int col = -1;
    for (int j = 0; j < n; ++j)
      if (std::abs(tab.t(i, j)) > 1e-9) {
        col = j;
        break;
      }
    if (col >= 0) {
      tab.pivot(i, col);
      keep.push_back(i);
    }
  }
  Tableau two{Matrix::Zero(static_cast<Eigen::Index>(keep.size()) + 1, n + 1), {}};
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto& row = tab.t.row(keep[r]);
    two.t.row(static_cast<Eigen::Index>(r)).head(n) = row.head(n);
    two.t(static_cast<Eigen::Index>(r), n) = row(n + m);
    two.basis.push_back(tab.basis[static_cast<std::size_t>(keep[r])]);
  }
  const auto obj = static_cast<Eigen::Index>(keep.size());
  two.t.row(obj).head(n) = c.transpose();
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const int bc = two.basis[r];
    if (two.t(obj, bc) != 0.0) two.t.row(obj) -= two.t(obj, bc) * two.t.row(static_cast<Eigen::Index>(r));
  }
  require(two.optimise(n), ErrorKind::Domain, "linear program is unbounded");

  LpSolution s{Vector::Zero(n), 0.0};
  for (std::size_t r = 0; r < keep.size(); ++r)
    s.x[two.basis[r]] = std::max(0.0, two.t(static_cast<Eigen::Index>(r), n));
  s.cost = c.dot(s.x);
  return s;
}

}  // namespace wassbary::solvers
