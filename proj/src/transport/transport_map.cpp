#include <algorithm>
#include <cmath>
#include <limits>

#include "wassbary/error.hpp"
#include "wassbary/transport.hpp"

namespace wassbary {

// ---------------------------------------------------------------- Monotone1D

Monotone1D::Monotone1D(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  require(!x_.empty() && x_.size() == y_.size(), ErrorKind::Shape, "monotone map needs matching knots");
  for (std::size_t k = 0; k < x_.size(); ++k) {
    require(std::isfinite(x_[k]) && std::isfinite(y_[k]), ErrorKind::Domain, "map knots must be finite");
    if (k > 0) {
      require(x_[k - 1] < x_[k], ErrorKind::Domain, "map knots must be strictly increasing");
      require(y_[k - 1] <= y_[k], ErrorKind::Domain, "map values must be nondecreasing");
    }
  }
}

Monotone1D Monotone1D::from_knots(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && !x.empty(), ErrorKind::Shape, "monotone map needs matching knots");
  std::vector<double> kx, ky;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!kx.empty() && x[k] <= kx.back()) continue;
    kx.push_back(x[k]);
    ky.push_back(ky.empty() ? y[k] : std::max(y[k], ky.back()));
  }
  return Monotone1D(std::move(kx), std::move(ky));
}

Monotone1D Monotone1D::identity(double lo, double hi) { return Monotone1D({lo, hi}, {lo, hi}); }

Monotone1D Monotone1D::affine(double intercept, double slope, double lo, double hi) {
  require(slope >= 0.0, ErrorKind::Domain, "affine monotone map needs a nonnegative slope");
  return Monotone1D({lo, hi}, {intercept + slope * lo, intercept + slope * hi});
}

double Monotone1D::operator()(double t) const {
  const std::size_t n = x_.size();
  if (n == 1) return y_[0];
  std::size_t k;
  if (t <= x_[0]) {
    k = 0;
  } else if (t >= x_[n - 1]) {
    k = n - 2;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
  }
  const double slope = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
  return y_[k] + slope * (t - x_[k]);
}

// ---------------------------------------------------------------- LinearMap

LinearMap::LinearMap(Matrix matrix) : matrix_(std::move(matrix)), brenier_(true) {
  require(matrix_.rows() > 0 && matrix_.rows() == matrix_.cols(), ErrorKind::Shape, "linear map must be square");
  require(matrix_.allFinite(), ErrorKind::Domain, "linear map must be finite");
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  require((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale, ErrorKind::Domain,
          "optimal linear map must be symmetric");
  matrix_ = 0.5 * (matrix_ + matrix_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
  double smallest = es.eigenvalues().minCoeff();
  if (!(smallest > 0.0)) throw ConditioningError("optimal linear map is not positive-definite", smallest);
}

LinearMap LinearMap::general(Matrix matrix) {
  require(matrix.rows() > 0 && matrix.rows() == matrix.cols(), ErrorKind::Shape, "linear map must be square");
  require(matrix.allFinite(), ErrorKind::Domain, "linear map must be finite");
  return LinearMap(std::move(matrix), false);
}

// ---------------------------------------------------------------- ProductMap

ProductMap::ProductMap(std::vector<TransportMap> f) : factors(std::move(f)) {
  require(!factors.empty(), ErrorKind::Domain, "product map needs at least one factor");
}
ProductMap::ProductMap(const ProductMap&) = default;
ProductMap::ProductMap(ProductMap&&) noexcept = default;
ProductMap& ProductMap::operator=(const ProductMap&) = default;
ProductMap& ProductMap::operator=(ProductMap&&) noexcept = default;
ProductMap::~ProductMap() = default;

int ProductMap::dim() const {
  int d = 0;
  for (const auto& f : factors) d += f.dim();
  return d;
}

// ---------------------------------------------------------------- Assignment

Assignment::Assignment(Matrix source, Matrix image, std::vector<int> target_index)
    : source_(std::move(source)), image_(std::move(image)), target_index_(std::move(target_index)) {
  require(source_.rows() == image_.rows() && source_.cols() == image_.cols(), ErrorKind::Shape,
          "assignment source and image differ in shape");
  require(target_index_.empty() || target_index_.size() == size(), ErrorKind::Shape,
          "one target index per source point required");
}

bool Assignment::is_bijection() const {
  if (target_index_.size() != size()) return false;
  std::vector<char> seen(size(), 0);
  for (int t : target_index_) {
    if (t < 0 || static_cast<std::size_t>(t) >= size() || seen[static_cast<std::size_t>(t)]) return false;
    seen[static_cast<std::size_t>(t)] = 1;
  }
  return true;
}

std::size_t Assignment::nearest_source(const Vector& x) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < source_.rows(); ++i) {
    double d = (source_.row(i).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(i);
      if (d == 0.0) break;
    }
  }
  return best;
}

// ---------------------------------------------------------------- GridMap

GridMap::GridMap(Compactum window, std::vector<int> cells_per_axis, Matrix displacement, std::vector<bool> known)
    : window_(std::move(window)),
      cells_(std::move(cells_per_axis)),
      displacement_(std::move(displacement)),
      lazy_(std::make_shared<Lazy>()) {
  require(static_cast<int>(cells_.size()) == window_.dim(), ErrorKind::Shape, "one cell count per axis required");
  Eigen::Index total = 1;
  for (int c : cells_) {
    require(c > 0, ErrorKind::Domain, "cell counts must be positive");
    total *= c;
  }
  require(displacement_.rows() == total && displacement_.cols() == window_.dim(), ErrorKind::Shape,
          "displacement field does not match the grid");
  require(known.empty() || static_cast<Eigen::Index>(known.size()) == total, ErrorKind::Shape,
          "one known flag per cell required");
  if (known.empty() || std::all_of(known.begin(), known.end(), [](bool b) { return b; })) return;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index k = 0; k < total; ++k)
    if (known[static_cast<std::size_t>(k)]) rows.push_back(k);
  require(!rows.empty(), ErrorKind::Domain, "grid map needs at least one known cell");
  Planes fitted = fit(rows);
  Planes all{Matrix(total, dim()), Vector(total)};
  std::size_t next = 0;
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::Index src = 0;
    if (next < rows.size() && rows[next] == k) {
      src = static_cast<Eigen::Index>(next++);
    } else {
      (fitted.images * centre(k) - fitted.offsets).maxCoeff(&src);
      displacement_.row(k) = fitted.images.row(src) - centre(k).transpose();
    }
    all.images.row(k) = fitted.images.row(src);
    all.offsets[k] = fitted.offsets[src];
  }
  std::call_once(lazy_->once, [&] { lazy_->planes = std::move(all); });
}

Vector GridMap::centre(Eigen::Index k) const {
  Vector x(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    const int n = cells_[static_cast<std::size_t>(a)];
    const double w = (window_.upper()[a] - window_.lower()[a]) / n;
    x[a] = window_.lower()[a] + (static_cast<double>(k % n) + 0.5) * w;
    k /= n;
  }
  return x;
}

// Offsets a_k with y_k a subgradient at x_k of max_l (<x, y_l> - a_l), by
// Bellman-Ford on the cyclic-monotonicity constraints.
GridMap::Planes GridMap::fit(const std::vector<Eigen::Index>& rows) const {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix x(n, dim()), y(n, dim());
  for (Eigen::Index k = 0; k < n; ++k) {
    x.row(k) = centre(rows[static_cast<std::size_t>(k)]).transpose();
    y.row(k) = x.row(k) + displacement_.row(rows[static_cast<std::size_t>(k)]);
  }
  const Vector own = (x.array() * y.array()).rowwise().sum();
  Vector dist = Vector::Zero(n);  // -phi(x_k)
  Vector a = own;
  const double tol = 1e-13 * (1.0 + own.cwiseAbs().maxCoeff());
  for (Eigen::Index round = 0; round <= n; ++round) {
    bool changed = false;
    for (Eigen::Index l = 0; l < n; ++l) {
      const double best = (a - y * x.row(l).transpose()).minCoeff();
      if (best < dist[l] - tol) {
        dist[l] = best;
        a[l] = best + own[l];
        changed = true;
      }
    }
    if (!changed) break;
  }
  return {std::move(y), std::move(a)};
}

const GridMap::Planes& GridMap::planes() const {
  std::call_once(lazy_->once, [this] {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(displacement_.rows()));
    for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = static_cast<Eigen::Index>(k);
    lazy_->planes = fit(rows);
  });
  return lazy_->planes;
}

Vector GridMap::displacement_at(const Vector& x) const {
  require(x.size() == dim(), ErrorKind::Shape, "point and map differ in dimension");
  Eigen::Index flat = 0;
  bool on_centre = true;
  for (int a = 0; a < dim(); ++a) {
    const int n = cells_[static_cast<std::size_t>(a)];
    const double w = (window_.upper()[a] - window_.lower()[a]) / n;
    const double pos = (x[a] - window_.lower()[a]) / w - 0.5;
    const double r = std::round(pos);
    if (r < 0.0 || r > n - 1 || std::abs(pos - r) > 1e-12) on_centre = false;
    flat = flat * n + static_cast<Eigen::Index>(std::clamp(r, 0.0, static_cast<double>(n - 1)));
  }
  if (on_centre) return displacement_.row(flat).transpose();
  const Planes& p = planes();
  Eigen::Index k = 0;
  (p.images * x - p.offsets).maxCoeff(&k);
  return p.images.row(k).transpose() - x;
}

// ---------------------------------------------------------------- TransportMap

int TransportMap::dim() const {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Monotone1D>)
          return 1;
        else
          return m.dim();
      },
      rep);
}

Vector TransportMap::operator()(const Vector& x) const {
  require(x.size() == dim(), ErrorKind::Shape, "point and map differ in dimension");
  switch (kind()) {
    case MapKind::Monotone1D: return Vector::Constant(1, as<Monotone1D>()(x[0]));
    case MapKind::Linear: return as<LinearMap>().matrix() * x;
    case MapKind::Product: {
      Vector out(x.size());
      Eigen::Index col = 0;
      for (const auto& f : as<ProductMap>().factors) {
        const int d = f.dim();
        out.segment(col, d) = f(x.segment(col, d));
        col += d;
      }
      return out;
    }
    case MapKind::Assignment: {
      const auto& a = as<Assignment>();
      return a.image().row(static_cast<Eigen::Index>(a.nearest_source(x))).transpose();
    }
    case MapKind::Grid: return x + as<GridMap>().displacement_at(x);
  }
  return x;
}

MonotonicityReport check_monotone(const TransportMap& t, std::span<const std::pair<Vector, Vector>> probes) {
  MonotonicityReport r;
  r.worst = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : probes) {
    const Vector dx = x - y;
    const double v = (t(x) - t(y)).dot(dx);
    r.worst = std::min(r.worst, v);
    const double scale = dx.squaredNorm() + (t(x) - t(y)).squaredNorm();
    if (v < -1e-12 * std::max(scale, 1e-300)) r.monotone = false;
  }
  if (probes.empty()) r.worst = 0.0;
  return r;
}

// ---------------------------------------------------------------- compose

namespace {

// Points t with inner(t) == v, on every strictly increasing piece of inner
// (including the linear extensions).
void preimages(const Monotone1D& inner, double v, std::vector<double>& out) {
  const auto& x = inner.x();
  const auto& y = inner.y();
  const std::size_t n = x.size();
  if (n < 2) return;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double y0 = y[k], y1 = y[k + 1];
    if (y1 <= y0) continue;
    const double slope = (y1 - y0) / (x[k + 1] - x[k]);
    const double t = x[k] + (v - y0) / slope;
    const bool first = k == 0, last = k + 2 == n;
    if ((v >= y0 || first) && (v <= y1 || last)) out.push_back(t);
  }
}

Monotone1D compose_monotone(const Monotone1D& outer, const Monotone1D& inner) {
  std::vector<double> knots(inner.x());
  for (double v : outer.x()) preimages(inner, v, knots);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  if (knots.size() == 1) knots.push_back(knots[0] + 1.0);
  std::vector<double> y(knots.size());
  for (std::size_t k = 0; k < knots.size(); ++k) y[k] = outer(inner(knots[k]));
  return Monotone1D::from_knots(knots, y);
}

}  // namespace

TransportMap compose(const TransportMap& outer, const TransportMap& inner) {
  require(outer.dim() == inner.dim(), ErrorKind::Shape, "composed maps differ in dimension");
  require(outer.kind() == inner.kind(), ErrorKind::Representation, "composition needs maps of the same kind");
  switch (outer.kind()) {
    case MapKind::Monotone1D: return compose_monotone(outer.as<Monotone1D>(), inner.as<Monotone1D>());
    case MapKind::Linear:
      return LinearMap::general(outer.as<LinearMap>().matrix() * inner.as<LinearMap>().matrix());
    case MapKind::Product: {
      const auto& fo = outer.as<ProductMap>().factors;
      const auto& fi = inner.as<ProductMap>().factors;
      require(fo.size() == fi.size(), ErrorKind::Representation, "product maps factor differently");
      std::vector<TransportMap> out;
      for (std::size_t k = 0; k < fo.size(); ++k) out.push_back(compose(fo[k], fi[k]));
      return ProductMap(std::move(out));
    }
    default: fail(ErrorKind::Representation, "composition is only defined for monotone, linear and product maps");
  }
}

}  // namespace wassbary
