#include "wassbary/measures.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "wassbary/error.hpp"
#include "wassbary/kernels.hpp"
#include "wassbary/transport.hpp"

namespace wassbary {

// ---------------------------------------------------------------- Compactum

Compactum::Compactum(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() > 0, ErrorKind::Shape, "compactum needs a positive dimension");
  require(lower_.size() == upper_.size(), ErrorKind::Shape, "compactum bounds differ in dimension");
  for (int k = 0; k < lower_.size(); ++k)
    require(std::isfinite(lower_[k]) && std::isfinite(upper_[k]) && lower_[k] < upper_[k],
            ErrorKind::Domain, "compactum needs lower < upper on every axis");
}

Compactum Compactum::unit(int dim) { return Compactum(Vector::Zero(dim), Vector::Ones(dim)); }

bool Compactum::contains(const Vector& x, double slack) const {
  if (x.size() != lower_.size()) return false;
  for (int k = 0; k < x.size(); ++k)
    if (x[k] < lower_[k] - slack || x[k] > upper_[k] + slack) return false;
  return true;
}

Vector Compactum::clamp(const Vector& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

Compactum Compactum::shrunk(double fraction) const {
  require(fraction >= 0.0 && fraction < 0.5, ErrorKind::Domain, "shrink fraction must lie in [0, 1/2)");
  Vector w = widths();
  return Compactum(lower_ + fraction * w, upper_ - fraction * w);
}

bool operator==(const Compactum& a, const Compactum& b) {
  return a.lower() == b.lower() && a.upper() == b.upper();
}

// ---------------------------------------------------------------- Measure1D

Measure1D::Measure1D(Kind kind, std::vector<double> values, QuantileFunction function)
    : kind_(kind), values_(std::move(values)), function_(std::move(function)) {}

Measure1D Measure1D::from_quantile_grid(std::vector<double> values) {
  require(!values.empty(), ErrorKind::Domain, "empty quantile grid");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]), ErrorKind::Domain, "quantile values must be finite");
    if (i > 0) require(values[i - 1] <= values[i], ErrorKind::Domain, "quantile values must be nondecreasing");
  }
  QuantileFunction f = QuantileFunction::step(values);
  return Measure1D(Kind::QuantileGrid, std::move(values), std::move(f));
}

Measure1D Measure1D::from_sample(std::vector<double> atoms) {
  require(!atoms.empty(), ErrorKind::Domain, "empty sample");
  for (double a : atoms) require(std::isfinite(a), ErrorKind::Domain, "sample values must be finite");
  std::sort(atoms.begin(), atoms.end());
  QuantileFunction f = QuantileFunction::step(atoms);
  return Measure1D(Kind::Sample, std::move(atoms), std::move(f));
}

Measure1D Measure1D::from_quantile_function(QuantileFunction q) {
  return Measure1D(Kind::PiecewiseLinear, {}, std::move(q));
}

Measure1D Measure1D::point_mass(double at, std::size_t grid_size) {
  return from_quantile_grid(std::vector<double>(grid_size, at));
}

Measure1D Measure1D::tabulate(const std::function<double(double)>& inverse_cdf, std::size_t grid_size) {
  std::vector<double> v(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) v[i] = inverse_cdf(level(i, grid_size));
  for (std::size_t i = 1; i < grid_size; ++i) v[i] = std::max(v[i], v[i - 1]);
  return from_quantile_grid(std::move(v));
}

double quantile(const Measure1D& m, double q) {
  require(q > 0.0 && q < 1.0, ErrorKind::Domain, "quantile level must lie in (0, 1)");
  const auto& v = m.values();
  switch (m.kind()) {
    case Measure1D::Kind::QuantileGrid: {
      const std::size_t n = v.size();
      double pos = q * static_cast<double>(n) - 0.5;  // fractional grid index
      if (pos <= 0.0) return v.front();
      if (pos >= static_cast<double>(n - 1)) return v.back();
      auto i = static_cast<std::size_t>(pos);
      double t = pos - static_cast<double>(i);
      return v[i] + (v[i + 1] - v[i]) * t;
    }
    case Measure1D::Kind::Sample: {
      const std::size_t n = v.size();
      auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
      idx = std::clamp<std::size_t>(idx, 1, n);
      return v[idx - 1];
    }
    case Measure1D::Kind::PiecewiseLinear:
      return m.quantile_function()(q);
  }
  return 0.0;
}

// ---------------------------------------------------------------- Gaussian

GaussianMeasure::GaussianMeasure(Matrix covariance) {
  require(covariance.rows() > 0 && covariance.rows() == covariance.cols(), ErrorKind::Shape,
          "covariance must be square");
  require(covariance.allFinite(), ErrorKind::Domain, "covariance must be finite");
  covariance_ = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(covariance_, Eigen::EigenvaluesOnly);
  double smallest = es.eigenvalues().minCoeff();
  if (!(smallest > 0.0)) throw ConditioningError("covariance is not positive-definite", smallest);
}

GaussianMeasure GaussianMeasure::isotropic(int dim, double variance) {
  return GaussianMeasure(variance * Matrix::Identity(dim, dim));
}

// ---------------------------------------------------------------- Product

ProductMeasure::ProductMeasure(std::vector<Measure> f) : factors(std::move(f)) {
  require(!factors.empty(), ErrorKind::Domain, "product measure needs at least one factor");
}
ProductMeasure::ProductMeasure(const ProductMeasure&) = default;
ProductMeasure::ProductMeasure(ProductMeasure&&) noexcept = default;
ProductMeasure& ProductMeasure::operator=(const ProductMeasure&) = default;
ProductMeasure& ProductMeasure::operator=(ProductMeasure&&) noexcept = default;
ProductMeasure::~ProductMeasure() = default;

int ProductMeasure::dim() const {
  int d = 0;
  for (const auto& f : factors) d += f.dim();
  return d;
}

// ---------------------------------------------------------------- Discrete

namespace {

// Row order sorted lexicographically; used for distinctness and merging.
std::vector<Eigen::Index> lexicographic_order(const Matrix& p) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(p.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      if (p(a, c) < p(b, c)) return true;
      if (p(a, c) > p(b, c)) return false;
    }
    return false;
  });
  return idx;
}

bool rows_equal(const Matrix& p, Eigen::Index a, Eigen::Index b) { return (p.row(a).array() == p.row(b).array()).all(); }

}  // namespace

DiscreteMeasure::DiscreteMeasure(Matrix points)
    : DiscreteMeasure(points, Vector::Constant(points.rows(), points.rows() > 0 ? 1.0 / static_cast<double>(points.rows()) : 0.0)) {}

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  require(points_.rows() > 0 && points_.cols() > 0, ErrorKind::Domain, "discrete measure needs points");
  require(weights_.size() == points_.rows(), ErrorKind::Shape, "one weight per point required");
  require(points_.allFinite(), ErrorKind::Domain, "support points must be finite");
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    require(weights_[i] > 0.0 && std::isfinite(weights_[i]), ErrorKind::Domain, "weights must be positive");
  require(std::abs(weights_.sum() - 1.0) <= 1e-9, ErrorKind::Domain, "weights must sum to one");
  auto order = lexicographic_order(points_);
  for (std::size_t k = 1; k < order.size(); ++k)
    require(!rows_equal(points_, order[k - 1], order[k]), ErrorKind::Domain, "support points must be distinct");
}

DiscreteMeasure DiscreteMeasure::merged(const Matrix& points, const Vector& weights) {
  require(weights.size() == points.rows(), ErrorKind::Shape, "one weight per point required");
  const auto n = static_cast<std::size_t>(points.rows());
  auto order = lexicographic_order(points);
  // Each group of coincident rows is represented by its first original row.
  std::vector<Eigen::Index> owner(n);
  for (std::size_t k = 0; k < n;) {
    std::size_t e = k + 1;
    while (e < n && rows_equal(points, order[k], order[e])) ++e;
    Eigen::Index first = order[k];
    for (std::size_t j = k; j < e; ++j) first = std::min(first, order[j]);
    for (std::size_t j = k; j < e; ++j) owner[static_cast<std::size_t>(order[j])] = first;
    k = e;
  }
  std::vector<Eigen::Index> slot(n, -1);
  Eigen::Index kept = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (owner[i] == static_cast<Eigen::Index>(i)) slot[i] = kept++;
  Matrix p(kept, points.cols());
  Vector w = Vector::Zero(kept);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index s = slot[static_cast<std::size_t>(owner[i])];
    if (owner[i] == static_cast<Eigen::Index>(i)) p.row(s) = points.row(static_cast<Eigen::Index>(i));
    w[s] += weights[static_cast<Eigen::Index>(i)];
  }
  w /= w.sum();
  return DiscreteMeasure(std::move(p), std::move(w));
}

bool DiscreteMeasure::uniform() const {
  const double u = 1.0 / static_cast<double>(size());
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    if (std::abs(weights_[i] - u) > 1e-12) return false;
  return true;
}

// ---------------------------------------------------------------- Grid

GridDensity::GridDensity(Compactum window, std::vector<int> cells_per_axis, std::vector<double> values)
    : window_(std::move(window)), cells_(std::move(cells_per_axis)), values_(std::move(values)) {
  require(static_cast<int>(cells_.size()) == window_.dim(), ErrorKind::Shape,
          "one cell count per axis required");
  std::size_t total = 1;
  for (int c : cells_) {
    require(c > 0, ErrorKind::Domain, "cell counts must be positive");
    total *= static_cast<std::size_t>(c);
  }
  require(values_.size() == total, ErrorKind::Shape, "grid value count does not match the cell counts");
  double mass = 0.0;
  for (double v : values_) {
    require(v >= 0.0 && std::isfinite(v), ErrorKind::Domain, "grid density values must be nonnegative");
    mass += v;
  }
  mass *= cell_volume();
  require(std::abs(mass - 1.0) <= 1e-8, ErrorKind::Domain, "grid density must integrate to one");
}

GridDensity GridDensity::from_masses(Compactum window, std::vector<int> cells_per_axis,
                                     std::span<const double> masses) {
  double total = 0.0;
  for (double m : masses) total += m;
  require(total > 0.0, ErrorKind::Domain, "grid masses sum to zero");
  double vol = window.volume();
  std::size_t n = masses.size();
  double cell_vol = vol / static_cast<double>(n);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = masses[i] / total / cell_vol;
  return GridDensity(std::move(window), std::move(cells_per_axis), std::move(values));
}

GridDensity GridDensity::uniform(Compactum window, std::vector<int> cells_per_axis) {
  std::size_t n = 1;
  for (int c : cells_per_axis) n *= static_cast<std::size_t>(std::max(c, 1));
  double v = 1.0 / window.volume();
  return GridDensity(std::move(window), std::move(cells_per_axis), std::vector<double>(n, v));
}

double GridDensity::cell_width(int axis) const {
  return (window_.upper()[axis] - window_.lower()[axis]) / cells_[static_cast<std::size_t>(axis)];
}

double GridDensity::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= cell_width(a);
  return v;
}

std::vector<double> GridDensity::masses() const {
  std::vector<double> m(values_.size());
  const double vol = cell_volume();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = values_[i] * vol;
  return m;
}

double GridDensity::sup() const { return *std::max_element(values_.begin(), values_.end()); }

std::vector<int> GridDensity::multi_index(std::size_t flat) const {
  std::vector<int> idx(cells_.size());
  for (std::size_t a = cells_.size(); a-- > 0;) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(cells_[a]));
    flat /= static_cast<std::size_t>(cells_[a]);
  }
  return idx;
}

std::size_t GridDensity::flat_index(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < cells_.size(); ++a)
    flat = flat * static_cast<std::size_t>(cells_[a]) + static_cast<std::size_t>(idx[a]);
  return flat;
}

Vector GridDensity::cell_center(std::size_t flat) const {
  auto idx = multi_index(flat);
  Vector c(dim());
  for (int a = 0; a < dim(); ++a) c[a] = window_.lower()[a] + (idx[static_cast<std::size_t>(a)] + 0.5) * cell_width(a);
  return c;
}

std::vector<double> GridDensity::axis_centers(int axis) const {
  std::vector<double> c(static_cast<std::size_t>(cells_[static_cast<std::size_t>(axis)]));
  for (std::size_t k = 0; k < c.size(); ++k)
    c[k] = window_.lower()[axis] + (static_cast<double>(k) + 0.5) * cell_width(axis);
  return c;
}

std::vector<double> GridDensity::axis_edges(int axis) const {
  const auto n = static_cast<std::size_t>(cells_[static_cast<std::size_t>(axis)]);
  std::vector<double> e(n + 1);
  for (std::size_t k = 0; k <= n; ++k) e[k] = window_.lower()[axis] + static_cast<double>(k) * cell_width(axis);
  e[n] = window_.upper()[axis];
  return e;
}

std::size_t GridDensity::locate(const Vector& x) const {
  std::vector<int> idx(cells_.size());
  for (int a = 0; a < dim(); ++a) {
    int k = static_cast<int>(std::floor((x[a] - window_.lower()[a]) / cell_width(a)));
    idx[static_cast<std::size_t>(a)] = std::clamp(k, 0, cells_[static_cast<std::size_t>(a)] - 1);
  }
  return flat_index(idx);
}

// ---------------------------------------------------------------- Measure

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Quantile1D: return "quantile1d";
    case Family::Gaussian: return "gaussian";
    case Family::Product: return "product";
    case Family::Discrete: return "discrete";
    case Family::Grid: return "grid";
  }
  return "unknown";
}

int Measure::dim() const {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Measure1D>)
          return 1;
        else
          return m.dim();
      },
      rep);
}

// ---------------------------------------------------------------- PointPattern

PointPattern::PointPattern(Compactum window, Matrix points, Unchecked)
    : window_(std::move(window)), points_(std::move(points)) {
  if (points_.rows() == 0) points_.resize(0, window_.dim());
  require(points_.cols() == window_.dim(), ErrorKind::Shape, "pattern points do not match the window dimension");
}

PointPattern::PointPattern(Compactum window, Matrix points)
    : PointPattern(std::move(window), std::move(points), Unchecked{}) {
  for (Eigen::Index i = 0; i < points_.rows(); ++i)
    require(window_.contains(points_.row(i).transpose(), 1e-12), ErrorKind::Domain,
            "pattern point outside its window");
}

PointPattern PointPattern::unchecked(Compactum window, Matrix points) {
  return PointPattern(std::move(window), std::move(points), Unchecked{});
}

DiscreteMeasure PointPattern::empirical() const {
  require(!empty(), ErrorKind::Domain, "empirical measure of an empty pattern");
  return DiscreteMeasure::merged(points_, Vector::Constant(points_.rows(), 1.0 / static_cast<double>(points_.rows())));
}

// ---------------------------------------------------------------- distances

namespace {

double discrete_w2_squared(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return optimal_coupling_discrete(a, b).cost;
}

double grid_w2_squared(const GridDensity& a, const GridDensity& b) {
  if (a.dim() == 1) {
    return integrated_squared_difference(to_measure1d(a).quantile_function(),
                                         to_measure1d(b).quantile_function());
  }
  return discrete_w2_squared(to_discrete(Measure(a), 0), to_discrete(Measure(b), 0));
}

double gaussian_w2_squared(const GaussianMeasure& a, const GaussianMeasure& b) {
  Matrix rb = matrix_sqrt_spd(b.covariance());
  Matrix inner = rb * a.covariance() * rb;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(inner, Eigen::EigenvaluesOnly);
  double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  double d2 = a.covariance().trace() + b.covariance().trace() - 2.0 * cross;
  return std::max(d2, 0.0);
}

double measure1d_w2_squared(const Measure1D& a, const Measure1D& b) {
  if (a.kind() != Measure1D::Kind::PiecewiseLinear && b.kind() != Measure1D::Kind::PiecewiseLinear &&
      a.values().size() == b.values().size()) {
    return kernels::squared_distance(a.values(), b.values()) / static_cast<double>(a.values().size());
  }
  return integrated_squared_difference(a.quantile_function(), b.quantile_function());
}

}  // namespace

double wasserstein2_squared(const Measure& a, const Measure& b) {
  require(a.dim() == b.dim(), ErrorKind::Shape, "measures differ in dimension");
  require(a.family() == b.family(), ErrorKind::Representation,
          std::string("no distance between ") + std::string(to_string(a.family())) + " and " +
              std::string(to_string(b.family())) + " measures; convert explicitly");
  switch (a.family()) {
    case Family::Quantile1D: return measure1d_w2_squared(a.as<Measure1D>(), b.as<Measure1D>());
    case Family::Gaussian: return gaussian_w2_squared(a.as<GaussianMeasure>(), b.as<GaussianMeasure>());
    case Family::Product: {
      const auto& fa = a.as<ProductMeasure>().factors;
      const auto& fb = b.as<ProductMeasure>().factors;
      require(fa.size() == fb.size(), ErrorKind::Representation, "product factorisations differ");
      double s = 0.0;
      for (std::size_t k = 0; k < fa.size(); ++k) s += wasserstein2_squared(fa[k], fb[k]);
      return s;
    }
    case Family::Discrete: return discrete_w2_squared(a.as<DiscreteMeasure>(), b.as<DiscreteMeasure>());
    case Family::Grid: return grid_w2_squared(a.as<GridDensity>(), b.as<GridDensity>());
  }
  return 0.0;
}

double wasserstein2(const Measure& a, const Measure& b) { return std::sqrt(wasserstein2_squared(a, b)); }

double wasserstein2_via_discrete(const Measure& a, const Measure& b, std::size_t resolution) {
  require(a.dim() == b.dim(), ErrorKind::Shape, "measures differ in dimension");
  return std::sqrt(discrete_w2_squared(to_discrete(a, resolution), to_discrete(b, resolution)));
}

// ---------------------------------------------------------------- conversions

namespace {

double halton(std::size_t index, std::size_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

DiscreteMeasure tensor_product(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  const Eigen::Index na = static_cast<Eigen::Index>(a.size()), nb = static_cast<Eigen::Index>(b.size());
  Matrix p(na * nb, a.dim() + b.dim());
  Vector w(na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < nb; ++j) {
      p.row(i * nb + j) << a.points().row(i), b.points().row(j);
      w[i * nb + j] = a.weights()[i] * b.weights()[j];
    }
  return DiscreteMeasure(std::move(p), w / w.sum());
}

}  // namespace

DiscreteMeasure to_discrete(const Measure& m, std::size_t resolution) {
  switch (m.family()) {
    case Family::Quantile1D: {
      const auto& q = m.as<Measure1D>();
      std::size_t n = resolution > 0 ? resolution : Measure1D::kDefaultGridSize;
      Matrix p(static_cast<Eigen::Index>(n), 1);
      for (std::size_t i = 0; i < n; ++i)
        p(static_cast<Eigen::Index>(i), 0) = q.quantile_function()(Measure1D::level(i, n));
      return DiscreteMeasure::merged(p, Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
    }
    case Family::Gaussian: {
      const auto& g = m.as<GaussianMeasure>();
      const int d = g.dim();
      require(static_cast<std::size_t>(d) <= std::size(kPrimes), ErrorKind::Capacity,
              "Gaussian discretisation supports at most 12 dimensions");
      std::size_t n = resolution > 0 ? resolution : 1024;
      boost::math::normal_distribution<double> normal;
      Eigen::LLT<Matrix> llt(g.covariance());
      Matrix z(static_cast<Eigen::Index>(n), d);
      for (std::size_t i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a) {
          double u = d == 1 ? Measure1D::level(i, n) : halton(i + 1, kPrimes[a]);
          z(static_cast<Eigen::Index>(i), a) = boost::math::quantile(normal, u);
        }
      Matrix p = z * llt.matrixL().transpose();
      return DiscreteMeasure::merged(p, Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
    }
    case Family::Product: {
      const auto& f = m.as<ProductMeasure>().factors;
      DiscreteMeasure acc = to_discrete(f.front(), resolution);
      for (std::size_t k = 1; k < f.size(); ++k) acc = tensor_product(acc, to_discrete(f[k], resolution));
      return acc;
    }
    case Family::Discrete: return m.as<DiscreteMeasure>();
    case Family::Grid: {
      const auto& g = m.as<GridDensity>();
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < g.num_cells(); ++i)
        if (g.values()[i] > 0.0) keep.push_back(i);
      Matrix p(static_cast<Eigen::Index>(keep.size()), g.dim());
      Vector w(static_cast<Eigen::Index>(keep.size()));
      for (std::size_t k = 0; k < keep.size(); ++k) {
        p.row(static_cast<Eigen::Index>(k)) = g.cell_center(keep[k]).transpose();
        w[static_cast<Eigen::Index>(k)] = g.mass(keep[k]);
      }
      return DiscreteMeasure(std::move(p), w / w.sum());
    }
  }
  fail(ErrorKind::Representation, "unknown measure family");
}

Measure1D to_measure1d(const GridDensity& g) {
  require(g.dim() == 1, ErrorKind::Shape, "only one-dimensional grids have a quantile function");
  return Measure1D::from_quantile_function(QuantileFunction::from_cells(g.axis_edges(0), g.masses()));
}

GridDensity to_grid(const Measure1D& m, const Compactum& window, int cells) {
  require(window.dim() == 1, ErrorKind::Shape, "one-dimensional window required");
  std::vector<double> edges(static_cast<std::size_t>(cells) + 1);
  const double lo = window.lower()[0], hi = window.upper()[0];
  for (int k = 0; k <= cells; ++k) edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / cells;
  edges.back() = hi;
  auto masses = m.quantile_function().cell_masses(edges);
  return GridDensity::from_masses(window, {cells}, masses);
}

double second_moment(const Measure& m) {
  switch (m.family()) {
    case Family::Quantile1D: return m.as<Measure1D>().quantile_function().second_moment();
    case Family::Gaussian: return m.as<GaussianMeasure>().covariance().trace();
    case Family::Product: {
      double s = 0.0;
      for (const auto& f : m.as<ProductMeasure>().factors) s += second_moment(f);
      return s;
    }
    case Family::Discrete: {
      const auto& d = m.as<DiscreteMeasure>();
      return d.weights().dot(d.points().rowwise().squaredNorm());
    }
    case Family::Grid: {
      const auto& g = m.as<GridDensity>();
      if (g.dim() == 1) return to_measure1d(g).quantile_function().second_moment();
      double s = 0.0;
      for (std::size_t i = 0; i < g.num_cells(); ++i) s += g.mass(i) * g.cell_center(i).squaredNorm();
      return s;
    }
  }
  return 0.0;
}

}  // namespace wassbary
