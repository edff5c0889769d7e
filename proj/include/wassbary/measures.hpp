#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "wassbary/quantile_function.hpp"

namespace wassbary {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Axis-aligned box  prod_k [lower_k, upper_k].
class Compactum {
 public:
  Compactum(Vector lower, Vector upper);
  static Compactum unit(int dim);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector widths() const { return upper_ - lower_; }
  double diameter() const { return widths().norm(); }
  double volume() const { return widths().prod(); }
  bool contains(const Vector& x, double slack = 0.0) const;
  Vector clamp(const Vector& x) const;
  // Each side moves inwards by fraction * width.
  Compactum shrunk(double fraction) const;

 private:
  Vector lower_;
  Vector upper_;
};

bool operator==(const Compactum& a, const Compactum& b);

class Measure1D {
 public:
  enum class Kind {
    QuantileGrid,     // values at probability levels (i - 1/2) / M
    Sample,           // sorted equally weighted atoms
    PiecewiseLinear,  // exact quantile function of a piecewise-constant density
  };

  static constexpr std::size_t kDefaultGridSize = 1024;

  static Measure1D from_quantile_grid(std::vector<double> values);
  static Measure1D from_sample(std::vector<double> atoms);
  static Measure1D from_quantile_function(QuantileFunction q);
  static Measure1D point_mass(double at, std::size_t grid_size = kDefaultGridSize);
  // Quantile grid G^{-1}((i - 1/2) / M) of an arbitrary quantile function.
  static Measure1D tabulate(const std::function<double(double)>& inverse_cdf,
                            std::size_t grid_size = kDefaultGridSize);

  Kind kind() const { return kind_; }
  // Grid values or sorted atoms; empty for PiecewiseLinear.
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return kind_ == Kind::PiecewiseLinear ? function_.segments() : values_.size(); }
  // Step function of the values, or the exact function for PiecewiseLinear.
  const QuantileFunction& quantile_function() const { return function_; }

  // Probability level of grid entry i.
  static double level(std::size_t i, std::size_t m) { return (static_cast<double>(i) + 0.5) / static_cast<double>(m); }

 private:
  Measure1D(Kind kind, std::vector<double> values, QuantileFunction function);

  Kind kind_;
  std::vector<double> values_;
  QuantileFunction function_;
};

// Centred Gaussian N(0, S).
class GaussianMeasure {
 public:
  explicit GaussianMeasure(Matrix covariance);
  static GaussianMeasure isotropic(int dim, double variance);

  int dim() const { return static_cast<int>(covariance_.rows()); }
  const Matrix& covariance() const { return covariance_; }

 private:
  Matrix covariance_;
};

struct Measure;

// Independent coupling of its factors; coordinates are the factors' concatenated.
struct ProductMeasure {
  explicit ProductMeasure(std::vector<Measure> factors);
  ProductMeasure(const ProductMeasure&);
  ProductMeasure(ProductMeasure&&) noexcept;
  ProductMeasure& operator=(const ProductMeasure&);
  ProductMeasure& operator=(ProductMeasure&&) noexcept;
  ~ProductMeasure();

  std::vector<Measure> factors;
  int dim() const;
};

// Finitely supported measure on distinct points (one per row).
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(Matrix points);
  DiscreteMeasure(Matrix points, Vector weights);
  // Merges coincident rows, adding their weights.
  static DiscreteMeasure merged(const Matrix& points, const Vector& weights);

  int dim() const { return static_cast<int>(points_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  bool uniform() const;

 private:
  Matrix points_;
  Vector weights_;
};

// Density on a regular grid over a box, constant on each cell. Cells are
// stored in row-major order (last axis varies fastest).
class GridDensity {
 public:
  GridDensity(Compactum window, std::vector<int> cells_per_axis, std::vector<double> values);
  static GridDensity from_masses(Compactum window, std::vector<int> cells_per_axis,
                                 std::span<const double> masses);
  static GridDensity uniform(Compactum window, std::vector<int> cells_per_axis);

  const Compactum& window() const { return window_; }
  const std::vector<int>& cells_per_axis() const { return cells_; }
  const std::vector<double>& values() const { return values_; }
  int dim() const { return window_.dim(); }
  std::size_t num_cells() const { return values_.size(); }
  double cell_width(int axis) const;
  double cell_volume() const;
  double mass(std::size_t flat) const { return values_[flat] * cell_volume(); }
  std::vector<double> masses() const;
  double sup() const;

  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const int> idx) const;
  Vector cell_center(std::size_t flat) const;
  std::vector<double> axis_centers(int axis) const;
  std::vector<double> axis_edges(int axis) const;
  // Cell containing x, clamped to the grid.
  std::size_t locate(const Vector& x) const;

 private:
  Compactum window_;
  std::vector<int> cells_;
  std::vector<double> values_;
};

enum class Family { Quantile1D, Gaussian, Product, Discrete, Grid };

std::string_view to_string(Family f);

struct Measure {
  using Rep = std::variant<Measure1D, GaussianMeasure, ProductMeasure, DiscreteMeasure, GridDensity>;

  Measure(Measure1D m) : rep(std::move(m)) {}
  Measure(GaussianMeasure m) : rep(std::move(m)) {}
  Measure(ProductMeasure m) : rep(std::move(m)) {}
  Measure(DiscreteMeasure m) : rep(std::move(m)) {}
  Measure(GridDensity m) : rep(std::move(m)) {}

  Family family() const { return static_cast<Family>(rep.index()); }
  int dim() const;

  template <class T>
  const T& as() const { return std::get<T>(rep); }
  template <class T>
  const T* get_if() const { return std::get_if<T>(&rep); }

  Rep rep;
};

// Finite multiset of points (rows) observed in a window.
class PointPattern {
 public:
  // Throws a domain error if a point lies outside the window.
  PointPattern(Compactum window, Matrix points);
  // Skips the containment check (registered patterns may leave the window).
  static PointPattern unchecked(Compactum window, Matrix points);

  const Compactum& window() const { return window_; }
  const Matrix& points() const { return points_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  int dim() const { return window_.dim(); }
  bool empty() const { return points_.rows() == 0; }

  // Uniform measure on the points; coincident points are merged.
  DiscreteMeasure empirical() const;

 private:
  struct Unchecked {};
  PointPattern(Compactum window, Matrix points, Unchecked);
  Compactum window_;
  Matrix points_;
};

// G^{-1}(q): linear interpolation on a quantile grid, order statistic for a
// sample, direct evaluation for a piecewise-linear function.
double quantile(const Measure1D& m, double q);

double wasserstein2(const Measure& a, const Measure& b);
double wasserstein2_squared(const Measure& a, const Measure& b);

// n i.i.d. draws, reproducible from the seed.
PointPattern sample(const Measure& m, std::size_t n, std::uint64_t seed);

// Deterministic discretisation: quantile levels in 1D, cell centres for
// grids, Halton points pushed through the Gaussian quantile for Gaussians,
// tensor grids for products. `resolution` is points per axis (1D, products)
// or total points (Gaussians in d >= 2). Discrete measures pass through.
DiscreteMeasure to_discrete(const Measure& m, std::size_t resolution);

// Distance between measures of different families after converting both
// with to_discrete.
double wasserstein2_via_discrete(const Measure& a, const Measure& b, std::size_t resolution);

// Exact quantile function of a one-dimensional grid density.
Measure1D to_measure1d(const GridDensity& g);
// Cell masses of a one-dimensional measure, re-binned onto a grid.
GridDensity to_grid(const Measure1D& m, const Compactum& window, int cells);

double second_moment(const Measure& m);

}  // namespace wassbary
