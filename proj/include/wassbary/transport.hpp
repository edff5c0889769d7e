#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "wassbary/measures.hpp"

namespace wassbary {

// Piecewise-linear nondecreasing map of the real line through its knots,
// extended linearly beyond the end knots with the terminal slopes.
class Monotone1D {
 public:
  // x strictly increasing, y nondecreasing.
  Monotone1D(std::vector<double> x, std::vector<double> y);
  // Sorts nothing but drops knots whose x repeats the previous one, keeping the first.
  static Monotone1D from_knots(std::span<const double> x, std::span<const double> y);
  static Monotone1D identity(double lo = 0.0, double hi = 1.0);
  static Monotone1D affine(double intercept, double slope, double lo = 0.0, double hi = 1.0);

  double operator()(double t) const;
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

// x -> A x. Optimal maps between centred Gaussians are symmetric
// positive-definite; general() admits any square matrix (rotations,
// reflections) for push-forwards that are not transport maps.
class LinearMap {
 public:
  explicit LinearMap(Matrix matrix);
  static LinearMap general(Matrix matrix);

  const Matrix& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  bool brenier() const { return brenier_; }

 private:
  LinearMap(Matrix matrix, bool brenier) : matrix_(std::move(matrix)), brenier_(brenier) {}
  Matrix matrix_;
  bool brenier_;
};

struct TransportMap;

// Acts factor-wise on consecutive coordinate blocks.
struct ProductMap {
  explicit ProductMap(std::vector<TransportMap> factors);
  ProductMap(const ProductMap&);
  ProductMap(ProductMap&&) noexcept;
  ProductMap& operator=(const ProductMap&);
  ProductMap& operator=(ProductMap&&) noexcept;
  ~ProductMap();

  std::vector<TransportMap> factors;
  int dim() const;
};

// Map defined on a finite set of source points: row i of `source` goes to
// row i of `image`. When the map sends each source point to a single target
// atom, target_index holds that atom's index; it is empty for barycentric
// projections of split plans.
class Assignment {
 public:
  Assignment(Matrix source, Matrix image, std::vector<int> target_index = {});

  const Matrix& source() const { return source_; }
  const Matrix& image() const { return image_; }
  const std::vector<int>& target_index() const { return target_index_; }
  int dim() const { return static_cast<int>(source_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(source_.rows()); }
  bool is_bijection() const;
  // Row of `source` equal (or nearest) to x.
  std::size_t nearest_source(const Vector& x) const;

 private:
  Matrix source_;
  Matrix image_;
  std::vector<int> target_index_;
};

// Map sampled at the cell centres of a grid: centre k goes to centre k plus
// displacement row k. Off the centres it is a gradient of the convex function
// max_k (<x, y_k> - a_k) through the sampled pairs, so it is monotone
// everywhere and piecewise constant between centres. Rows flagged false in
// `known` are filled in from that function.
class GridMap {
 public:
  GridMap(Compactum window, std::vector<int> cells_per_axis, Matrix displacement, std::vector<bool> known = {});

  const Compactum& window() const { return window_; }
  const std::vector<int>& cells_per_axis() const { return cells_; }
  const Matrix& displacement() const { return displacement_; }
  int dim() const { return window_.dim(); }
  Vector displacement_at(const Vector& x) const;

 private:
  struct Planes {
    Matrix images;   // y_k, one per cell
    Vector offsets;  // a_k
  };
  struct Lazy {
    std::once_flag once;
    Planes planes;
  };
  Vector centre(Eigen::Index k) const;
  Planes fit(const std::vector<Eigen::Index>& rows) const;
  const Planes& planes() const;

  Compactum window_;
  std::vector<int> cells_;
  Matrix displacement_;
  std::shared_ptr<Lazy> lazy_;
};

enum class MapKind { Monotone1D, Linear, Product, Assignment, Grid };

struct TransportMap {
  using Rep = std::variant<Monotone1D, LinearMap, ProductMap, Assignment, GridMap>;

  TransportMap(Monotone1D m) : rep(std::move(m)) {}
  TransportMap(LinearMap m) : rep(std::move(m)) {}
  TransportMap(ProductMap m) : rep(std::move(m)) {}
  TransportMap(Assignment m) : rep(std::move(m)) {}
  TransportMap(GridMap m) : rep(std::move(m)) {}

  MapKind kind() const { return static_cast<MapKind>(rep.index()); }
  int dim() const;
  Vector operator()(const Vector& x) const;

  template <class T>
  const T& as() const { return std::get<T>(rep); }
  template <class T>
  const T* get_if() const { return std::get_if<T>(&rep); }

  Rep rep;
};

struct PlanEntry {
  std::size_t source;
  std::size_t target;
  double mass;
};

// Transport plan between two discrete measures, stored sparsely.
struct Coupling {
  DiscreteMeasure source;
  DiscreteMeasure target;
  std::vector<PlanEntry> plan;
  double cost = 0.0;  // sum of mass * |x - y|^2

  Matrix dense() const;
  // Largest deviation of the row / column sums from the marginal weights.
  double marginal_error() const;
};

struct DiscreteSolverOptions {
  std::size_t max_points = 2048;  // per side, for d >= 2
  bool force_network_simplex = false;
};

Monotone1D optimal_map_1d(const Measure1D& src, const Measure1D& dst);
LinearMap optimal_map_gaussian(const GaussianMeasure& src, const GaussianMeasure& dst);
ProductMap optimal_map_product(const ProductMeasure& src, const ProductMeasure& dst);
Coupling optimal_coupling_discrete(const DiscreteMeasure& src, const DiscreteMeasure& dst,
                                   const DiscreteSolverOptions& options = {});

// Optimal map for any family that has one. Discrete sources give the
// barycentric projection of an optimal plan; grids in d >= 2 use the plan
// between cell centres.
TransportMap optimal_map(const Measure& src, const Measure& dst);

// Barycentric projection of a coupling as a map on the source support.
Assignment barycentric_projection(const Coupling& coupling);

struct MapAverage {
  DiscreteMeasure measure;
  std::size_t collisions = 0;  // averaged points that coincided and were merged
};

// One Procrustes step for discrete measures: every support point of gamma is
// sent to the average of its images under optimal plans to each target,
// moved a fraction tau of the way.
MapAverage discrete_map_average(const DiscreteMeasure& gamma, std::span<const DiscreteMeasure> targets,
                                double tau = 1.0);

Matrix matrix_sqrt_spd(const Matrix& s);
Matrix matrix_inv_sqrt_spd(const Matrix& s);

struct MonotonicityReport {
  bool monotone = true;
  double worst = 0.0;  // smallest <t(x) - t(x'), x - x'> over the probes
};

MonotonicityReport check_monotone(const TransportMap& t,
                                  std::span<const std::pair<Vector, Vector>> probes);

Measure push_forward(const TransportMap& t, const Measure& m);

// outer o inner, for maps of the same kind (Monotone1D, Linear, Product).
TransportMap compose(const TransportMap& outer, const TransportMap& inner);

}  // namespace wassbary
