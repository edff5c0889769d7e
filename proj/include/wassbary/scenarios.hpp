#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "wassbary/barycenter.hpp"

namespace wassbary::scenarios {

// Finite mixture of normal and shifted-gamma components on the line.
class Mixture1D {
 public:
  struct Component {
    double weight;
    bool gamma;      // shifted gamma(shape, rate) if true, else normal(location, scale)
    double location;
    double scale;    // normal standard deviation, or gamma rate
    double shape;    // gamma shape
  };

  explicit Mixture1D(std::vector<Component> components);

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double q) const;
  // Quantile grid at levels (i - 1/2) / m.
  Measure1D tabulate(std::size_t m) const;
  const std::vector<Component>& components() const { return components_; }

 private:
  std::vector<Component> components_;
};

// 1/2 N(m1, s1^2) + 1/2 N(m2, s2^2),  m1 ~ U[-13,-3], m2 ~ U[3,13], s ~ Gamma(shape 4, rate 4).
Mixture1D sample_bimodal(std::mt19937_64& rng);
// 3/5 Gamma(3, rate beta) shifted by m3 + 2/5 N(m4, 1),  beta ~ Gamma(4, 1), m3 ~ U[1,4], m4 ~ U[-4,-1].
Mixture1D sample_gamma_gauss(std::mt19937_64& rng);

// S = z1 z1^T + ... + zk zk^T with z ~ N(0, I_d): Wishart(I_d, k).
Matrix sample_wishart(std::mt19937_64& rng, int dim, int dof);
// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
Matrix sample_orthogonal(std::mt19937_64& rng, int dim);

// Frank copula with parameter theta.
double frank_density(double u, double v, double theta);
// (u, v) by conditional inversion from independent uniforms (u, w).
double frank_conditional_inverse(double u, double w, double theta);

// Density of the one-dimensional barycenter whose quantile function is the
// average of the inputs'. The level table only brackets x; the level itself
// is then solved for exactly.
class BarycenterDensity1D {
 public:
  BarycenterDensity1D(const std::vector<const Mixture1D*>& inputs, std::size_t levels);
  double pdf(double x) const;
  double cdf(double x) const;
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return f_; }

 private:
  double level_of(double x) const;
  double density_at_level(double q) const;

  std::vector<Mixture1D> inputs_;
  std::vector<double> q_, x_, f_;
};

struct ScenarioOptions {
  std::uint64_t seed = 1;
  DescentConfig descent;
  std::size_t grid_size = Measure1D::kDefaultGridSize;
  int plot_cells = 128;   // per axis for density grids
  int field_cells = 24;   // per axis for displacement fields
  std::size_t copula_points = 400;
  std::size_t trivariate_samples = 2000;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct ScenarioResult {
  std::vector<OutputFile> files;
  nlohmann::json summary;
};

std::vector<std::string> scenario_names();
// Throws a domain error for an unknown name.
ScenarioResult run_scenario(const std::string& name, const ScenarioOptions& options);

}  // namespace wassbary::scenarios
