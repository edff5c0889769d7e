#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wassbary/measures.hpp"
#include "wassbary/transport.hpp"

namespace wassbary {

struct DescentConfig {
  double tolerance = 1e-6;  // stop once ||F'(gamma)|| < tolerance
  int max_iterations = 200;
  double step = 1.0;  // tau in [0, 1]
  std::optional<Measure> initial;  // defaults to the first input
  double stagnation = 1e-14;  // also stop once |F(gamma_{j+1}) - F(gamma_j)| falls below this
  // Called with every iterate, gamma_0 included.
  std::function<void(int, const Measure&)> observer;

  void validate() const;
};

struct DescentRecord {
  double objective;
  double grad_sq;
  double delta;  // objective change from the previous record; 0 for gamma_0
};

enum class StopReason { Gradient, Stagnation, MaxIterations };

std::string_view to_string(StopReason r);

struct DescentTrace {
  std::vector<DescentRecord> records;  // gamma_0, ..., gamma_{iterations_used}
  int iterations_used = 0;
  bool converged = false;  // ||F'|| < tolerance at the returned measure
  StopReason stop = StopReason::MaxIterations;
  // Discrete inputs have no derivative; grad_sq is then the formal analogue.
  bool formal_gradient = false;
  std::size_t collisions = 0;  // support points merged by discrete steps
};

struct BarycenterResult {
  Measure barycenter;
  DescentTrace trace;
  std::vector<TransportMap> maps;  // optimal maps from the barycenter to each input
};

struct GaussianBarycenterResult {
  GaussianMeasure barycenter;
  DescentTrace trace;
};

// (1/2N) sum_i W2^2(gamma, mu_i)
double frechet_objective(const Measure& gamma, std::span<const Measure> inputs);
// || (1/N) sum_i t_i - id ||^2 in L2(gamma), t_i optimal from gamma to mu_i.
double frechet_gradient_norm_sq(const Measure& gamma, std::span<const Measure> inputs);
double karcher_residual(const Measure& gamma, std::span<const Measure> inputs);

// [(1 - tau) id + (tau/N) sum_i t_i] # gamma
Measure procrustes_step(const Measure& gamma, std::span<const Measure> inputs, double tau);

BarycenterResult barycenter(std::span<const Measure> inputs, const DescentConfig& cfg = {});
GaussianBarycenterResult gaussian_barycenter(std::span<const GaussianMeasure> inputs, const DescentConfig& cfg = {});

// min{ N^{d-1} max_i |g_i|_inf , N^d min_i |g_i|_inf }
double density_bound(std::span<const GridDensity> inputs);

// Largest density value of a measure with a density: grid value, or the
// exact piecewise-linear quantile function's bound in 1D.
double sup_density(const Measure& m);

}  // namespace wassbary
