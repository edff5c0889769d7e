#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wassbary/barycenter.hpp"

namespace wassbary {

// Coordinatewise sinusoidal warps. On each axis, after rescaling the window
// to [0, 1], T(u) = u - a sin(pi j u) / (pi |j|) with j uniform on
// {-J, ..., -1, 1, ..., J}. Every member is increasing for a <= 1, fixes the
// faces of the window, and E T = id because j and -j are equally likely.
struct WarpParams {
  int max_frequency = 3;   // J
  double amplitude = 1.0;  // a in [0, 1]
  int knots = 4097;        // per axis, for the piecewise-linear representation
  void validate() const;
};

struct WarpMap {
  TransportMap forward;
  TransportMap inverse;
  WarpParams params;
  std::vector<int> frequencies;  // j per axis
};

WarpMap make_warp(const Compactum& window, std::span<const int> frequencies, const WarpParams& params);
WarpMap sample_warp(const Compactum& window, const WarpParams& params, std::uint64_t seed);
// Closed form of the warp on one rescaled axis, for tests and probes.
double warp_profile(double u, int frequency, double amplitude);

// Poisson(tau) many i.i.d. points from the intensity measure.
PointPattern sample_poisson(const Measure& intensity, double tau, const Compactum& window, std::uint64_t seed);

enum class KernelShape { Gaussian };

// Isotropic kernel with unit total variance: int |z|^2 psi(z) dz = 1, so each
// coordinate of psi_sigma has standard deviation sigma / sqrt(d).
struct KernelSpec {
  KernelShape shape = KernelShape::Gaussian;
  double bandwidth = 0.1;
  void validate() const;
};

// sigma(tau) = tau^{-1/(d+2)}, clipped to (0, 1].
double default_bandwidth(double tau, int dim);

// Radial profile psi_1 of the unit-variance kernel in dimension d.
double kernel_profile(const KernelSpec& spec, int dim, double radius);

// Average of the points' kernels, each restricted to the window and
// renormalised, tabulated at cell centres. An empty pattern gives the
// uniform density.
GridDensity kernel_estimate(const PointPattern& p, const KernelSpec& spec, std::span<const int> cells_per_axis);

// [psi_1(diam K) Leb(K)]^{-1}
double smoothing_constant(const KernelSpec& spec, const Compactum& window);

// Default cells per axis for a given dimension.
int default_cells(int dim);

struct PopulationEstimate {
  GridDensity lambda_hat;
  std::vector<GridDensity> smoothed;
  std::vector<TransportMap> maps;      // estimated warps T_i
  std::vector<TransportMap> inverses;  // estimated T_i^{-1}; empty when the maps have no exact inverse
  DescentTrace trace;
};

PopulationEstimate estimate_population(std::span<const PointPattern> patterns, const KernelSpec& spec,
                                       std::span<const int> cells_per_axis, const DescentConfig& cfg = {});

// Two-component Gaussian mixture truncated to each axis of the window,
// independent across axes, tabulated on a grid.
GridDensity reference_intensity(const Compactum& window, int cells_per_axis);

struct ExperimentDesign {
  std::vector<std::size_t> n_grid{5, 20, 80};
  std::vector<double> tau_grid{100, 400, 1600};
  std::function<double(double, int)> bandwidth_rule = default_bandwidth;
  int replicates = 10;
  std::uint64_t seed = 1;
  int dim = 1;
  int cells = 0;  // 0 selects default_cells(dim)
  int truth_cells = 1024;
  int probes_per_axis = 50;
  WarpParams warp;
  DescentConfig descent;
  void validate() const;
};

struct ExperimentRow {
  std::size_t n = 0;
  double tau = 0.0;
  double sigma = 0.0;
  int replicate = 0;
  double d_lambda = 0.0;
  double sup_Tinv_err = 0.0;  // median over patterns
  double sup_T_err = 0.0;     // median over patterns
  double reg_dist = 0.0;      // median over nonempty patterns
  int iters = 0;
  bool converged = false;
  std::string status = "ok";
};

std::vector<ExperimentRow> run_consistency_experiment(const ExperimentDesign& design);

// Seed for stream `k` derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k);

}  // namespace wassbary
