#pragma once

#include <span>
#include <vector>

#include "wassbary/barycenter.hpp"

namespace wassbary {

struct Multicoupling {
  Measure barycenter;
  std::vector<TransportMap> maps;  // barycenter -> input i
  // sum_{i<j} of the expected squared distance between coordinates i and j of
  // the coupling routed through the barycenter.
  double pairwise_cost = 0.0;
  // (1/2N) int sum_i |t_i - (1/N) sum_j t_j|^2 d(barycenter), i.e. pairwise_cost / (2N^2)
  // for deterministic routes; equals the objective at a Frechet mean.
  double mean_spread = 0.0;
  double objective = 0.0;  // F(barycenter)
  DescentTrace trace;
  int starts = 1;  // descent runs tried (discrete inputs restart from every input)
};

// Barycenter plus Procrustes maps. For discrete inputs the descent is
// restarted from each input and the cheapest routed coupling is kept.
Multicoupling multicoupling(std::span<const Measure> inputs, const DescentConfig& cfg = {});

// Exact inverse within the map's family.
TransportMap invert_map(const TransportMap& t);

// Maps every point; the window is kept even if points leave it.
PointPattern register_pattern(const PointPattern& p, const TransportMap& t_inv);

// sup over probe rows of |est(x) - truth(x)|.
double registration_error(const TransportMap& est, const TransportMap& truth, const Matrix& probes);

// per_axis^d points spaced evenly over the window shrunk by `shrink` of its
// width on every side (end points included).
Matrix probe_grid(const Compactum& window, int per_axis = 50, double shrink = 0.1);

}  // namespace wassbary
