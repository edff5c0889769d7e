#pragma once

#include <functional>
#include <span>
#include <vector>

namespace wassbary {

// Piecewise-linear, nondecreasing quantile function on [0, 1].
//
// Segment k covers probabilities [p_k, p_{k+1}] and runs linearly from
// start_k to end_k; end_k <= start_{k+1}, so jumps (gaps in the support) are
// allowed. A segment with start_k == end_k is an atom. This represents the
// quantile function of any mixture of atoms and piecewise-constant densities
// exactly, which is all the one-dimensional machinery needs.
class QuantileFunction {
 public:
  QuantileFunction(std::vector<double> probs, std::vector<double> start, std::vector<double> end);

  // Equal-probability atoms at the given nondecreasing values.
  static QuantileFunction step(std::span<const double> values);

  // Density constant on each cell [edges[k], edges[k+1]] with the given cell
  // masses (need not be normalised). Zero-mass cells become gaps.
  static QuantileFunction from_cells(std::span<const double> edges, std::span<const double> masses);

  std::size_t segments() const { return start_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& start() const { return start_; }
  const std::vector<double>& end() const { return end_; }

  // Right-continuous evaluation; q is clamped to [0, 1].
  double operator()(double q) const;
  double left_limit(double q) const;

  double mean() const;
  double second_moment() const;
  double cdf(double x) const;

  // Largest density value; +inf if the function has an atom.
  double sup_density() const;

  // Probability mass falling in each cell [edges[k], edges[k+1]). Mass
  // outside the edges is assigned to the nearest end cell.
  std::vector<double> cell_masses(std::span<const double> edges) const;

  // Splits segments so that every value in `cuts` becomes a segment endpoint.
  QuantileFunction refined(std::span<const double> cuts) const;

  // Applies a nondecreasing map to every segment endpoint. Exact when the map
  // is linear between the function's breakpoints (see refined()).
  QuantileFunction mapped(const std::function<double(double)>& f) const;

  // Value of segment k at probability q within [p_k, p_{k+1}].
  double value_in(std::size_t k, double q) const;

 private:
  std::vector<double> probs_;
  std::vector<double> start_;
  std::vector<double> end_;
};

// Weighted sum  sum_i weights[i] * fns[i]  on the merged breakpoints.
QuantileFunction combine(std::span<const QuantileFunction* const> fns, std::span<const double> weights);

// Exact integral over [0, 1] of (a(q) - b(q))^2.
double integrated_squared_difference(const QuantileFunction& a, const QuantileFunction& b);

// Merged breakpoints of several functions.
std::vector<double> merged_breakpoints(std::span<const QuantileFunction* const> fns);

}  // namespace wassbary
