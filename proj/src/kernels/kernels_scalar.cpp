#include <cmath>

#include "wassbary/kernels.hpp"

namespace wassbary::kernels {

namespace {

void mean_rows_scalar(const double* const* rows, std::size_t nrows, std::size_t len, double* out) {
  const double n = static_cast<double>(nrows);
  for (std::size_t k = 0; k < len; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < nrows; ++i) s += rows[i][k];
    out[k] = s / n;
  }
}

void blend_scalar(const double* a, const double* b, double tau, std::size_t len, double* out) {
  const double keep = 1.0 - tau;
  for (std::size_t k = 0; k < len; ++k) out[k] = keep * a[k] + tau * b[k];
}

double squared_distance_scalar(const double* a, const double* b, std::size_t len) {
  double s = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

void gaussian_profile_scalar(const double* centers, std::size_t len, double x, double inv_two_var,
                             double* out) {
  for (std::size_t k = 0; k < len; ++k) {
    double d = centers[k] - x;
    out[k] = std::exp(-(d * d) * inv_two_var);
  }
}

void squared_euclidean_row_scalar(const double* const* axes, std::size_t dim, std::size_t len,
                                  const double* x, double* out) {
  for (std::size_t j = 0; j < len; ++j) out[j] = 0.0;
  for (std::size_t a = 0; a < dim; ++a) {
    const double* axis = axes[a];
    const double xa = x[a];
    for (std::size_t j = 0; j < len; ++j) {
      double d = axis[j] - xa;
      out[j] += d * d;
    }
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar,
                                 mean_rows_scalar,
                                 blend_scalar,
                                 squared_distance_scalar,
                                 gaussian_profile_scalar,
                                 squared_euclidean_row_scalar};
  return table;
}

}  // namespace wassbary::kernels
