#pragma once

// Data-parallel inner loops shared by the transport, barycenter and
// estimation modules. Every kernel has a scalar reference implementation and,
// on x86-64, an AVX2 variant chosen at runtime from the CPU feature flags.
//
// Kernels built only from lane-wise adds and multiplies (mean_rows, blend,
// squared_euclidean_row) round exactly like the scalar loop, so the two
// tables agree bit for bit. Reductions and the exponential do not, and are
// tested to a relative tolerance instead.

#include <cstddef>
#include <span>
#include <string_view>

namespace wassbary::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  // out[k] = (rows[0][k] + ... + rows[n-1][k]) / n, summed in row order from 0.
  void (*mean_rows)(const double* const* rows, std::size_t nrows, std::size_t len, double* out);
  // out[k] = (1 - tau) * a[k] + tau * b[k]
  void (*blend)(const double* a, const double* b, double tau, std::size_t len, double* out);
  // sum_k (a[k] - b[k])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t len);
  // out[k] = exp(-(centers[k] - x)^2 * inv_two_var)
  void (*gaussian_profile)(const double* centers, std::size_t len, double x, double inv_two_var,
                           double* out);
  // out[j] = sum_a (axes[a][j] - x[a])^2, accumulated over a in order.
  void (*squared_euclidean_row)(const double* const* axes, std::size_t dim, std::size_t len,
                                const double* x, double* out);
};

const KernelTable& scalar_table();

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

// Table used by the library. Picks AVX2 when available unless the
// WASSBARY_SIMD environment variable is set to "scalar".
const KernelTable& active();

// Forces a table; returns false (and changes nothing) if it is unavailable.
bool select(Isa isa);

inline void mean_rows(std::span<const double* const> rows, std::span<double> out) {
  active().mean_rows(rows.data(), rows.size(), out.size(), out.data());
}

inline void blend(std::span<const double> a, std::span<const double> b, double tau,
                  std::span<double> out) {
  active().blend(a.data(), b.data(), tau, out.size(), out.data());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void gaussian_profile(std::span<const double> centers, double x, double inv_two_var,
                             std::span<double> out) {
  active().gaussian_profile(centers.data(), centers.size(), x, inv_two_var, out.data());
}

inline void squared_euclidean_row(std::span<const double* const> axes, std::size_t len,
                                  std::span<const double> x, std::span<double> out) {
  active().squared_euclidean_row(axes.data(), axes.size(), len, x.data(), out.data());
}

}  // namespace wassbary::kernels
