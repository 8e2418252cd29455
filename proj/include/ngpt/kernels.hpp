#pragma once

// Data-parallel inner loops. The functions in `ngpt::kernels` are the
// OpenMP versions the library calls; `ngpt::kernels::reference` holds plain
// serial loops kept as the correctness baseline for tests and benchmarks.
//
// Reductions in the OpenMP versions are computed over fixed row blocks and
// merged in block order, so results do not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace ngpt::kernels {

// Non-owning view of a row-major rows x cols block.
struct MatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<const double> row(std::size_t i) const noexcept {
    return {data + i * cols, cols};
  }
};

inline constexpr std::size_t kReductionBlock = 1024;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
  return s;
}

// Every exact-distance path (sequential scan, leaf scan) goes through this
// one function so that tree search and brute force agree bit-for-bit.
inline double squared_l2(std::span<const double> a,
                         std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double diff = a[t] - b[t];
    s += diff * diff;
  }
  return s;
}

std::vector<double> column_means(MatrixView m);
// out[i*cols + t] = m(i,t) - mean[t]
void subtract_row(MatrixView m, std::span<const double> mean, std::span<double> out);
// Biased (1/n) covariance of already-centered rows, full symmetric cols x cols.
std::vector<double> covariance(MatrixView centered);
// out[i] = <row i, direction>
void project(MatrixView m, std::span<const double> direction, std::span<double> out);
// out[i] = |row i - q|^2
void squared_distances(MatrixView m, std::span<const double> q, std::span<double> out);
// Householder x - 2 <v,x> v per row.
void reflect_rows(MatrixView m, std::span<const double> v, std::span<double> out);
// Per-column min/max of rows reflected by v (v empty = no reflection).
void reflected_bounds(MatrixView m, std::span<const double> v,
                      std::span<double> lo, std::span<double> hi);
// One-unit fixed-point moments: returns mean(g'(y)) and writes
// out = mean(z * g(y)) with y = <z, w>, g = tanh(c .).
double fastica_moments(MatrixView z, std::span<const double> w, double c,
                       std::span<double> out);

namespace reference {

std::vector<double> column_means(MatrixView m);
std::vector<double> covariance(MatrixView centered);
void project(MatrixView m, std::span<const double> direction, std::span<double> out);
void squared_distances(MatrixView m, std::span<const double> q, std::span<double> out);
void reflect_rows(MatrixView m, std::span<const double> v, std::span<double> out);
void reflected_bounds(MatrixView m, std::span<const double> v,
                      std::span<double> lo, std::span<double> hi);
double fastica_moments(MatrixView z, std::span<const double> w, double c,
                       std::span<double> out);

}  // namespace reference

}  // namespace ngpt::kernels
