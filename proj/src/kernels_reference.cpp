#include <algorithm>
#include <cmath>
#include <limits>

#include "ngpt/kernels.hpp"

namespace ngpt::kernels::reference {

std::vector<double> column_means(MatrixView m) {
  std::vector<double> mean(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t t = 0; t < m.cols; ++t) mean[t] += m.data[i * m.cols + t];
  }
  for (double& v : mean) v /= static_cast<double>(m.rows);
  return mean;
}

std::vector<double> covariance(MatrixView centered) {
  const std::size_t d = centered.cols;
  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < centered.rows; ++i) {
    const auto r = centered.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) cov[a * d + b] += r[a] * r[b];
    }
  }
  for (double& v : cov) v /= static_cast<double>(centered.rows);
  return cov;
}

void project(MatrixView m, std::span<const double> direction, std::span<double> out) {
  for (std::size_t i = 0; i < m.rows; ++i) out[i] = dot(m.row(i), direction);
}

void squared_distances(MatrixView m, std::span<const double> q, std::span<double> out) {
  for (std::size_t i = 0; i < m.rows; ++i) out[i] = squared_l2(m.row(i), q);
}

void reflect_rows(MatrixView m, std::span<const double> v, std::span<double> out) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    const auto r = m.row(i);
    const double s = dot(v, r);
    for (std::size_t t = 0; t < m.cols; ++t) out[i * m.cols + t] = r[t] - 2.0 * s * v[t];
  }
}

void reflected_bounds(MatrixView m, std::span<const double> v,
                      std::span<double> lo, std::span<double> hi) {
  std::fill(lo.begin(), lo.end(), std::numeric_limits<double>::infinity());
  std::fill(hi.begin(), hi.end(), -std::numeric_limits<double>::infinity());
  std::vector<double> x(m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const auto r = m.row(i);
    const double s = v.empty() ? 0.0 : dot(v, r);
    for (std::size_t t = 0; t < m.cols; ++t) {
      x[t] = v.empty() ? r[t] : r[t] - 2.0 * s * v[t];
      lo[t] = std::min(lo[t], x[t]);
      hi[t] = std::max(hi[t], x[t]);
    }
  }
}

double fastica_moments(MatrixView z, std::span<const double> w, double c,
                       std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  double gprime = 0.0;
  for (std::size_t i = 0; i < z.rows; ++i) {
    const auto r = z.row(i);
    const double g = std::tanh(c * dot(r, w));
    for (std::size_t t = 0; t < z.cols; ++t) out[t] += r[t] * g;
    gprime += c * (1.0 - g * g);
  }
  for (double& v : out) v /= static_cast<double>(z.rows);
  return gprime / static_cast<double>(z.rows);
}

}  // namespace ngpt::kernels::reference
