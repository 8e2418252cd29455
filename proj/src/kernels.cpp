#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "ngpt/kernels.hpp"

namespace ngpt::kernels {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t block_count(std::size_t rows) {
  return (rows + kReductionBlock - 1) / kReductionBlock;
}

// Below this many scalar operations the parallel region costs more than it
// saves; leaf-sized inputs stay on the calling thread.
constexpr std::size_t kParallelWork = 1 << 15;

bool worth_parallel(const MatrixView& m) { return m.rows * m.cols >= kParallelWork; }

}  // namespace

std::vector<double> column_means(MatrixView m) {
  const std::size_t nb = block_count(m.rows);
  std::vector<double> partial(nb * m.cols, 0.0);
#pragma omp parallel for schedule(static) if (worth_parallel(m))
  for (std::size_t b = 0; b < nb; ++b) {
    double* acc = partial.data() + b * m.cols;
    const std::size_t end = std::min(m.rows, (b + 1) * kReductionBlock);
    for (std::size_t i = b * kReductionBlock; i < end; ++i) {
      const double* r = m.data + i * m.cols;
      for (std::size_t t = 0; t < m.cols; ++t) acc[t] += r[t];
    }
  }
  std::vector<double> mean(m.cols, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t t = 0; t < m.cols; ++t) mean[t] += partial[b * m.cols + t];
  }
  if (m.rows > 0) {
    for (double& v : mean) v /= static_cast<double>(m.rows);
  }
  return mean;
}

void subtract_row(MatrixView m, std::span<const double> mean, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(m.rows);
#pragma omp parallel for schedule(static) if (worth_parallel(m))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* r = m.data + i * m.cols;
    double* o = out.data() + i * m.cols;
    for (std::size_t t = 0; t < m.cols; ++t) o[t] = r[t] - mean[t];
  }
}

std::vector<double> covariance(MatrixView centered) {
  const std::size_t d = centered.cols;
  const std::size_t nb = block_count(centered.rows);
  std::vector<RowMajor> partial(nb);
#pragma omp parallel for schedule(static) if (worth_parallel(centered))
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t begin = b * kReductionBlock;
    const std::size_t end = std::min(centered.rows, begin + kReductionBlock);
    Eigen::Map<const RowMajor> block(centered.data + begin * d,
                                     static_cast<Eigen::Index>(end - begin),
                                     static_cast<Eigen::Index>(d));
    partial[b].noalias() = block.transpose() * block;
  }
  std::vector<double> cov(d * d, 0.0);
  Eigen::Map<RowMajor> out(cov.data(), static_cast<Eigen::Index>(d),
                           static_cast<Eigen::Index>(d));
  for (const auto& p : partial) out += p;
  if (centered.rows > 0) out /= static_cast<double>(centered.rows);
  // Symmetrize exactly so eigen/power iterations see a symmetric input.
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double s = 0.5 * (cov[i * d + j] + cov[j * d + i]);
      cov[i * d + j] = s;
      cov[j * d + i] = s;
    }
  }
  return cov;
}

void project(MatrixView m, std::span<const double> direction, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(m.rows);
#pragma omp parallel for schedule(static) if (worth_parallel(m))
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = dot(m.row(i), direction);
}

void squared_distances(MatrixView m, std::span<const double> q, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(m.rows);
#pragma omp parallel for schedule(static) if (worth_parallel(m))
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = squared_l2(m.row(i), q);
}

void reflect_rows(MatrixView m, std::span<const double> v, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(m.rows);
#pragma omp parallel for schedule(static) if (worth_parallel(m))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = m.row(i);
    const double s = 2.0 * dot(v, r);
    double* o = out.data() + i * m.cols;
    for (std::size_t t = 0; t < m.cols; ++t) o[t] = r[t] - s * v[t];
  }
}

void reflected_bounds(MatrixView m, std::span<const double> v,
                      std::span<double> lo, std::span<double> hi) {
  const std::size_t d = m.cols;
  const std::size_t nb = block_count(m.rows);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> plo(nb * d, kInf);
  std::vector<double> phi(nb * d, -kInf);
#pragma omp parallel for schedule(static) if (worth_parallel(m))
  for (std::size_t b = 0; b < nb; ++b) {
    double* blo = plo.data() + b * d;
    double* bhi = phi.data() + b * d;
    const std::size_t end = std::min(m.rows, (b + 1) * kReductionBlock);
    for (std::size_t i = b * kReductionBlock; i < end; ++i) {
      const auto r = m.row(i);
      const double s = v.empty() ? 0.0 : 2.0 * dot(v, r);
      for (std::size_t t = 0; t < d; ++t) {
        const double x = v.empty() ? r[t] : r[t] - s * v[t];
        blo[t] = std::min(blo[t], x);
        bhi[t] = std::max(bhi[t], x);
      }
    }
  }
  std::fill(lo.begin(), lo.end(), kInf);
  std::fill(hi.begin(), hi.end(), -kInf);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t t = 0; t < d; ++t) {
      lo[t] = std::min(lo[t], plo[b * d + t]);
      hi[t] = std::max(hi[t], phi[b * d + t]);
    }
  }
}

double fastica_moments(MatrixView z, std::span<const double> w, double c,
                       std::span<double> out) {
  const std::size_t d = z.cols;
  const std::size_t nb = block_count(z.rows);
  std::vector<double> partial(nb * (d + 1), 0.0);
#pragma omp parallel for schedule(static) if (worth_parallel(z))
  for (std::size_t b = 0; b < nb; ++b) {
    double* acc = partial.data() + b * (d + 1);
    const std::size_t end = std::min(z.rows, (b + 1) * kReductionBlock);
    for (std::size_t i = b * kReductionBlock; i < end; ++i) {
      const auto r = z.row(i);
      const double g = std::tanh(c * dot(r, w));
      for (std::size_t t = 0; t < d; ++t) acc[t] += r[t] * g;
      acc[d] += c * (1.0 - g * g);
    }
  }
  std::fill(out.begin(), out.end(), 0.0);
  double gprime = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    const double* acc = partial.data() + b * (d + 1);
    for (std::size_t t = 0; t < d; ++t) out[t] += acc[t];
    gprime += acc[d];
  }
  const double inv_n = 1.0 / static_cast<double>(z.rows);
  for (double& v : out) v *= inv_n;
  return gprime * inv_n;
}

}  // namespace ngpt::kernels
