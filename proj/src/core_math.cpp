#include "ngpt/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "ngpt/error.hpp"
#include "ngpt/kernels.hpp"

namespace ngpt {

namespace {

kernels::MatrixView view(const FeatureMatrix& m) {
  return {m.values().data(), m.rows(), m.dim()};
}

double norm(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(Errc::kDimensionMismatch, std::string(what) + ": dimension " +
                                              std::to_string(got) + " != " +
                                              std::to_string(want));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Direction / Reflection

Direction Direction::from(std::vector<double> components) {
  if (components.empty()) throw Error(Errc::kInvalidArgument, "empty direction");
  const double n = norm(components);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(Errc::kInvalidArgument, "direction has zero or non-finite norm");
  }
  for (double& v : components) v /= n;
  for (double v : components) {
    if (std::abs(v) > kSignThreshold) {
      if (v < 0.0) {
        for (double& u : components) u = -u;
      }
      break;
    }
  }
  return Direction(std::move(components));
}

Direction Direction::restore(std::vector<double> components) {
  if (components.empty() || std::abs(norm(components) - 1.0) > 1e-9) {
    throw Error(Errc::kFormatError, "stored direction is not unit-norm");
  }
  return Direction(std::move(components));
}

Direction Direction::axis(std::size_t dim, std::size_t t) {
  std::vector<double> c(dim, 0.0);
  c.at(t) = 1.0;
  return Direction(std::move(c));
}

Reflection Reflection::householder(std::vector<double> unit_v) {
  if (unit_v.empty() || std::abs(norm(unit_v) - 1.0) > 1e-9) {
    throw Error(Errc::kInvalidArgument, "householder vector must be unit-norm");
  }
  Reflection r;
  r.kind_ = Kind::kHouseholder;
  r.v_ = std::move(unit_v);
  return r;
}

void Reflection::apply(std::span<const double> x, std::span<double> out) const {
  if (is_identity()) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  require_dim(x.size(), v_.size(), "reflect");
  const double s = 2.0 * kernels::dot(v_, x);
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = x[t] - s * v_[t];
}

std::vector<double> Reflection::apply(std::span<const double> x) const {
  std::vector<double> out(x.size());
  apply(x, out);
  return out;
}

// ---------------------------------------------------------------------------
// Centering, covariance, PCA, whitening

Centered center(const FeatureMatrix& m) {
  if (m.empty()) throw Error(Errc::kInvalidArgument, "center: no rows");
  Centered out;
  out.mean = kernels::column_means(view(m));
  std::vector<double> values(m.rows() * m.dim());
  kernels::subtract_row(view(m), out.mean, values);
  out.matrix = m.with_values(m.dim(), std::move(values));
  return out;
}

std::vector<double> covariance(const FeatureMatrix& centered) {
  if (centered.empty()) throw Error(Errc::kInvalidArgument, "covariance: no rows");
  return kernels::covariance(view(centered));
}

Direction principal_component(const FeatureMatrix& centered, double tol,
                              std::size_t max_iter, std::uint64_t seed) {
  if (centered.rows() < 2) {
    throw Error(Errc::kDegenerateInput, "principal_component needs >= 2 rows");
  }
  const auto cov = covariance(centered);
  return principal_component_of_covariance(cov, centered.dim(), tol, max_iter, seed);
}

Direction principal_component_of_covariance(std::span<const double> cov,
                                            std::size_t dim, double tol,
                                            std::size_t max_iter,
                                            std::uint64_t seed) {
  require_dim(cov.size(), dim * dim, "covariance");
  double trace = 0.0;
  for (std::size_t t = 0; t < dim; ++t) trace += cov[t * dim + t];
  if (!(trace > 0.0)) throw Error(Errc::kZeroVariance, "covariance is zero");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> w(dim);
  for (double& v : w) v = normal(rng);
  double n = norm(w);
  for (double& v : w) v /= n;

  std::vector<double> next(dim);
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < dim; ++i) {
      next[i] = kernels::dot(cov.subspan(i * dim, dim), w);
    }
    n = norm(next);
    if (!(n > 0.0)) {
      // Start vector landed in the null space; restart from the axis with the
      // largest variance.
      std::size_t best = 0;
      for (std::size_t t = 1; t < dim; ++t) {
        if (cov[t * dim + t] > cov[best * dim + best]) best = t;
      }
      std::fill(w.begin(), w.end(), 0.0);
      w[best] = 1.0;
      continue;
    }
    for (double& v : next) v /= n;
    const bool done = std::abs(kernels::dot(next, w)) > 1.0 - tol;
    std::swap(w, next);
    if (done) break;
  }
  return Direction::from(std::move(w));
}

Whitening whiten(const FeatureMatrix& centered, double eps) {
  const auto cov = covariance(centered);
  return whiten(centered, cov, eps);
}

Whitening whiten(const FeatureMatrix& centered, std::span<const double> cov,
                 double eps) {
  const std::size_t d = centered.dim();
  require_dim(cov.size(), d * d, "covariance");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> c(cov.data(), static_cast<Eigen::Index>(d),
                                     static_cast<Eigen::Index>(d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::kZeroVariance, "eigendecomposition failed");
  }
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const double largest = values(static_cast<Eigen::Index>(d) - 1);
  if (!(largest > 0.0)) throw Error(Errc::kZeroVariance, "covariance is zero");

  Whitening w;
  w.dim = d;
  for (Eigen::Index j = static_cast<Eigen::Index>(d) - 1; j >= 0; --j) {
    if (values(j) > eps * largest) w.eigenvalues.push_back(values(j));
  }
  w.retained = w.eigenvalues.size();
  w.basis.assign(d * w.retained, 0.0);
  for (std::size_t k = 0; k < w.retained; ++k) {
    const Eigen::Index col = static_cast<Eigen::Index>(d - 1 - k);
    // Canonical sign per eigenvector so the basis is reproducible.
    double sign = 1.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double v = vectors(static_cast<Eigen::Index>(t), col);
      if (std::abs(v) > Direction::kSignThreshold) {
        sign = v < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t t = 0; t < d; ++t) {
      w.basis[t * w.retained + k] = sign * vectors(static_cast<Eigen::Index>(t), col);
    }
  }

  // z = D^{-1/2} E^T x
  const std::size_t n = centered.rows();
  std::vector<double> z(n * w.retained);
  Eigen::Map<const RowMajor> x(centered.values().data(),
                               static_cast<Eigen::Index>(n),
                               static_cast<Eigen::Index>(d));
  Eigen::Map<const RowMajor> e(w.basis.data(), static_cast<Eigen::Index>(d),
                               static_cast<Eigen::Index>(w.retained));
  Eigen::Map<RowMajor> zm(z.data(), static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(w.retained));
  zm.noalias() = x * e;
  for (std::size_t k = 0; k < w.retained; ++k) {
    zm.col(static_cast<Eigen::Index>(k)) /= std::sqrt(w.eigenvalues[k]);
  }
  w.whitened = centered.with_values(w.retained, std::move(z));
  return w;
}

std::vector<double> Whitening::whiten_point(std::span<const double> x) const {
  require_dim(x.size(), dim, "whiten_point");
  std::vector<double> z(retained, 0.0);
  for (std::size_t t = 0; t < dim; ++t) {
    for (std::size_t k = 0; k < retained; ++k) z[k] += basis[t * retained + k] * x[t];
  }
  for (std::size_t k = 0; k < retained; ++k) z[k] /= std::sqrt(eigenvalues[k]);
  return z;
}

std::vector<double> Whitening::forward_direction(std::span<const double> a) const {
  require_dim(a.size(), dim, "forward_direction");
  // <a, x> = <a, E D^{1/2} z> = <D^{1/2} E^T a, z>
  std::vector<double> w(retained, 0.0);
  for (std::size_t t = 0; t < dim; ++t) {
    for (std::size_t k = 0; k < retained; ++k) w[k] += basis[t * retained + k] * a[t];
  }
  for (std::size_t k = 0; k < retained; ++k) w[k] *= std::sqrt(eigenvalues[k]);
  const double n = norm(w);
  if (!(n > 0.0)) throw Error(Errc::kZeroVariance, "direction has no retained component");
  for (double& v : w) v /= n;
  return w;
}

std::vector<double> Whitening::inverse_direction(std::span<const double> w) const {
  require_dim(w.size(), retained, "inverse_direction");
  // <w, z> = <w, D^{-1/2} E^T x> = <E D^{-1/2} w, x>
  std::vector<double> a(dim, 0.0);
  for (std::size_t t = 0; t < dim; ++t) {
    for (std::size_t k = 0; k < retained; ++k) {
      a[t] += basis[t * retained + k] * w[k] / std::sqrt(eigenvalues[k]);
    }
  }
  const double n = norm(a);
  if (!(n > 0.0)) throw Error(Errc::kInvalidArgument, "zero whitened direction");
  for (double& v : a) v /= n;
  return a;
}

// ---------------------------------------------------------------------------
// Projection pursuit

double contrast_g(double u, double c) { return std::tanh(c * u); }

double contrast_g_derivative(double u, double c) {
  const double t = std::tanh(c * u);
  return c * (1.0 - t * t);
}

double contrast_primitive(double u, double c) {
  // log cosh x = |x| + log1p(exp(-2|x|)) - log 2, stable for large |x|.
  const double x = std::abs(c * u);
  return (x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2) / c;
}

double gaussian_contrast_expectation(double c) {
  static std::mutex mu;
  static std::map<double, double> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(c); it != cache.end()) return it->second;
  }
  // Composite Simpson on [-L, L]; the Gaussian tail beyond 12 is < 1e-32.
  constexpr double kLimit = 12.0;
  constexpr int kIntervals = 24000;
  const double h = 2.0 * kLimit / kIntervals;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto f = [&](double u) {
    return contrast_primitive(u, c) * inv_sqrt_2pi * std::exp(-0.5 * u * u);
  };
  double sum = f(-kLimit) + f(kLimit);
  for (int i = 1; i < kIntervals; ++i) {
    sum += f(-kLimit + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  const double value = sum * h / 3.0;
  std::lock_guard lock(mu);
  cache.emplace(c, value);
  return value;
}

double negentropy_approx(std::span<const double> y, double c) {
  if (y.empty()) throw Error(Errc::kInvalidArgument, "negentropy of empty sample");
  double mean = 0.0;
  for (double v : y) mean += contrast_primitive(v, c);
  mean /= static_cast<double>(y.size());
  const double diff = mean - gaussian_contrast_expectation(c);
  return diff * diff;
}

FastIcaResult fastica_one_unit(const FeatureMatrix& whitened,
                               const Direction& init, double c, double tol,
                               std::size_t max_iter) {
  if (whitened.rows() < 2) {
    throw Error(Errc::kDegenerateInput, "fastica needs >= 2 rows");
  }
  require_dim(init.size(), whitened.dim(), "fastica init");
  const auto z = view(whitened);
  std::vector<double> w(init.components().begin(), init.components().end());
  std::vector<double> next(w.size());
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const double gprime = kernels::fastica_moments(z, w, c, next);
    for (std::size_t t = 0; t < w.size(); ++t) next[t] -= gprime * w[t];
    const double n = norm(next);
    if (!(n > 0.0) || !std::isfinite(n)) break;
    for (double& v : next) v /= n;
    const bool done = std::abs(kernels::dot(next, w)) > 1.0 - tol;
    std::swap(w, next);
    if (done) return {Direction::from(std::move(w)), true, it};
  }
  return {init, false, max_iter};
}

std::vector<double> project(const FeatureMatrix& m, const Direction& a) {
  require_dim(a.size(), m.dim(), "project");
  std::vector<double> out(m.rows());
  kernels::project(view(m), a.components(), out);
  return out;
}

// ---------------------------------------------------------------------------
// Scalar 2-means and selection measures

TwoMeansResult two_means_1d(std::span<const double> values, std::size_t max_iter) {
  if (values.empty()) throw Error(Errc::kInvalidArgument, "two_means_1d: no values");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  TwoMeansResult r;
  r.cp1 = *mn;
  r.cp2 = *mx;
  r.labels.assign(values.size(), 0);
  for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
    bool changed = false;
    double sum1 = 0.0, sum2 = 0.0;
    std::size_t n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = values[i];
      const std::uint8_t label = std::abs(v - r.cp1) <= std::abs(v - r.cp2) ? 1 : 2;
      if (label != r.labels[i]) {
        r.labels[i] = label;
        changed = true;
      }
      if (label == 1) {
        sum1 += v;
        ++n1;
      } else {
        sum2 += v;
        ++n2;
      }
    }
    r.iterations = it + 1;
    if (n1 > 0) r.cp1 = sum1 / static_cast<double>(n1);
    if (n2 > 0) r.cp2 = sum2 / static_cast<double>(n2);
    if (!changed) break;
  }
  if (r.cp1 > r.cp2) {
    std::swap(r.cp1, r.cp2);
    for (auto& l : r.labels) l = static_cast<std::uint8_t>(3 - l);
  }
  return r;
}

double diameter(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::kInvalidArgument, "diameter: no values");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  return *mx - *mn;
}

double selvalue(const TwoMeansResult& tm, std::span<const double> values) {
  require_dim(tm.labels.size(), values.size(), "selvalue labels");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double lo[2] = {kInf, kInf};
  double hi[2] = {-kInf, -kInf};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int g = tm.labels[i] == 1 ? 0 : 1;
    lo[g] = std::min(lo[g], values[i]);
    hi[g] = std::max(hi[g], values[i]);
  }
  double widest = 0.0;
  for (int g = 0; g < 2; ++g) {
    if (hi[g] >= lo[g]) widest = std::max(widest, hi[g] - lo[g]);
  }
  const double gap = std::abs(tm.cp1 - tm.cp2);
  if (widest == 0.0) return gap == 0.0 ? 0.0 : kSelvalueUnbounded;
  return gap / widest;
}

double scatter_value(const FeatureMatrix& m) {
  if (m.empty()) throw Error(Errc::kInvalidArgument, "scatter_value: no rows");
  const auto mean = kernels::column_means(view(m));
  double total = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) total += kernels::squared_l2(m.row(i), mean);
  return total / static_cast<double>(m.rows());
}

// ---------------------------------------------------------------------------
// Householder reflections

Reflection householder_from_direction(const Direction& a) {
  std::vector<double> v(a.components().begin(), a.components().end());
  v[0] -= 1.0;
  const double n = norm(v);
  if (n < 1e-12) return Reflection{};
  for (double& x : v) x /= n;
  return Reflection::householder(std::move(v));
}

std::vector<double> reflect(std::span<const double> x, const Reflection& r) {
  return r.apply(x);
}

FeatureMatrix reflect(const FeatureMatrix& m, const Reflection& r) {
  if (r.is_identity()) return m;
  require_dim(r.vector().size(), m.dim(), "reflect");
  std::vector<double> out(m.rows() * m.dim());
  kernels::reflect_rows(view(m), r.vector(), out);
  return m.with_values(m.dim(), std::move(out));
}

}  // namespace ngpt
