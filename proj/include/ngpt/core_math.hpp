#pragma once

// Numeric building blocks of the index: centering and whitening, the first
// principal component, one-unit fixed-point projection pursuit, scalar
// 2-means, the cluster-selection measures and Householder reflections.
//
// Everything here is a pure function of its arguments.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ngpt/feature_matrix.hpp"

namespace ngpt {

// Unit vector with a canonical sign: the first component whose magnitude
// exceeds 1e-12 is positive. Two directions spanning the same line compare
// equal after construction, which keeps builds bit-reproducible.
class Direction {
 public:
  static constexpr double kSignThreshold = 1e-12;

  // Normalizes and sign-canonicalizes. Throws on a zero or non-finite input.
  static Direction from(std::vector<double> components);
  // Restores a stored direction verbatim; only checks it is unit-norm.
  static Direction restore(std::vector<double> components);
  static Direction axis(std::size_t dim, std::size_t t);

  std::span<const double> components() const noexcept { return c_; }
  std::size_t size() const noexcept { return c_.size(); }
  double operator[](std::size_t t) const noexcept { return c_[t]; }

  bool operator==(const Direction&) const = default;

 private:
  explicit Direction(std::vector<double> c) : c_(std::move(c)) {}
  std::vector<double> c_;
};

// Either the identity or x -> x - 2 <v,x> v for a unit vector v.
class Reflection {
 public:
  enum class Kind : std::uint8_t { kIdentity = 0, kHouseholder = 1 };

  Reflection() = default;
  // `unit_v` must already have unit norm (within 1e-9).
  static Reflection householder(std::vector<double> unit_v);

  Kind kind() const noexcept { return kind_; }
  bool is_identity() const noexcept { return kind_ == Kind::kIdentity; }
  // Empty for the identity.
  std::span<const double> vector() const noexcept { return v_; }

  void apply(std::span<const double> x, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> x) const;

  bool operator==(const Reflection&) const = default;

 private:
  Kind kind_ = Kind::kIdentity;
  std::vector<double> v_;
};

struct TwoMeansResult {
  double cp1 = 0.0;  // smaller centroid
  double cp2 = 0.0;  // larger centroid
  std::vector<std::uint8_t> labels;  // 1 or 2, aligned with the input
  std::size_t iterations = 0;
};

struct Centered {
  FeatureMatrix matrix;
  std::vector<double> mean;
};

Centered center(const FeatureMatrix& m);

// Biased sample covariance (row-major d x d) of centered rows.
std::vector<double> covariance(const FeatureMatrix& centered);

// Leading eigenvector of the sample covariance by power iteration, stopping
// once |<w_t, w_{t-1}>| > 1 - tol. The start vector is drawn from `seed`.
// Throws ZeroVariance when the covariance is identically zero.
Direction principal_component(const FeatureMatrix& centered, double tol,
                              std::size_t max_iter, std::uint64_t seed = 0);
Direction principal_component_of_covariance(std::span<const double> cov,
                                            std::size_t dim, double tol,
                                            std::size_t max_iter,
                                            std::uint64_t seed = 0);

// PCA whitening. Only eigen-directions with eigenvalue > eps * largest are
// kept, so `whitened.dim()` may be smaller than the input dimension.
struct Whitening {
  FeatureMatrix whitened;
  std::size_t dim = 0;       // original dimension
  std::size_t retained = 0;  // whitened dimension
  std::vector<double> basis;        // dim x retained, row-major; unit columns
  std::vector<double> eigenvalues;  // descending, length retained

  // Maps a point from original to whitened coordinates.
  std::vector<double> whiten_point(std::span<const double> x) const;
  // Direction maps preserve projections up to a positive scale:
  //   <forward_direction(a), whiten_point(x)> ~ <a, x>
  //   <a', x> ~ <w, whiten_point(x)>  for a' = inverse_direction(w)
  // Both results are unit-normalized (not sign-canonicalized).
  std::vector<double> forward_direction(std::span<const double> a) const;
  std::vector<double> inverse_direction(std::span<const double> w) const;
};

Whitening whiten(const FeatureMatrix& centered, double eps);
Whitening whiten(const FeatureMatrix& centered, std::span<const double> cov,
                 double eps);

// Projection-pursuit nonlinearity tanh(c u) and its derivative.
double contrast_g(double u, double c);
double contrast_g_derivative(double u, double c);
// log(cosh(c u)) / c, the contrast whose derivative is contrast_g.
double contrast_primitive(double u, double c);
// E[contrast_primitive(v, c)] for v ~ N(0,1), by quadrature; cached per c.
double gaussian_contrast_expectation(double c);

// [mean(G(y)) - E_G]^2 for standardized y.
double negentropy_approx(std::span<const double> y, double c);

struct FastIcaResult {
  Direction direction;  // in whitened coordinates
  bool converged = false;
  std::size_t iterations = 0;
};

// One-unit fixed-point iteration on centered, whitened rows:
//   w+ = mean(z g(w'z)) - mean(g'(w'z)) w,  w = w+ / |w+|
// Returns `init` with converged=false if max_iter is exhausted.
FastIcaResult fastica_one_unit(const FeatureMatrix& whitened,
                               const Direction& init, double c, double tol,
                               std::size_t max_iter);

std::vector<double> project(const FeatureMatrix& m, const Direction& a);

TwoMeansResult two_means_1d(std::span<const double> values,
                            std::size_t max_iter = 100);

// max - min of signed values.
double diameter(std::span<const double> values);

// Returned by selvalue when the centroids differ but both sub-clusters have
// zero diameter.
inline constexpr double kSelvalueUnbounded = std::numeric_limits<double>::infinity();

double selvalue(const TwoMeansResult& tm, std::span<const double> values);

// Mean squared distance to the centroid.
double scatter_value(const FeatureMatrix& m);

Reflection householder_from_direction(const Direction& a);

std::vector<double> reflect(std::span<const double> x, const Reflection& r);
FeatureMatrix reflect(const FeatureMatrix& m, const Reflection& r);

}  // namespace ngpt
