#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <random>
#include <vector>

#include "ngpt/kernels.hpp"
#include "test_support.hpp"

namespace {

using ngpt::kernels::MatrixView;
namespace ref = ngpt::kernels::reference;
namespace par = ngpt::kernels;

struct Shape {
  std::size_t rows;
  std::size_t cols;
};

class KernelShapes : public ::testing::TestWithParam<Shape> {
 protected:
  void SetUp() override {
    const auto [n, d] = GetParam();
    m_ = ngpt::testing::gaussian_matrix(n, d, 11 + n + d);
    std::mt19937_64 rng(5);
    v_ = ngpt::testing::random_unit(d, rng);
  }
  MatrixView view() const { return {m_.values().data(), m_.rows(), m_.dim()}; }

  ngpt::FeatureMatrix m_;
  std::vector<double> v_;
};

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double rel) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], rel * (1.0 + std::abs(b[i]))) << "index " << i;
  }
}

TEST_P(KernelShapes, RowWiseKernelsMatchReferenceExactly) {
  const auto m = view();
  std::vector<double> a(m.rows), b(m.rows);
  par::project(m, v_, a);
  ref::project(m, v_, b);
  EXPECT_EQ(a, b);

  par::squared_distances(m, v_, a);
  ref::squared_distances(m, v_, b);
  EXPECT_EQ(a, b);

  std::vector<double> ra(m.rows * m.cols), rb(m.rows * m.cols);
  par::reflect_rows(m, v_, ra);
  ref::reflect_rows(m, v_, rb);
  EXPECT_EQ(ra, rb);

  for (bool reflected : {false, true}) {
    std::span<const double> v = reflected ? std::span<const double>(v_) : std::span<const double>{};
    std::vector<double> lo_a(m.cols), hi_a(m.cols), lo_b(m.cols), hi_b(m.cols);
    par::reflected_bounds(m, v, lo_a, hi_a);
    ref::reflected_bounds(m, v, lo_b, hi_b);
    EXPECT_EQ(lo_a, lo_b);
    EXPECT_EQ(hi_a, hi_b);
  }
}

TEST_P(KernelShapes, ReductionsMatchReference) {
  const auto m = view();
  expect_close(par::column_means(m), ref::column_means(m), 1e-12);
  expect_close(par::covariance(m), ref::covariance(m), 1e-11);

  std::vector<double> oa(m.cols), ob(m.cols);
  const double ga = par::fastica_moments(m, v_, 1.0, oa);
  const double gb = ref::fastica_moments(m, v_, 1.0, ob);
  EXPECT_NEAR(ga, gb, 1e-12);
  expect_close(oa, ob, 1e-12);
}

TEST_P(KernelShapes, ResultsIndependentOfThreadCount) {
  const auto m = view();
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto mean1 = par::column_means(m);
  const auto cov1 = par::covariance(m);
  std::vector<double> o1(m.cols);
  const double g1 = par::fastica_moments(m, v_, 1.5, o1);
  omp_set_num_threads(4);
  const auto mean4 = par::column_means(m);
  const auto cov4 = par::covariance(m);
  std::vector<double> o4(m.cols);
  const double g4 = par::fastica_moments(m, v_, 1.5, o4);
  omp_set_num_threads(saved);
  EXPECT_EQ(mean1, mean4);
  EXPECT_EQ(cov1, cov4);
  EXPECT_EQ(g1, g4);
  EXPECT_EQ(o1, o4);
}

INSTANTIATE_TEST_SUITE_P(Sizes, KernelShapes,
                         ::testing::Values(Shape{1, 1}, Shape{7, 3}, Shape{1023, 2},
                                           Shape{1025, 25}, Shape{5000, 25},
                                           Shape{3000, 80}));

TEST(Kernels, CovarianceIsSymmetric) {
  const auto m = ngpt::testing::gaussian_matrix(4000, 13, 3);
  const auto cov = par::covariance({m.values().data(), m.rows(), m.dim()});
  for (std::size_t i = 0; i < 13; ++i) {
    for (std::size_t j = 0; j < 13; ++j) EXPECT_EQ(cov[i * 13 + j], cov[j * 13 + i]);
  }
}

TEST(Kernels, SubtractRow) {
  const auto m = ngpt::FeatureMatrix::from_rows({{1, 2}, {3, 4}});
  const std::vector<double> mean{2, 3};
  std::vector<double> out(4);
  par::subtract_row({m.values().data(), 2, 2}, mean, out);
  EXPECT_EQ(out, (std::vector<double>{-1, -1, 1, 1}));
}

TEST(Kernels, SquaredL2) {
  const std::vector<double> a{0, 0, 0}, b{1, 2, 2};
  EXPECT_EQ(par::squared_l2(a, b), 9.0);
  EXPECT_EQ(par::dot(b, b), 9.0);
}

}  // namespace
