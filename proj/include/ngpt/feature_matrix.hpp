#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace ngpt {

using RowId = std::int64_t;

// Dense row-major n x d table of finite feature vectors. Each row carries a
// stable identifier that survives gathers and splits, so a point can always
// be traced back to its row in the original dataset.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  // Empty matrix of the given dimension.
  explicit FeatureMatrix(std::size_t dim);

  // Validates finiteness and id uniqueness. Empty `ids` means 0..rows-1.
  FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<double> values,
                std::vector<RowId> ids = {});

  static FeatureMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<double> mutable_row(std::size_t i) noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  double operator()(std::size_t i, std::size_t t) const noexcept {
    return values_[i * dim_ + t];
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> mutable_values() noexcept { return values_; }
  std::span<const RowId> ids() const noexcept { return ids_; }
  RowId id(std::size_t i) const noexcept { return ids_[i]; }

  // Gathers the given row positions (in that order); ids are carried along.
  FeatureMatrix select(std::span<const std::size_t> positions) const;
  FeatureMatrix select(std::span<const std::uint32_t> positions) const;

  // Same ids, new values (used by maps that keep the row set, e.g. centering
  // or reflection). `values.size()` must be rows * new_dim.
  FeatureMatrix with_values(std::size_t new_dim,
                            std::vector<double> values) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  struct Unchecked {};
  FeatureMatrix(Unchecked, std::size_t rows, std::size_t dim,
                std::vector<double> values, std::vector<RowId> ids);

  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::vector<RowId> ids_;
};

}  // namespace ngpt
