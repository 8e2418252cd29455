#include "ngpt/feature_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ngpt/error.hpp"

namespace ngpt {

FeatureMatrix::FeatureMatrix(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(Errc::kInvalidArgument, "dimension must be >= 1");
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dim,
                             std::vector<double> values, std::vector<RowId> ids)
    : rows_(rows), dim_(dim), values_(std::move(values)), ids_(std::move(ids)) {
  if (dim_ == 0) throw Error(Errc::kInvalidArgument, "dimension must be >= 1");
  if (values_.size() != rows_ * dim_) {
    throw Error(Errc::kDimensionMismatch,
                "expected " + std::to_string(rows_ * dim_) + " values, got " +
                    std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(Errc::kInvalidArgument,
                  "non-finite value at row " + std::to_string(i / dim_) +
                      ", column " + std::to_string(i % dim_));
    }
  }
  if (ids_.empty()) {
    ids_.resize(rows_);
    std::iota(ids_.begin(), ids_.end(), RowId{0});
  } else {
    if (ids_.size() != rows_) {
      throw Error(Errc::kDimensionMismatch, "id count differs from row count");
    }
    std::vector<RowId> sorted(ids_);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(Errc::kInvalidArgument, "row ids are not unique");
    }
  }
}

FeatureMatrix::FeatureMatrix(Unchecked, std::size_t rows, std::size_t dim,
                             std::vector<double> values, std::vector<RowId> ids)
    : rows_(rows), dim_(dim), values_(std::move(values)), ids_(std::move(ids)) {}

FeatureMatrix FeatureMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) throw Error(Errc::kInvalidArgument, "no rows");
  const std::size_t d = rows.begin()->size();
  std::vector<double> values;
  values.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw Error(Errc::kDimensionMismatch, "ragged rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return FeatureMatrix(rows.size(), d, std::move(values));
}

namespace {

template <typename Index>
void gather(const FeatureMatrix& m, std::span<const Index> positions,
                     std::vector<double>& values, std::vector<RowId>& ids) {
  const std::size_t d = m.dim();
  values.resize(positions.size() * d);
  ids.resize(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto src = m.row(positions[i]);
    std::copy(src.begin(), src.end(), values.begin() + i * d);
    ids[i] = m.id(positions[i]);
  }
}

}  // namespace

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> positions) const {
  std::vector<double> values;
  std::vector<RowId> ids;
  gather(*this, positions, values, ids);
  return FeatureMatrix(Unchecked{}, positions.size(), dim_, std::move(values),
                       std::move(ids));
}

FeatureMatrix FeatureMatrix::select(
    std::span<const std::uint32_t> positions) const {
  std::vector<double> values;
  std::vector<RowId> ids;
  gather(*this, positions, values, ids);
  return FeatureMatrix(Unchecked{}, positions.size(), dim_, std::move(values),
                       std::move(ids));
}

FeatureMatrix FeatureMatrix::with_values(std::size_t new_dim,
                                         std::vector<double> values) const {
  if (new_dim == 0 || values.size() != rows_ * new_dim) {
    throw Error(Errc::kDimensionMismatch, "with_values: size mismatch");
  }
  return FeatureMatrix(Unchecked{}, rows_, new_dim, std::move(values), ids_);
}

}  // namespace ngpt
