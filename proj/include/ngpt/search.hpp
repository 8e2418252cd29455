#pragma once

// k-nearest-neighbor queries: best-first branch-and-bound over a Tree,
// ordered by MINDIST, and the sequential-scan baseline.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ngpt/feature_matrix.hpp"
#include "ngpt/index.hpp"

namespace ngpt {

struct Hit {
  RowId id = 0;
  double distance = 0.0;
  bool operator==(const Hit&) const = default;
};

struct SearchStats {
  std::size_t distance_computations = 0;
  std::size_t leaves_visited = 0;  // childless nodes scanned
  std::size_t nodes_expanded = 0;
  bool operator==(const SearchStats&) const = default;
};

// Hits ascend by distance, then by row id.
struct SearchResult {
  std::vector<Hit> hits;
  SearchStats stats;
};

struct QueryBudget {
  std::size_t max_leaves = std::numeric_limits<std::size_t>::max();
};

// Euclidean distance from q to the node's MBR, measured in the node's frame.
double mindist(std::span<const double> q, const IndexNode& node);

SearchResult knn_exact(const Tree& tree, std::span<const double> q, std::size_t k);
SearchResult knn_budgeted(const Tree& tree, std::span<const double> q, std::size_t k,
                          QueryBudget budget);
SearchResult sequential_scan(const FeatureMatrix& data, std::span<const double> q,
                             std::size_t k);

}  // namespace ngpt
