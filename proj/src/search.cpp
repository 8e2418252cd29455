#include "ngpt/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "ngpt/error.hpp"
#include "ngpt/kernels.hpp"

namespace ngpt {

namespace {

struct Candidate {
  double d2;
  RowId id;
  bool operator<(const Candidate& o) const {
    return d2 < o.d2 || (d2 == o.d2 && id < o.id);
  }
};

struct Frontier {
  double d2;
  NodeId node;
  // Inverted for std::priority_queue: smallest bound (then id) on top.
  bool operator<(const Frontier& o) const {
    return d2 > o.d2 || (d2 == o.d2 && node > o.node);
  }
};

double mindist2(std::span<const double> q, const IndexNode& node, std::vector<double>& scratch) {
  std::span<const double> x = q;
  if (!node.reflection.is_identity()) {
    scratch.resize(q.size());
    node.reflection.apply(q, scratch);
    x = scratch;
  }
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    double gap = 0.0;
    if (x[t] < node.mbr.lo[t]) {
      gap = node.mbr.lo[t] - x[t];
    } else if (x[t] > node.mbr.hi[t]) {
      gap = x[t] - node.mbr.hi[t];
    }
    s += gap * gap;
  }
  return s;
}

std::vector<Hit> to_hits(std::priority_queue<Candidate> best) {
  std::vector<Hit> hits(best.size());
  for (std::size_t i = hits.size(); i-- > 0;) {
    hits[i] = {best.top().id, std::sqrt(best.top().d2)};
    best.pop();
  }
  return hits;
}

void check_query(std::size_t got, std::size_t want, std::size_t k) {
  if (k == 0) throw Error(Errc::kInvalidArgument, "k must be >= 1");
  if (got != want) {
    throw Error(Errc::kDimensionMismatch, "query dimension " + std::to_string(got) +
                                              " != index dimension " + std::to_string(want));
  }
}

SearchResult branch_and_bound(const Tree& tree, std::span<const double> q, std::size_t k,
                              std::size_t max_leaves) {
  if (tree.nodes().empty()) throw Error(Errc::kEmptyTree, "tree has no nodes");
  const FeatureMatrix& data = tree.dataset();
  check_query(q.size(), data.dim(), k);
  if (max_leaves == 0) throw Error(Errc::kInvalidArgument, "budget must be >= 1 leaf");

  SearchResult result;
  std::priority_queue<Candidate> best;
  std::priority_queue<Frontier> frontier;
  std::vector<double> scratch;

  frontier.push({mindist2(q, tree.node(tree.root()), scratch), tree.root()});
  while (!frontier.empty()) {
    const Frontier top = frontier.top();
    // Equal bounds are still expanded: they may hold a tie with a smaller id.
    if (best.size() == k && top.d2 > best.top().d2) break;
    frontier.pop();
    const IndexNode& node = tree.node(top.node);
    ++result.stats.nodes_expanded;
    if (!node.childless()) {
      for (NodeId child : {node.left, node.right}) {
        frontier.push({mindist2(q, tree.node(child), scratch), child});
      }
      continue;
    }
    ++result.stats.leaves_visited;
    for (std::uint32_t p : node.members) {
      const Candidate c{kernels::squared_l2(q, data.row(p)), data.id(p)};
      ++result.stats.distance_computations;
      if (best.size() < k) {
        best.push(c);
      } else if (c < best.top()) {
        best.pop();
        best.push(c);
      }
    }
    if (result.stats.leaves_visited >= max_leaves) break;
  }
  result.hits = to_hits(std::move(best));
  return result;
}

}  // namespace

double mindist(std::span<const double> q, const IndexNode& node) {
  if (q.size() != node.mbr.lo.size()) {
    throw Error(Errc::kDimensionMismatch, "mindist: query dimension");
  }
  std::vector<double> scratch;
  return std::sqrt(mindist2(q, node, scratch));
}

SearchResult knn_exact(const Tree& tree, std::span<const double> q, std::size_t k) {
  return branch_and_bound(tree, q, k, std::numeric_limits<std::size_t>::max());
}

SearchResult knn_budgeted(const Tree& tree, std::span<const double> q, std::size_t k,
                          QueryBudget budget) {
  return branch_and_bound(tree, q, k, budget.max_leaves);
}

SearchResult sequential_scan(const FeatureMatrix& data, std::span<const double> q,
                             std::size_t k) {
  if (data.empty()) throw Error(Errc::kEmptyData, "sequential_scan: no rows");
  check_query(q.size(), data.dim(), k);
  std::vector<double> d2(data.rows());
  kernels::squared_distances({data.values().data(), data.rows(), data.dim()}, q, d2);

  std::vector<std::uint32_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0u);
  const auto less = [&](std::uint32_t a, std::uint32_t b) {
    return d2[a] < d2[b] || (d2[a] == d2[b] && data.id(a) < data.id(b));
  };
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                    order.end(), less);

  SearchResult result;
  result.stats.distance_computations = data.rows();
  result.hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    result.hits.push_back({data.id(order[i]), std::sqrt(d2[order[i]])});
  }
  return result;
}

}  // namespace ngpt
