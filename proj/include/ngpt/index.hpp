#pragma once

// Divisive hierarchical index over a FeatureMatrix. Each iteration picks the
// leaf with the strongest cluster structure, cuts it with a hyperplane
// orthogonal to its projection direction, and boxes both halves with MBRs.
// Variant presets reproduce the comparison structures (NGP, PDDP, NOHIS-style)
// by switching the direction, split, bounding and selection rules.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ngpt/core_math.hpp"
#include "ngpt/feature_matrix.hpp"

namespace ngpt {

enum class DirectionRule : std::uint8_t { kNonGaussian = 0, kPc1 = 1 };
enum class SplitRule : std::uint8_t { kTwoMeansMidpoint = 0, kCentroidProjection = 1 };
enum class BoundingRule : std::uint8_t { kReflectedFrame = 0, kOriginalFrame = 1 };
enum class SelectionRule : std::uint8_t { kSelvalue = 0, kScatter = 1 };

enum class Preset : std::uint8_t { kNoNgp, kNgp, kPddp, kNohis };

std::string_view preset_name(Preset p) noexcept;
std::optional<Preset> parse_preset(std::string_view name) noexcept;
inline constexpr Preset kAllPresets[] = {Preset::kNoNgp, Preset::kNgp,
                                         Preset::kPddp, Preset::kNohis};

struct TreeConfig {
  std::size_t k = 600;          // target number of childless nodes
  double minpts_pct = 25.0;     // percent of n / k
  std::size_t minpts_abs = 0;   // when non-zero, overrides minpts_pct
  DirectionRule direction_rule = DirectionRule::kNonGaussian;
  SplitRule split_rule = SplitRule::kTwoMeansMidpoint;
  BoundingRule bounding_rule = BoundingRule::kReflectedFrame;
  SelectionRule selection_rule = SelectionRule::kSelvalue;
  double c = 1.0;
  double fastica_tol = 1e-6;
  std::size_t fastica_max_iter = 200;
  double pca_tol = 1e-9;
  std::size_t pca_max_iter = 1000;
  double whiten_eps = 1e-10;
  double epsilon = 1e-9;        // containment tolerance
  std::uint64_t seed = 0;

  static TreeConfig preset(Preset p);

  // Throws InvalidConfig.
  void validate() const;
  std::size_t resolved_minpts(std::size_t n) const;

  bool operator==(const TreeConfig&) const = default;
};

// max(1, floor(pct/100 * n / k))
std::size_t minpts_from_pct(std::size_t n, std::size_t k, double pct);

struct ProjectionSummary {
  Direction direction;
  std::vector<double> projections;  // <direction, x> for each row, raw data
  TwoMeansResult two_means;
  double selection_score = 0.0;
};

// Requires >= 2 rows (DegenerateInput otherwise); throws ZeroVariance when all
// rows coincide. `seed` drives the power-iteration start vector.
ProjectionSummary pre_partition(const FeatureMatrix& points, const TreeConfig& cfg,
                                std::uint64_t seed = 0);

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xFFFFFFFFu;

struct SelectionCandidate {
  NodeId id = kNoNode;
  std::size_t size = 0;
  double score = 0.0;
};

// Highest score; ties go to the larger node, then the smaller id.
// Throws NoSplittable if every score is 0.
NodeId select_cluster(std::span<const SelectionCandidate> candidates);

double split_offset(const ProjectionSummary& s, SplitRule rule);

struct SplitPositions {
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};
// Right iff projection - offset > 0. Throws EmptySide.
SplitPositions partition_by_offset(std::span<const double> projections, double offset);

struct SplitSides {
  FeatureMatrix left;
  FeatureMatrix right;
  double offset = 0.0;
};
SplitSides split(const FeatureMatrix& points, const ProjectionSummary& s,
                 const TreeConfig& cfg);

struct Mbr {
  std::vector<double> lo;
  std::vector<double> hi;

  bool contains(std::span<const double> x, double eps) const;
  double volume() const;
  bool operator==(const Mbr&) const = default;
};

struct NodeBounds {
  Reflection reflection;
  Mbr mbr;
};
NodeBounds bound(const FeatureMatrix& side_points, const Direction& a,
                 const TreeConfig& cfg);

enum class NodeKind : std::uint8_t { kDirectory = 0, kLeaf = 1, kOutlier = 2 };

NodeKind classify_child(std::size_t member_count, std::size_t minpts);

struct IndexNode {
  NodeId id = kNoNode;
  NodeKind kind = NodeKind::kLeaf;
  NodeId parent = kNoNode;
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  Reflection reflection;  // maps original coordinates into the MBR frame
  Mbr mbr;
  // Direction of the split that produced this node and its sibling; empty
  // for the root.
  std::optional<Direction> direction;
  double split_offset = 0.0;               // directories only
  std::vector<std::uint32_t> members;      // dataset row positions, childless only

  bool childless() const noexcept { return kind != NodeKind::kDirectory; }
  bool operator==(const IndexNode&) const = default;
};

struct BuildStats {
  std::size_t iterations = 0;
  std::size_t leaves = 0;
  std::size_t outliers = 0;
  bool operator==(const BuildStats&) const = default;
};

// Immutable once built; safe to share across query threads.
class Tree {
 public:
  Tree(std::shared_ptr<const FeatureMatrix> data, TreeConfig cfg,
       std::size_t minpts, std::vector<IndexNode> nodes, BuildStats stats);

  const FeatureMatrix& dataset() const noexcept { return *data_; }
  const std::shared_ptr<const FeatureMatrix>& dataset_handle() const noexcept {
    return data_;
  }
  const TreeConfig& config() const noexcept { return cfg_; }
  std::size_t minpts() const noexcept { return minpts_; }
  const BuildStats& stats() const noexcept { return stats_; }

  NodeId root() const noexcept { return 0; }
  const IndexNode& node(NodeId id) const { return nodes_.at(id); }
  std::span<const IndexNode> nodes() const noexcept { return nodes_; }
  std::size_t childless_count() const noexcept { return stats_.leaves + stats_.outliers; }

  // Node-for-node equality (config, minpts, stats and every node); the
  // dataset is compared by content.
  bool operator==(const Tree& other) const;

 private:
  std::shared_ptr<const FeatureMatrix> data_;
  TreeConfig cfg_;
  std::size_t minpts_;
  std::vector<IndexNode> nodes_;
  BuildStats stats_;
};

Tree build(std::shared_ptr<const FeatureMatrix> data, const TreeConfig& cfg);
Tree build(const FeatureMatrix& data, const TreeConfig& cfg);

// Structural and geometric invariants of a built tree: exact partition of the
// dataset rows, every member inside its node's MBR, sibling boxes separated
// by the split hyperplane (reflected-frame builds), consistent counters.
// Returns one message per violation; empty means the tree is sound.
std::vector<std::string> check_invariants(const Tree& tree, double tol = 1e-9);

}  // namespace ngpt
