#include "ngpt/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ngpt/error.hpp"
#include "ngpt/kernels.hpp"

namespace ngpt {

namespace {

kernels::MatrixView view(const FeatureMatrix& m) {
  return {m.values().data(), m.rows(), m.dim()};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

bool all_rows_identical(const FeatureMatrix& m) {
  const auto first = m.row(0);
  for (std::size_t i = 1; i < m.rows(); ++i) {
    if (!std::equal(first.begin(), first.end(), m.row(i).begin())) return false;
  }
  return true;
}

}  // namespace

std::string_view preset_name(Preset p) noexcept {
  switch (p) {
    case Preset::kNoNgp: return "no-ngp";
    case Preset::kNgp: return "ngp";
    case Preset::kPddp: return "pddp";
    case Preset::kNohis: return "nohis";
  }
  return "unknown";
}

std::optional<Preset> parse_preset(std::string_view name) noexcept {
  for (Preset p : kAllPresets) {
    if (preset_name(p) == name) return p;
  }
  return std::nullopt;
}

TreeConfig TreeConfig::preset(Preset p) {
  TreeConfig cfg;
  switch (p) {
    case Preset::kNoNgp:
      break;
    case Preset::kNgp:
      cfg.bounding_rule = BoundingRule::kOriginalFrame;
      break;
    case Preset::kPddp:
      cfg.direction_rule = DirectionRule::kPc1;
      cfg.split_rule = SplitRule::kCentroidProjection;
      cfg.bounding_rule = BoundingRule::kOriginalFrame;
      cfg.selection_rule = SelectionRule::kScatter;
      break;
    case Preset::kNohis:
      cfg.direction_rule = DirectionRule::kPc1;
      cfg.split_rule = SplitRule::kCentroidProjection;
      cfg.bounding_rule = BoundingRule::kReflectedFrame;
      cfg.selection_rule = SelectionRule::kScatter;
      break;
  }
  return cfg;
}

void TreeConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::kInvalidConfig, what); };
  if (k < 1) fail("k must be >= 1");
  if (minpts_abs == 0 && !(minpts_pct > 0.0 && minpts_pct <= 100.0)) {
    fail("minpts_pct must be in (0, 100]");
  }
  if (!(c >= 1.0 && c <= 2.0)) fail("contrast constant c must be in [1, 2]");
  if (!(fastica_tol > 0.0) || !(pca_tol > 0.0)) fail("tolerances must be positive");
  if (!(whiten_eps > 0.0) || !(epsilon >= 0.0)) fail("eps values out of range");
  if (fastica_max_iter < 1 || pca_max_iter < 1) fail("iteration limits must be >= 1");
}

std::size_t TreeConfig::resolved_minpts(std::size_t n) const {
  return minpts_abs > 0 ? minpts_abs : minpts_from_pct(n, k, minpts_pct);
}

std::size_t minpts_from_pct(std::size_t n, std::size_t k, double pct) {
  if (n < 1 || k < 1 || !(pct > 0.0 && pct <= 100.0)) {
    throw Error(Errc::kInvalidArgument, "minpts_from_pct: n, k >= 1 and pct in (0,100]");
  }
  // Integer form of floor(pct/100 * n / k) when pct is whole, avoiding
  // 0.29999.. style truncation; fall back to floating point otherwise.
  double value;
  if (pct == std::floor(pct)) {
    value = std::floor(static_cast<double>(static_cast<std::uint64_t>(pct) * n) /
                       (100.0 * static_cast<double>(k)));
  } else {
    value = std::floor(pct / 100.0 * static_cast<double>(n) / static_cast<double>(k));
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(value));
}

// ---------------------------------------------------------------------------

ProjectionSummary pre_partition(const FeatureMatrix& points, const TreeConfig& cfg,
                                std::uint64_t seed) {
  if (points.rows() < 2) {
    throw Error(Errc::kDegenerateInput, "pre_partition needs >= 2 rows");
  }
  if (all_rows_identical(points)) {
    throw Error(Errc::kZeroVariance, "all points coincide");
  }
  const Centered centered = center(points);
  const auto cov = covariance(centered.matrix);
  const Direction pc1 = principal_component_of_covariance(
      cov, points.dim(), cfg.pca_tol, cfg.pca_max_iter, seed);

  std::optional<Direction> direction;
  if (cfg.direction_rule == DirectionRule::kNonGaussian) {
    const Whitening w = whiten(centered.matrix, cov, cfg.whiten_eps);
    const Direction init = Direction::from(w.forward_direction(pc1.components()));
    const FastIcaResult ica = fastica_one_unit(w.whitened, init, cfg.c,
                                               cfg.fastica_tol, cfg.fastica_max_iter);
    if (ica.converged) {
      direction = Direction::from(w.inverse_direction(ica.direction.components()));
    }
  }
  if (!direction) direction = pc1;

  ProjectionSummary s{*direction, project(points, *direction), {}, 0.0};
  s.two_means = two_means_1d(s.projections);
  s.selection_score = cfg.selection_rule == SelectionRule::kSelvalue
                          ? selvalue(s.two_means, s.projections)
                          : scatter_value(points);
  return s;
}

NodeId select_cluster(std::span<const SelectionCandidate> candidates) {
  if (candidates.empty()) throw Error(Errc::kInvalidArgument, "no candidates");
  const SelectionCandidate* best = nullptr;
  for (const auto& c : candidates) {
    if (!(c.score > 0.0)) continue;
    if (best == nullptr || c.score > best->score ||
        (c.score == best->score &&
         (c.size > best->size || (c.size == best->size && c.id < best->id)))) {
      best = &c;
    }
  }
  if (best == nullptr) throw Error(Errc::kNoSplittable, "every candidate scores 0");
  return best->id;
}

double split_offset(const ProjectionSummary& s, SplitRule rule) {
  if (rule == SplitRule::kTwoMeansMidpoint) {
    return 0.5 * (s.two_means.cp1 + s.two_means.cp2);
  }
  // Projection of the data centroid = mean of the projections.
  double sum = 0.0;
  for (double v : s.projections) sum += v;
  return sum / static_cast<double>(s.projections.size());
}

SplitPositions partition_by_offset(std::span<const double> projections, double offset) {
  SplitPositions out;
  for (std::size_t i = 0; i < projections.size(); ++i) {
    (projections[i] - offset > 0.0 ? out.right : out.left).push_back(i);
  }
  if (out.left.empty() || out.right.empty()) {
    throw Error(Errc::kEmptySide, "every point falls on one side of the split");
  }
  return out;
}

SplitSides split(const FeatureMatrix& points, const ProjectionSummary& s,
                 const TreeConfig& cfg) {
  if (points.rows() < 2) throw Error(Errc::kDegenerateInput, "split needs >= 2 rows");
  if (s.projections.size() != points.rows()) {
    throw Error(Errc::kDimensionMismatch, "projection count differs from row count");
  }
  const double offset = split_offset(s, cfg.split_rule);
  const SplitPositions sides = partition_by_offset(s.projections, offset);
  return {points.select(std::span<const std::size_t>(sides.left)),
          points.select(std::span<const std::size_t>(sides.right)), offset};
}

bool Mbr::contains(std::span<const double> x, double eps) const {
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t] < lo[t] - eps || x[t] > hi[t] + eps) return false;
  }
  return true;
}

double Mbr::volume() const {
  double v = 1.0;
  for (std::size_t t = 0; t < lo.size(); ++t) v *= hi[t] - lo[t];
  return v;
}

NodeBounds bound(const FeatureMatrix& side_points, const Direction& a,
                 const TreeConfig& cfg) {
  if (side_points.empty()) throw Error(Errc::kInvalidArgument, "bound: no points");
  if (a.size() != side_points.dim()) {
    throw Error(Errc::kDimensionMismatch, "bound: direction dimension");
  }
  NodeBounds b;
  if (cfg.bounding_rule == BoundingRule::kReflectedFrame) {
    b.reflection = householder_from_direction(a);
  }
  b.mbr.lo.resize(side_points.dim());
  b.mbr.hi.resize(side_points.dim());
  kernels::reflected_bounds(view(side_points), b.reflection.vector(), b.mbr.lo, b.mbr.hi);
  return b;
}

NodeKind classify_child(std::size_t member_count, std::size_t minpts) {
  return member_count < minpts ? NodeKind::kOutlier : NodeKind::kLeaf;
}

// ---------------------------------------------------------------------------

Tree::Tree(std::shared_ptr<const FeatureMatrix> data, TreeConfig cfg,
           std::size_t minpts, std::vector<IndexNode> nodes, BuildStats stats)
    : data_(std::move(data)),
      cfg_(cfg),
      minpts_(minpts),
      nodes_(std::move(nodes)),
      stats_(stats) {
  if (!data_) throw Error(Errc::kInvalidArgument, "tree without dataset");
}

bool Tree::operator==(const Tree& other) const {
  return cfg_ == other.cfg_ && minpts_ == other.minpts_ && stats_ == other.stats_ &&
         nodes_ == other.nodes_ && (data_ == other.data_ || *data_ == *other.data_);
}

namespace {

struct Candidate {
  std::optional<ProjectionSummary> summary;
  double score = 0.0;
};

Candidate prepare(const FeatureMatrix& data, const IndexNode& node,
                  const TreeConfig& cfg) {
  Candidate c;
  if (node.members.size() < 2) return c;
  try {
    const FeatureMatrix points = data.select(std::span<const std::uint32_t>(node.members));
    c.summary = pre_partition(points, cfg, splitmix64(cfg.seed ^ splitmix64(node.id)));
    c.score = c.summary->selection_score;
    if (!(c.score > 0.0)) c.summary.reset();
  } catch (const Error& e) {
    if (e.code() != Errc::kZeroVariance) throw;
  }
  return c;
}

}  // namespace

Tree build(const FeatureMatrix& data, const TreeConfig& cfg) {
  return build(std::make_shared<const FeatureMatrix>(data), cfg);
}

Tree build(std::shared_ptr<const FeatureMatrix> data, const TreeConfig& cfg) {
  cfg.validate();
  if (!data || data->empty()) throw Error(Errc::kEmptyData, "build: empty dataset");
  const FeatureMatrix& m = *data;
  const std::size_t minpts = cfg.resolved_minpts(m.rows());

  std::vector<IndexNode> nodes;
  nodes.reserve(2 * cfg.k);
  {
    IndexNode root;
    root.id = 0;
    root.kind = NodeKind::kLeaf;  // the root-as-leaf is exempt from minpts
    root.members.resize(m.rows());
    std::iota(root.members.begin(), root.members.end(), 0u);
    root.mbr.lo.resize(m.dim());
    root.mbr.hi.resize(m.dim());
    kernels::reflected_bounds(view(m), {}, root.mbr.lo, root.mbr.hi);
    nodes.push_back(std::move(root));
  }

  std::vector<Candidate> pending(1);
  std::vector<NodeId> open_leaves{0};
  std::size_t childless = 1;
  BuildStats stats;

  if (cfg.k > 1) pending[0] = prepare(m, nodes[0], cfg);

  while (childless < cfg.k) {
    std::vector<SelectionCandidate> candidates;
    candidates.reserve(open_leaves.size());
    for (NodeId id : open_leaves) {
      candidates.push_back({id, nodes[id].members.size(), pending[id].score});
    }
    NodeId chosen;
    try {
      chosen = select_cluster(candidates);
    } catch (const Error& e) {
      if (e.code() == Errc::kNoSplittable) break;
      throw;
    }

    ProjectionSummary summary = std::move(*pending[chosen].summary);
    pending[chosen] = {};
    const double offset = split_offset(summary, cfg.split_rule);
    SplitPositions sides;
    try {
      sides = partition_by_offset(summary.projections, offset);
    } catch (const Error& e) {
      if (e.code() != Errc::kEmptySide) throw;
      continue;  // score reset above; the node stays an unsplittable leaf
    }

    const NodeId left_id = static_cast<NodeId>(nodes.size());
    const NodeId right_id = left_id + 1;
    const std::vector<std::uint32_t> parent_members = std::move(nodes[chosen].members);
    for (int side = 0; side < 2; ++side) {
      const auto& positions = side == 0 ? sides.left : sides.right;
      IndexNode child;
      child.id = side == 0 ? left_id : right_id;
      child.parent = chosen;
      child.members.reserve(positions.size());
      for (std::size_t p : positions) child.members.push_back(parent_members[p]);
      child.kind = classify_child(child.members.size(), minpts);
      child.direction = summary.direction;
      const FeatureMatrix pts = m.select(std::span<const std::uint32_t>(child.members));
      NodeBounds b = bound(pts, summary.direction, cfg);
      child.reflection = std::move(b.reflection);
      child.mbr = std::move(b.mbr);
      nodes.push_back(std::move(child));
    }

    IndexNode& parent = nodes[chosen];
    parent.kind = NodeKind::kDirectory;
    parent.left = left_id;
    parent.right = right_id;
    parent.split_offset = offset;
    parent.members = {};
    std::erase(open_leaves, chosen);

    ++childless;
    ++stats.iterations;
    pending.resize(nodes.size());

    const NodeId fresh[2] = {left_id, right_id};
    if (childless < cfg.k) {
      // Independent per child; results land in fixed slots, so the merge
      // order does not depend on scheduling.
#pragma omp parallel for schedule(static, 1) if (nodes[left_id].members.size() + nodes[right_id].members.size() > 4096)
      for (int j = 0; j < 2; ++j) {
        if (nodes[fresh[j]].kind == NodeKind::kLeaf) {
          pending[fresh[j]] = prepare(m, nodes[fresh[j]], cfg);
        }
      }
    }
    for (NodeId id : fresh) {
      if (nodes[id].kind == NodeKind::kLeaf) open_leaves.push_back(id);
    }
  }

  for (const auto& n : nodes) {
    if (n.kind == NodeKind::kLeaf) ++stats.leaves;
    if (n.kind == NodeKind::kOutlier) ++stats.outliers;
  }
  return Tree(std::move(data), cfg, minpts, std::move(nodes), stats);
}

// ---------------------------------------------------------------------------

std::vector<std::string> check_invariants(const Tree& tree, double tol) {
  std::vector<std::string> problems;
  auto fail = [&](NodeId id, const std::string& what) {
    problems.push_back("node " + std::to_string(id) + ": " + what);
  };
  const FeatureMatrix& data = tree.dataset();
  const auto nodes = tree.nodes();
  std::vector<int> seen(data.rows(), 0);
  std::vector<char> reached(nodes.size(), 0);
  std::size_t leaves = 0, outliers = 0;

  std::vector<NodeId> stack{tree.root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (id >= nodes.size()) {
      fail(id, "dangling child reference");
      continue;
    }
    if (reached[id]) {
      fail(id, "reached twice");
      continue;
    }
    reached[id] = 1;
    const IndexNode& n = nodes[id];
    if (n.id != id) fail(id, "id does not match its slot");
    if (n.childless()) {
      if (n.left != kNoNode || n.right != kNoNode) fail(id, "childless node has children");
      if (n.kind == NodeKind::kLeaf) ++leaves;
      if (n.kind == NodeKind::kOutlier) ++outliers;
      if (n.kind == NodeKind::kOutlier && n.members.size() >= tree.minpts()) {
        fail(id, "outlier with >= minpts members");
      }
      if (n.kind == NodeKind::kLeaf && id != tree.root() && n.members.size() < tree.minpts()) {
        fail(id, "leaf with < minpts members");
      }
      std::vector<double> x(data.dim());
      for (std::uint32_t p : n.members) {
        if (p >= data.rows()) {
          fail(id, "member position out of range");
          continue;
        }
        ++seen[p];
        n.reflection.apply(data.row(p), x);
        if (!n.mbr.contains(x, tol)) {
          fail(id, "member row " + std::to_string(data.id(p)) + " outside MBR");
        }
      }
      continue;
    }
    if (!n.members.empty()) fail(id, "directory keeps members");
    if (n.left == kNoNode || n.right == kNoNode) {
      fail(id, "directory without two children");
      continue;
    }
    stack.push_back(n.right);
    stack.push_back(n.left);
    if (n.left >= nodes.size() || n.right >= nodes.size()) continue;
    const IndexNode& l = nodes[n.left];
    const IndexNode& r = nodes[n.right];
    if (l.parent != id || r.parent != id) fail(id, "child parent link mismatch");
    if (!l.direction || !r.direction || !(*l.direction == *r.direction)) {
      fail(id, "children disagree on the split direction");
      continue;
    }
    if (tree.config().bounding_rule == BoundingRule::kReflectedFrame) {
      // In the reflected frame the first axis carries the projection onto the
      // split direction, so the hyperplane is the coordinate split_offset.
      if (!(l.reflection == r.reflection)) fail(id, "siblings use different frames");
      if (l.mbr.hi[0] > n.split_offset + tol) fail(id, "left MBR crosses the split");
      if (r.mbr.lo[0] < n.split_offset - tol) fail(id, "right MBR crosses the split");
    }
  }

  for (std::size_t p = 0; p < seen.size(); ++p) {
    if (seen[p] != 1) {
      problems.push_back("row " + std::to_string(data.id(p)) + " appears " +
                         std::to_string(seen[p]) + " times");
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!reached[i]) fail(static_cast<NodeId>(i), "unreachable from root");
  }
  if (leaves != tree.stats().leaves || outliers != tree.stats().outliers) {
    problems.push_back("leaf/outlier counters disagree with the node table");
  }
  if (leaves + outliers != tree.stats().iterations + 1) {
    problems.push_back("childless count != iterations + 1");
  }
  return problems;
}

}  // namespace ngpt
