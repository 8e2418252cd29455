#include "ngpt/persist.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ngpt/error.hpp"

namespace ngpt {

static_assert(std::endian::native == std::endian::little,
              "index serialization assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'N', 'G', 'P', 'T'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_u8(std::uint8_t v) { put(v); }
  void put_u32(std::uint32_t v) { put(v); }
  void put_u64(std::uint64_t v) { put(v); }
  void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void put_f64s(std::span<const double> v) {
    for (double x : v) put_f64(x);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::uint8_t u8() { return get<std::uint8_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::vector<double> f64s(std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }
  void expect_raw(const char* p, std::size_t n, const char* what) {
    need(n);
    if (std::memcmp(in_.data() + pos_, p, n) != 0) fail(what);
    pos_ += n;
  }
  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == in_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::kFormatError, what + " at byte offset " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail("truncated index file");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

void put_config(Writer& w, const TreeConfig& c) {
  w.put_u64(c.k);
  w.put_f64(c.minpts_pct);
  w.put_u64(c.minpts_abs);
  w.put_u8(static_cast<std::uint8_t>(c.direction_rule));
  w.put_u8(static_cast<std::uint8_t>(c.split_rule));
  w.put_u8(static_cast<std::uint8_t>(c.bounding_rule));
  w.put_u8(static_cast<std::uint8_t>(c.selection_rule));
  w.put_f64(c.c);
  w.put_f64(c.fastica_tol);
  w.put_u64(c.fastica_max_iter);
  w.put_f64(c.pca_tol);
  w.put_u64(c.pca_max_iter);
  w.put_f64(c.whiten_eps);
  w.put_f64(c.epsilon);
  w.put_u64(c.seed);
}

template <typename E>
E enum_from(Reader& r, std::uint8_t max, const char* what) {
  const std::uint8_t v = r.u8();
  if (v > max) r.fail(std::string("invalid ") + what);
  return static_cast<E>(v);
}

TreeConfig get_config(Reader& r) {
  TreeConfig c;
  c.k = r.u64();
  c.minpts_pct = r.f64();
  c.minpts_abs = r.u64();
  c.direction_rule = enum_from<DirectionRule>(r, 1, "direction rule");
  c.split_rule = enum_from<SplitRule>(r, 1, "split rule");
  c.bounding_rule = enum_from<BoundingRule>(r, 1, "bounding rule");
  c.selection_rule = enum_from<SelectionRule>(r, 1, "selection rule");
  c.c = r.f64();
  c.fastica_tol = r.f64();
  c.fastica_max_iter = r.u64();
  c.pca_tol = r.f64();
  c.pca_max_iter = r.u64();
  c.whiten_eps = r.f64();
  c.epsilon = r.f64();
  c.seed = r.u64();
  try {
    c.validate();
  } catch (const Error& e) {
    r.fail(std::string("stored config rejected (") + e.detail() + ")");
  }
  return c;
}

}  // namespace

std::uint64_t dataset_digest(const FeatureMatrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ull;
    }
  };
  mix(m.rows());
  mix(m.dim());
  for (RowId id : m.ids()) mix(static_cast<std::uint64_t>(id));
  for (double v : m.values()) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

std::string serialize_tree(const Tree& tree) {
  const FeatureMatrix& data = tree.dataset();
  const std::size_t d = data.dim();
  Writer w;
  w.raw(kMagic, 4);
  w.put_u32(kIndexFormatVersion);
  w.put_u32(static_cast<std::uint32_t>(d));
  w.put_u64(data.rows());
  put_config(w, tree.config());
  w.put_u64(tree.minpts());
  w.put_u64(tree.stats().iterations);
  w.put_u64(tree.stats().leaves);
  w.put_u64(tree.stats().outliers);
  w.put_u32(static_cast<std::uint32_t>(tree.nodes().size()));
  for (const IndexNode& n : tree.nodes()) {
    w.put_u32(n.id);
    w.put_u8(static_cast<std::uint8_t>(n.kind));
    w.put_u32(n.parent);
    w.put_u32(n.left);
    w.put_u32(n.right);
    w.put_f64(n.split_offset);
    w.put_u8(n.direction ? 1 : 0);
    if (n.direction) w.put_f64s(n.direction->components());
    w.put_u8(static_cast<std::uint8_t>(n.reflection.kind()));
    if (!n.reflection.is_identity()) w.put_f64s(n.reflection.vector());
    w.put_f64s(n.mbr.lo);
    w.put_f64s(n.mbr.hi);
    w.put_u64(n.members.size());
  }
  for (const IndexNode& n : tree.nodes()) {
    if (!n.childless()) continue;
    w.put_u32(n.id);
    w.put_u64(n.members.size());
    for (std::uint32_t p : n.members) w.put<std::int64_t>(data.id(p));
  }
  w.put_u64(dataset_digest(data));
  return w.take();
}

Tree deserialize_tree(const std::string& bytes, std::shared_ptr<const FeatureMatrix> data) {
  if (!data) throw Error(Errc::kInvalidArgument, "deserialize_tree: no dataset");
  Reader r(bytes);
  r.expect_raw(kMagic, 4, "bad magic (not an NGPT index)");
  const std::uint32_t version = r.u32();
  if (version != kIndexFormatVersion) {
    r.fail("unsupported format version " + std::to_string(version));
  }
  const std::size_t d = r.u32();
  const std::size_t n = r.u64();
  if (d != data->dim() || n != data->rows()) {
    r.fail("index shape " + std::to_string(n) + "x" + std::to_string(d) +
           " does not match dataset " + std::to_string(data->rows()) + "x" +
           std::to_string(data->dim()));
  }
  const TreeConfig cfg = get_config(r);
  const std::size_t minpts = r.u64();
  BuildStats stats;
  stats.iterations = r.u64();
  stats.leaves = r.u64();
  stats.outliers = r.u64();
  const std::uint32_t count = r.u32();
  if (count == 0 || count > 2 * n + 1) r.fail("implausible node count");

  std::vector<IndexNode> nodes(count);
  std::vector<std::uint64_t> member_counts(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    IndexNode& node = nodes[i];
    node.id = r.u32();
    if (node.id != i) r.fail("node ids out of order");
    node.kind = enum_from<NodeKind>(r, 2, "node kind");
    node.parent = r.u32();
    node.left = r.u32();
    node.right = r.u32();
    node.split_offset = r.f64();
    if (r.u8() != 0) {
      try {
        node.direction = Direction::restore(r.f64s(d));
      } catch (const Error&) {
        r.fail("stored direction is not unit-norm");
      }
    }
    const auto kind = enum_from<Reflection::Kind>(r, 1, "reflection kind");
    if (kind == Reflection::Kind::kHouseholder) {
      try {
        node.reflection = Reflection::householder(r.f64s(d));
      } catch (const Error&) {
        r.fail("stored reflection is not unit-norm");
      }
    }
    node.mbr.lo = r.f64s(d);
    node.mbr.hi = r.f64s(d);
    member_counts[i] = r.u64();
  }

  std::unordered_map<RowId, std::uint32_t> position;
  position.reserve(n);
  for (std::size_t p = 0; p < n; ++p) position.emplace(data->id(p), static_cast<std::uint32_t>(p));
  for (IndexNode& node : nodes) {
    if (!node.childless()) continue;
    if (r.u32() != node.id) r.fail("row-id block out of order");
    const std::uint64_t m = r.u64();
    if (m != member_counts[node.id] || m > n) r.fail("row-id block size mismatch");
    node.members.resize(m);
    for (auto& p : node.members) {
      const auto it = position.find(r.get<std::int64_t>());
      if (it == position.end()) r.fail("row id not present in dataset");
      p = it->second;
    }
  }
  const std::uint64_t digest = r.u64();
  if (digest != dataset_digest(*data)) {
    r.fail("dataset digest mismatch (index was built over different data)");
  }
  if (!r.at_end()) r.fail("trailing bytes after index");
  return Tree(std::move(data), cfg, minpts, std::move(nodes), stats);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIoError, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::kIoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::kIoError, "rename to " + path.string() + ": " + ec.message());
}

void save_tree(const Tree& tree, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_tree(tree));
}

Tree load_tree(const std::filesystem::path& path, std::shared_ptr<const FeatureMatrix> data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_tree(ss.str(), std::move(data));
}

}  // namespace ngpt
