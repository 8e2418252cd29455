#include "ngpt/eval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "ngpt/error.hpp"
#include "ngpt/search.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ngpt {

double recall(std::span<const RowId> relevant, std::span<const RowId> retrieved) {
  if (relevant.empty()) throw Error(Errc::kEmptyRelevant, "relevant set is empty");
  const std::unordered_set<RowId> rel(relevant.begin(), relevant.end());
  std::unordered_set<RowId> counted;
  for (RowId id : retrieved) {
    if (rel.contains(id)) counted.insert(id);
  }
  return static_cast<double>(counted.size()) / static_cast<double>(rel.size());
}

// ---------------------------------------------------------------------------
// Synthetic data

void MixtureSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::kInvalidSpec, what); };
  if (n < 1) fail("n must be >= 1");
  if (d < 1) fail("d must be >= 1");
  if (clusters < 1 || clusters > n) fail("clusters must be in [1, n]");
  if (!(spread > 0.0) || !std::isfinite(spread)) fail("spread must be > 0");
  if (!(separation >= 0.0) || !std::isfinite(separation)) fail("separation must be >= 0");
  if (!(imbalance >= 1.0) || !std::isfinite(imbalance)) fail("imbalance must be >= 1");
}

MixtureSpec canonical_benchmark(std::size_t d) {
  MixtureSpec s;
  s.n = 50000;
  s.d = d;
  s.clusters = 32;
  s.spread = 1.0;
  s.separation = 6.0;
  s.imbalance = 4.0;
  s.seed = 7;
  return s;
}

namespace {

std::vector<std::size_t> cluster_sizes(const MixtureSpec& spec) {
  const std::size_t c = spec.clusters;
  std::vector<double> w(c, 1.0);
  if (c > 1) {
    for (std::size_t j = 0; j < c; ++j) {
      w[j] = std::pow(spec.imbalance, static_cast<double>(j) / static_cast<double>(c - 1));
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<std::size_t> sizes(c);
  std::vector<std::pair<double, std::size_t>> frac(c);
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < c; ++j) {
    const double exact = static_cast<double>(spec.n) * w[j] / total;
    sizes[j] = static_cast<std::size_t>(std::floor(exact));
    frac[j] = {exact - std::floor(exact), j};
    assigned += sizes[j];
  }
  std::stable_sort(frac.begin(), frac.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < spec.n; ++r, ++assigned) ++sizes[frac[r % c].second];
  return sizes;
}

std::vector<std::vector<double>> place_centroids(const MixtureSpec& spec, std::mt19937_64& rng) {
  const double min_dist = spec.separation * spec.spread;
  double side = std::max(1.0, 1.5 * min_dist *
                                  std::max(1.0, std::pow(static_cast<double>(spec.clusters),
                                                         1.0 / static_cast<double>(spec.d))));
  std::vector<std::vector<double>> centroids;
  for (;;) {
    centroids.clear();
    std::uniform_real_distribution<double> coord(0.0, side);
    bool ok = true;
    for (std::size_t j = 0; j < spec.clusters && ok; ++j) {
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        std::vector<double> c(spec.d);
        for (double& v : c) v = coord(rng);
        placed = std::all_of(centroids.begin(), centroids.end(), [&](const auto& o) {
          double s = 0.0;
          for (std::size_t t = 0; t < spec.d; ++t) s += (c[t] - o[t]) * (c[t] - o[t]);
          return std::sqrt(s) >= min_dist;
        });
        if (placed) centroids.push_back(std::move(c));
      }
      ok = placed;
    }
    if (ok) return centroids;
    side *= 1.25;
  }
}

}  // namespace

Mixture generate_labeled_mixture(const MixtureSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  Mixture out;
  out.centroids = place_centroids(spec, rng);
  const auto sizes = cluster_sizes(spec);

  std::vector<double> values;
  values.reserve(spec.n * spec.d);
  std::vector<std::uint32_t> labels;
  labels.reserve(spec.n);
  std::normal_distribution<double> normal(0.0, spec.spread);
  for (std::size_t j = 0; j < spec.clusters; ++j) {
    for (std::size_t i = 0; i < sizes[j]; ++i) {
      for (std::size_t t = 0; t < spec.d; ++t) values.push_back(out.centroids[j][t] + normal(rng));
      labels.push_back(static_cast<std::uint32_t>(j));
    }
  }
  // Interleave clusters so row order carries no label information.
  std::vector<std::size_t> order(spec.n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = spec.n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  std::vector<double> shuffled(values.size());
  out.labels.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(order[i] * spec.d), spec.d,
                shuffled.begin() + static_cast<std::ptrdiff_t>(i * spec.d));
    out.labels[i] = labels[order[i]];
  }
  out.data = FeatureMatrix(spec.n, spec.d, std::move(shuffled));
  return out;
}

FeatureMatrix generate_mixture(const MixtureSpec& spec) {
  return generate_labeled_mixture(spec).data;
}

// ---------------------------------------------------------------------------
// Variants and the holdout benchmark

Variant Variant::from_preset(Preset p, const TreeConfig& base) {
  TreeConfig cfg = TreeConfig::preset(p);
  cfg.k = base.k;
  cfg.minpts_pct = base.minpts_pct;
  cfg.minpts_abs = base.minpts_abs;
  cfg.seed = base.seed;
  return {std::string(preset_name(p)), cfg};
}

Variant Variant::sequential_scan() { return {kSeqScanName, std::nullopt}; }

std::optional<Variant> parse_variant(std::string_view name, const TreeConfig& base) {
  if (name == kSeqScanName) return Variant::sequential_scan();
  if (auto p = parse_preset(name)) return Variant::from_preset(*p, base);
  return std::nullopt;
}

std::optional<double> BenchReport::mean(std::string_view variant,
                                        std::string_view metric) const {
  for (const auto& a : aggregates) {
    if (a.variant == variant && a.metric == metric) return a.mean;
  }
  return std::nullopt;
}

namespace {

template <typename Search>
std::pair<SearchResult, double> timed(const Search& search, std::size_t repeats) {
  std::vector<double> times;
  SearchResult result;
  for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
    times.push_back(measure_response_time([&] { result = search(); }));
  }
  std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2),
                   times.end());
  return {std::move(result), times[times.size() / 2]};
}

std::vector<RowId> ids_of(const SearchResult& r) {
  std::vector<RowId> ids;
  ids.reserve(r.hits.size());
  for (const auto& h : r.hits) ids.push_back(h.id);
  return ids;
}

std::string environment_note() {
  std::ostringstream s;
  s << "compiler=" <<
#if defined(__clang__)
      "clang " << __clang_major__ << "." << __clang_minor__
#elif defined(__GNUC__)
      "gcc " << __GNUC__ << "." << __GNUC_MINOR__
#else
      "unknown"
#endif
    ;
#if defined(_OPENMP)
  s << "; omp_max_threads=" << omp_get_max_threads();
#else
  s << "; openmp=off";
#endif
  s << "; clock=steady_clock; timing=median";
  return s.str();
}

}  // namespace

BenchReport cross_validate(const FeatureMatrix& data, std::span<const Variant> variants,
                           const Protocol& protocol, std::uint64_t seed) {
  if (protocol.repetitions < 1 || protocol.queries_per_rep < 1 || protocol.knn_k < 1) {
    throw Error(Errc::kInvalidArgument, "protocol counts must be >= 1");
  }
  if (data.rows() <= protocol.queries_per_rep) {
    throw Error(Errc::kInsufficientData,
                "need more than " + std::to_string(protocol.queries_per_rep) + " rows");
  }
  for (const auto& v : variants) {
    if (v.config) v.config->validate();
  }

  BenchReport report;
  report.environment = environment_note();
  const std::size_t n = data.rows();
  for (std::size_t rep = 0; rep < protocol.repetitions; ++rep) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + rep);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < protocol.queries_per_rep; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    std::vector<std::size_t> held(order.begin(),
                                  order.begin() + static_cast<std::ptrdiff_t>(protocol.queries_per_rep));
    std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(protocol.queries_per_rep),
                                  order.end());
    std::sort(kept.begin(), kept.end());
    const FeatureMatrix queries = data.select(std::span<const std::size_t>(held));
    auto indexed = std::make_shared<const FeatureMatrix>(
        data.select(std::span<const std::size_t>(kept)));

    std::vector<std::vector<RowId>> truth(queries.rows());
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      truth[q] = ids_of(sequential_scan(*indexed, queries.row(q), protocol.knn_k));
    }

    // Builds are independent per variant; the timed searches below run
    // sequentially so they do not contend with each other.
    std::vector<std::optional<Tree>> trees(variants.size());
    const auto nv = static_cast<std::ptrdiff_t>(variants.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t v = 0; v < nv; ++v) {
      if (variants[v].config) trees[v].emplace(build(indexed, *variants[v].config));
    }

    for (std::size_t v = 0; v < variants.size(); ++v) {
      for (std::size_t q = 0; q < queries.rows(); ++q) {
        const auto query = queries.row(q);
        auto record = [&](std::size_t budget, const SearchResult& r, double seconds) {
          const auto got = ids_of(r);
          report.runs.push_back({rep, q, variants[v].name, protocol.knn_k, budget,
                                 recall(truth[q], got), seconds, r.stats.leaves_visited,
                                 r.stats.distance_computations});
        };
        if (!trees[v]) {
          auto [r, t] = timed([&] { return sequential_scan(*indexed, query, protocol.knn_k); },
                              protocol.timing_repeats);
          record(0, r, t);
          continue;
        }
        const Tree& tree = *trees[v];
        if (protocol.exact) {
          auto [r, t] = timed([&] { return knn_exact(tree, query, protocol.knn_k); },
                              protocol.timing_repeats);
          record(0, r, t);
        }
        for (std::size_t b : protocol.budgets) {
          auto [r, t] = timed(
              [&] { return knn_budgeted(tree, query, protocol.knn_k, QueryBudget{b}); },
              protocol.timing_repeats);
          record(b, r, t);
        }
      }
    }
  }
  report.aggregates = aggregate_runs(report.runs);
  return report;
}

std::vector<AggregateRecord> aggregate_runs(std::span<const RunRecord> runs) {
  struct Key {
    std::string variant;
    std::size_t budget;
    auto operator<=>(const Key&) const = default;
  };
  // per key: per repetition sums and counts for four metrics
  struct Acc {
    std::map<std::size_t, std::array<double, 4>> sums;
    std::map<std::size_t, std::size_t> counts;
  };
  std::vector<Key> order;
  std::map<Key, Acc> acc;
  for (const auto& r : runs) {
    Key key{r.variant, r.budget};
    auto [it, inserted] = acc.try_emplace(key);
    if (inserted) order.push_back(key);
    auto& s = it->second.sums[r.repetition];
    s[0] += r.recall;
    s[1] += r.response_time_s;
    s[2] += static_cast<double>(r.leaves_visited);
    s[3] += static_cast<double>(r.distance_computations);
    ++it->second.counts[r.repetition];
  }
  // Variants in first-appearance order; within a variant, exact (budget 0)
  // first, then budgets ascending.
  std::map<std::string, std::size_t> rank;
  for (const Key& k : order) rank.try_emplace(k.variant, rank.size());
  std::sort(order.begin(), order.end(), [&](const Key& a, const Key& b) {
    const auto ra = rank.at(a.variant), rb = rank.at(b.variant);
    return ra != rb ? ra < rb : a.budget < b.budget;
  });

  static constexpr const char* kNames[4] = {"recall", "response_time_s", "leaves_visited",
                                            "distance_computations"};
  std::vector<AggregateRecord> out;
  for (const Key& key : order) {
    const Acc& a = acc.at(key);
    for (int m = 0; m < 4; ++m) {
      std::vector<double> rep_means;
      for (const auto& [rep, sums] : a.sums) {
        rep_means.push_back(sums[m] / static_cast<double>(a.counts.at(rep)));
      }
      double mean = 0.0;
      for (double v : rep_means) mean += v;
      mean /= static_cast<double>(rep_means.size());
      double var = 0.0;
      for (double v : rep_means) var += (v - mean) * (v - mean);
      const double stddev =
          rep_means.size() > 1 ? std::sqrt(var / static_cast<double>(rep_means.size() - 1)) : 0.0;
      std::string metric = kNames[m];
      if (key.budget > 0) metric += "@" + std::to_string(key.budget);
      out.push_back({key.variant, metric, mean, stddev});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_runs_csv(std::span<const RunRecord> runs, std::ostream& out) {
  out << kRunsCsvHeader << '\n';
  for (const auto& r : runs) {
    out << r.repetition << ',' << r.query << ',' << r.variant << ',' << r.knn_k << ','
        << r.budget << ',' << format_double(r.recall) << ',' << format_double(r.response_time_s)
        << ',' << r.leaves_visited << ',' << r.distance_computations << '\n';
  }
}

void write_aggregate_csv(std::span<const AggregateRecord> aggregates, std::ostream& out) {
  out << kAggregateCsvHeader << '\n';
  for (const auto& a : aggregates) {
    out << a.variant << ',' << a.metric << ',' << format_double(a.mean) << ','
        << format_double(a.stddev) << '\n';
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      f.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  f.push_back(std::move(cur));
  return f;
}

template <typename T>
T parse_field(const std::string& s, std::size_t line) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(Errc::kFormatError, "bad numeric field '" + s + "' on line " + std::to_string(line));
  }
  return v;
}

std::vector<std::vector<std::string>> read_csv(std::istream& in, const char* header,
                                               std::size_t fields) {
  std::string line;
  if (!std::getline(in, line) || split_fields(line) != split_fields(header)) {
    throw Error(Errc::kFormatError, std::string("expected header: ") + header);
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t no = 2; std::getline(in, line); ++no) {
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != fields) {
      throw Error(Errc::kFormatError, "wrong field count on line " + std::to_string(no));
    }
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace

BenchReport read_report(std::istream& runs, std::istream& aggregates) {
  BenchReport report;
  std::size_t line = 1;
  for (const auto& f : read_csv(runs, kRunsCsvHeader, 9)) {
    ++line;
    RunRecord r;
    r.repetition = parse_field<std::size_t>(f[0], line);
    r.query = parse_field<std::size_t>(f[1], line);
    r.variant = f[2];
    r.knn_k = parse_field<std::size_t>(f[3], line);
    r.budget = parse_field<std::size_t>(f[4], line);
    r.recall = parse_field<double>(f[5], line);
    r.response_time_s = parse_field<double>(f[6], line);
    r.leaves_visited = parse_field<std::size_t>(f[7], line);
    r.distance_computations = parse_field<std::size_t>(f[8], line);
    if (!(r.recall >= 0.0 && r.recall <= 1.0) || !(r.response_time_s >= 0.0)) {
      throw Error(Errc::kFormatError, "metric out of range on line " + std::to_string(line));
    }
    report.runs.push_back(std::move(r));
  }
  line = 1;
  for (const auto& f : read_csv(aggregates, kAggregateCsvHeader, 4)) {
    ++line;
    report.aggregates.push_back(
        {f[0], f[1], parse_field<double>(f[2], line), parse_field<double>(f[3], line)});
  }

  const auto expected = aggregate_runs(report.runs);
  if (expected.size() != report.aggregates.size()) {
    throw Error(Errc::kFormatError, "aggregate row count does not match the runs");
  }
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
  };
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& e = expected[i];
    const auto& a = report.aggregates[i];
    if (e.variant != a.variant || e.metric != a.metric || !close(a.mean, e.mean) ||
        !close(a.stddev, e.stddev)) {
      throw Error(Errc::kFormatError, "aggregate " + a.variant + "/" + a.metric +
                                          " is not recomputable from the runs");
    }
  }
  return report;
}

}  // namespace ngpt
