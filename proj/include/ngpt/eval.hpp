#pragma once

// Evaluation harness: recall and response-time metrics, a seeded Gaussian
// mixture generator, and the repeated random-holdout benchmark (10 x 20
// held-out queries, 20-NN ground truth) with CSV reporting.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ngpt/feature_matrix.hpp"
#include "ngpt/index.hpp"

namespace ngpt {

// |relevant ∩ retrieved| / |relevant|; throws EmptyRelevant.
double recall(std::span<const RowId> relevant, std::span<const RowId> retrieved);

// Wall time of `action` on a monotonic clock, in seconds.
template <typename Action>
double measure_response_time(Action&& action) {
  const auto start = std::chrono::steady_clock::now();
  std::forward<Action>(action)();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

struct MixtureSpec {
  std::size_t n = 50000;
  std::size_t d = 25;
  std::size_t clusters = 32;
  double spread = 1.0;       // per-cluster standard deviation
  double separation = 10.0;  // min centroid distance, in units of spread
  double imbalance = 4.0;    // largest / smallest cluster size
  std::uint64_t seed = 7;

  // Throws InvalidSpec.
  void validate() const;
};

// The fixed benchmark used for the trend experiments: n = 50,000, 32
// clusters, canonical seed, dimension d.
MixtureSpec canonical_benchmark(std::size_t d);

struct Mixture {
  FeatureMatrix data;
  std::vector<std::uint32_t> labels;         // generating cluster per row
  std::vector<std::vector<double>> centroids;
};

Mixture generate_labeled_mixture(const MixtureSpec& spec);
FeatureMatrix generate_mixture(const MixtureSpec& spec);

// A named index variant; no config means sequential scan.
struct Variant {
  std::string name;
  std::optional<TreeConfig> config;

  // Preset rules with k / minpts / seed taken from `base`.
  static Variant from_preset(Preset p, const TreeConfig& base);
  static Variant sequential_scan();
};
inline constexpr const char* kSeqScanName = "seqscan";

// Accepts preset names and "seqscan".
std::optional<Variant> parse_variant(std::string_view name, const TreeConfig& base);

struct Protocol {
  std::size_t repetitions = 10;
  std::size_t queries_per_rep = 20;
  std::size_t knn_k = 20;
  bool exact = true;                 // emit budget = 0 (unbounded) rows
  std::vector<std::size_t> budgets;  // leaf budgets for truncated searches
  std::size_t timing_repeats = 3;    // median of this many timed runs
};

// budget == 0 denotes an exact (unbudgeted) search.
struct RunRecord {
  std::size_t repetition = 0;
  std::size_t query = 0;
  std::string variant;
  std::size_t knn_k = 0;
  std::size_t budget = 0;
  double recall = 0.0;
  double response_time_s = 0.0;
  std::size_t leaves_visited = 0;
  std::size_t distance_computations = 0;
};

// Metric names: recall, response_time_s, leaves_visited,
// distance_computations; budgeted rows append "@<budget>". The mean is the
// mean over repetitions of per-repetition query means; stddev is the sample
// standard deviation of those per-repetition means (0 for one repetition).
struct AggregateRecord {
  std::string variant;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
};

struct BenchReport {
  std::vector<RunRecord> runs;
  std::vector<AggregateRecord> aggregates;
  std::string environment;  // informational only

  // Mean of a metric for a variant, or nullopt.
  std::optional<double> mean(std::string_view variant, std::string_view metric) const;
};

// Ground truth for each held-out query is the k-NN among the indexed
// (non-held-out) rows, so exact search scores recall 1.
BenchReport cross_validate(const FeatureMatrix& data, std::span<const Variant> variants,
                           const Protocol& protocol, std::uint64_t seed);

std::vector<AggregateRecord> aggregate_runs(std::span<const RunRecord> runs);

inline constexpr const char* kRunsCsvHeader =
    "repetition,query,variant,knn_k,budget,recall,response_time_s,leaves_visited,"
    "distance_computations";
inline constexpr const char* kAggregateCsvHeader = "variant,metric,mean,stddev";

void write_runs_csv(std::span<const RunRecord> runs, std::ostream& out);
void write_aggregate_csv(std::span<const AggregateRecord> aggregates, std::ostream& out);

// Parses both CSVs and checks that the aggregates are recomputable from the
// runs within 1e-12 (relative); throws FormatError otherwise.
BenchReport read_report(std::istream& runs, std::istream& aggregates);

// Shortest round-trip decimal form, independent of the C locale.
std::string format_double(double v);

}  // namespace ngpt
