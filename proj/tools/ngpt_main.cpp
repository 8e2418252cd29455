// ngpt: generate datasets, build and query indexes, run benchmarks.

#include <omp.h>

#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ngpt/error.hpp"
#include "ngpt/eval.hpp"
#include "ngpt/index.hpp"
#include "ngpt/persist.hpp"
#include "ngpt/search.hpp"
#include "ngpt/vector_file.hpp"

namespace {

using namespace ngpt;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

// Raised for violated post-conditions, mapped to kExitInternal.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 7;
  int threads = 0;
  bool quiet = false;
};

struct Log {
  bool quiet;
  template <typename... Args>
  void operator()(const Args&... args) const {
    if (quiet) return;
    ((std::cerr << args), ...);
    std::cerr << '\n';
  }
};

struct MinptsFlags {
  std::optional<double> pct;
  std::optional<std::size_t> abs;

  void add(CLI::App* cmd) {
    auto* p = cmd->add_option("--minpts-pct", pct, "Minpts as a percentage of n/k (0, 100]");
    auto* a = cmd->add_option("--minpts-abs", abs, "Minpts as an absolute row count");
    p->excludes(a);
    a->excludes(p);
  }
  void apply(TreeConfig& cfg) const {
    if (pct.has_value() == abs.has_value()) {
      throw CLI::ValidationError("exactly one of --minpts-pct and --minpts-abs is required");
    }
    if (abs) {
      if (*abs == 0) throw CLI::ValidationError("--minpts-abs must be >= 1");
      cfg.minpts_abs = *abs;
    } else {
      cfg.minpts_pct = *pct;
    }
  }
};

std::vector<double> parse_vector_literal(const std::string& text) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::size_t a = pos, b = end;
    while (a < b && text[a] == ' ') ++a;
    while (b > a && text[b - 1] == ' ') --b;
    double x = 0.0;
    const auto res = std::from_chars(text.data() + a, text.data() + b, x);
    if (a == b || res.ec != std::errc{} || res.ptr != text.data() + b || !std::isfinite(x)) {
      throw CLI::ValidationError("--vector: bad component '" + text.substr(a, b - a) + "'");
    }
    v.push_back(x);
    pos = end + 1;
  }
  return v;
}

std::size_t parse_budget(const std::string& text) {
  if (text == "inf" || text == "∞") return std::numeric_limits<std::size_t>::max();
  std::size_t b = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), b);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || b == 0) {
    throw CLI::ValidationError("--budget must be a positive leaf count or 'inf'");
  }
  return b;
}

std::string render(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

void verify(const Tree& tree) {
  const auto violations = check_invariants(tree);
  if (!violations.empty()) {
    throw InvariantViolation("index invariant violated: " + violations.front() + " (" +
                             std::to_string(violations.size()) + " total)");
  }
}

// --- gen ---------------------------------------------------------------------

struct GenCmd {
  MixtureSpec spec;
  std::string out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen", "Generate a seeded Gaussian-mixture dataset");
    cmd->add_option("--n", spec.n, "Number of vectors")->capture_default_str();
    cmd->add_option("--d", spec.d, "Dimension")->capture_default_str();
    cmd->add_option("--clusters", spec.clusters, "Number of clusters")->capture_default_str();
    cmd->add_option("--spread", spec.spread, "Per-cluster standard deviation")->capture_default_str();
    cmd->add_option("--separation", spec.separation,
                    "Minimum centroid distance, in units of spread")
        ->capture_default_str();
    cmd->add_option("--imbalance", spec.imbalance, "Largest / smallest cluster size")
        ->capture_default_str();
    cmd->add_option("--out,out", out, "Output vector file (.csv for CSV)")->required();
  }

  int run(const Globals& g) {
    spec.seed = g.seed;
    const auto m = generate_mixture(spec);
    write_vectors(out, m);
    Log{g.quiet}("wrote ", out, ": n=", m.rows(), " d=", m.dim(), " seed=", spec.seed);
    return kExitOk;
  }
};

// --- build -------------------------------------------------------------------

struct BuildCmd {
  std::string input, output, variant = "no-ngp";
  std::size_t k = 600;
  MinptsFlags minpts;
  double c = 1.0;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("build", "Build an index over a vector file and save it");
    cmd->add_option("input", input, "Vector file")->required();
    cmd->add_option("output", output, "Index file to write")->required();
    cmd->add_option("--variant", variant, "no-ngp, ngp, pddp or nohis")->capture_default_str();
    cmd->add_option("--k", k, "Target number of leaf and outlier nodes")->capture_default_str();
    cmd->add_option("--c", c, "Contrast constant in [1, 2]")->capture_default_str();
    minpts.add(cmd);
  }

  int run(const Globals& g) {
    const auto preset = parse_preset(variant);
    if (!preset) throw CLI::ValidationError("--variant: unknown preset '" + variant + "'");
    TreeConfig cfg = TreeConfig::preset(*preset);
    cfg.k = k;
    cfg.c = c;
    cfg.seed = g.seed;
    minpts.apply(cfg);
    cfg.validate();

    auto data = std::make_shared<const FeatureMatrix>(read_vectors(input));
    std::optional<Tree> tree;
    const double seconds = measure_response_time([&] { tree.emplace(build(data, cfg)); });
    verify(*tree);
    save_tree(*tree, output);
    Log{g.quiet}("built ", variant, " index over ", data->rows(), "x", data->dim(),
                 ": minpts=", tree->minpts(), " leaves=", tree->stats().leaves,
                 " outliers=", tree->stats().outliers, " nodes=", tree->nodes().size(),
                 " build_time_s=", format_double(seconds));
    return kExitOk;
  }
};

// --- query -------------------------------------------------------------------

struct QueryCmd {
  std::string index, data, query_file, vector, budget;
  std::size_t k = 20;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("query", "k-NN queries against a saved index");
    cmd->add_option("index", index, "Index file")->required();
    cmd->add_option("--data", data, "Vector file the index was built over")->required();
    auto* qf = cmd->add_option("--query", query_file, "Vector file of queries");
    auto* qv = cmd->add_option("--vector", vector, "One query as comma-separated numbers");
    qf->excludes(qv);
    qv->excludes(qf);
    cmd->add_option("--k", k, "Neighbors per query")->capture_default_str();
    cmd->add_option("--budget", budget, "Maximum leaves to scan, or 'inf'");
  }

  int run(const Globals& /*g*/) {
    if (query_file.empty() == vector.empty()) {
      throw CLI::ValidationError("exactly one of --query and --vector is required");
    }
    if (k == 0) throw CLI::ValidationError("--k must be >= 1");
    const bool budgeted = !budget.empty();
    const std::size_t max_leaves = budgeted ? parse_budget(budget) : 0;

    auto dataset = std::make_shared<const FeatureMatrix>(read_vectors(data));
    const Tree tree = load_tree(index, dataset);
    FeatureMatrix queries = query_file.empty() ? [&] {
      auto v = parse_vector_literal(vector);
      const std::size_t d = v.size();
      return FeatureMatrix(1, d, std::move(v));
    }() : read_vectors(query_file);
    if (queries.dim() != dataset->dim()) {
      throw Error(Errc::kDimensionMismatch, "query dimension " + std::to_string(queries.dim()) +
                                                " != index dimension " +
                                                std::to_string(dataset->dim()));
    }

    std::string out;
    for (std::size_t i = 0; i < queries.rows(); ++i) {
      const auto r = budgeted ? knn_budgeted(tree, queries.row(i), k, {max_leaves})
                              : knn_exact(tree, queries.row(i), k);
      out += "query " + std::to_string(i) + " leaves_visited=" +
             std::to_string(r.stats.leaves_visited) +
             " distance_computations=" + std::to_string(r.stats.distance_computations) + "\n";
      for (std::size_t j = 0; j < r.hits.size(); ++j) {
        out += std::to_string(j + 1) + " " + std::to_string(r.hits[j].id) + " " +
               format_double(r.hits[j].distance) + "\n";
      }
    }
    std::fwrite(out.data(), 1, out.size(), stdout);
    return kExitOk;
  }
};

// --- bench -------------------------------------------------------------------

struct BenchCmd {
  std::string data, runs_out = "runs.csv", aggregate_out = "aggregate.csv";
  std::vector<std::string> variants{"no-ngp", "ngp", "pddp", "nohis", "seqscan"};
  std::vector<std::size_t> budgets;
  std::size_t k = 600;
  MinptsFlags minpts;
  Protocol protocol;
  bool no_exact = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench", "Repeated-holdout benchmark over index variants");
    cmd->add_option("data", data, "Vector file")->required();
    cmd->add_option("--variants", variants, "Comma-separated variants (presets or seqscan)")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--k", k, "Target number of leaf and outlier nodes")->capture_default_str();
    minpts.add(cmd);
    cmd->add_option("--repetitions", protocol.repetitions, "Holdout repetitions")
        ->capture_default_str();
    cmd->add_option("--queries", protocol.queries_per_rep, "Held-out queries per repetition")
        ->capture_default_str();
    cmd->add_option("--knn", protocol.knn_k, "Neighbors per query")->capture_default_str();
    cmd->add_option("--budgets", budgets, "Comma-separated leaf budgets")->delimiter(',');
    cmd->add_option("--timing-repeats", protocol.timing_repeats,
                    "Timed runs per query (median reported)")
        ->capture_default_str();
    cmd->add_flag("--no-exact", no_exact, "Skip the unbudgeted search rows");
    cmd->add_option("--runs-out", runs_out, "Per-query CSV")->capture_default_str();
    cmd->add_option("--aggregate-out", aggregate_out, "Aggregate CSV")->capture_default_str();
  }

  int run(const Globals& g) {
    TreeConfig base;
    base.k = k;
    base.seed = g.seed;
    minpts.apply(base);
    base.validate();
    std::vector<Variant> list;
    for (const auto& name : variants) {
      auto v = parse_variant(name, base);
      if (!v) throw CLI::ValidationError("--variants: unknown variant '" + name + "'");
      list.push_back(std::move(*v));
    }
    for (std::size_t b : budgets) {
      if (b == 0) throw CLI::ValidationError("--budgets entries must be >= 1");
    }
    protocol.budgets = budgets;
    protocol.exact = !no_exact;

    const auto m = read_vectors(data);
    const auto report = cross_validate(m, list, protocol, g.seed);
    write_file_atomic(runs_out, render([&](std::ostream& s) { write_runs_csv(report.runs, s); }));
    write_file_atomic(aggregate_out,
                      render([&](std::ostream& s) { write_aggregate_csv(report.aggregates, s); }));

    Log log{g.quiet};
    log("# ", report.environment);
    for (const auto& a : report.aggregates) {
      if (a.metric.find('@') != std::string::npos) continue;
      log(a.variant, " ", a.metric, " mean=", format_double(a.mean),
          " stddev=", format_double(a.stddev));
    }
    log("wrote ", runs_out, " (", report.runs.size(), " rows) and ", aggregate_out);
    return kExitOk;
  }
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument:
    case Errc::kInvalidConfig:
    case Errc::kInvalidSpec:
      return kExitUsage;
    case Errc::kIoError:
    case Errc::kFormatError:
    case Errc::kDimensionMismatch:
    case Errc::kEmptyData:
    case Errc::kInsufficientData:
    case Errc::kEmptyRelevant:
    case Errc::kDegenerateInput:
    case Errc::kZeroVariance:
      return kExitData;
    default:
      return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-overlapping projection-pursuit tree index for k-NN search"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for data generation, builds and holdout draws")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet,-q", g.quiet, "Suppress progress and summary output");

  GenCmd gen;
  BuildCmd build_cmd;
  QueryCmd query;
  BenchCmd bench;
  gen.add(app);
  build_cmd.add(app);
  query.add(app);
  bench.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (g.threads > 0) omp_set_num_threads(g.threads);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "gen") return gen.run(g);
    if (name == "build") return build_cmd.run(g);
    if (name == "query") return query.run(g);
    return bench.run(g);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "ngpt " << name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "ngpt " << name << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const InvariantViolation& e) {
    std::cerr << "ngpt " << name << ": " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "ngpt " << name << ": internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
