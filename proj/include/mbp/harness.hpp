#pragma once

// Experiment loop: generate graphs, resolve lambda, build the QUBO, run the
// solvers, persist one record per run, then derive lambda ranges, success
// rates and solver comparisons from the stored records.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbp/graph.hpp"
#include "mbp/penalty.hpp"
#include "mbp/solvers.hpp"

namespace mbp {

struct GraphInfo {
  std::int64_t n = 0;
  std::optional<double> p;
  std::optional<std::uint64_t> seed;
  double density = 0.0;
  std::int64_t max_degree = 0;
  std::int64_t edge_count = 0;

  friend bool operator==(const GraphInfo&, const GraphInfo&) = default;
};

GraphInfo describe(const Graph& g);

// "n<n>-p<p>-s<seed>" for generated graphs, otherwise "n<n>-h<edge hash>".
std::string graph_key(const Graph& g);

// Short, stable label of a strategy: "maxcut", "est", "mult:<v>", "gbr",
// "fixed:<v>".
std::string strategy_label(const LambdaStrategy& strategy);

struct ExperimentRecord {
  std::string record_id;  // graph key / strategy label / solver id
  std::string graph_key;
  GraphInfo graph;
  std::optional<LambdaSpec> lambda_spec;  // absent for the trivial record
  std::string strategy;
  std::string solver_id;
  std::int64_t inter_edges = 0;
  bool balanced = false;
  std::int64_t balance_deviation = 0;
  double energy = 0.0;
  std::string assignment;  // bitstring, node 0 first
  std::optional<std::uint64_t> solver_seed;
  std::optional<std::int64_t> iterations;
  std::optional<SaParams> sa;
  std::optional<std::int64_t> pre_repair_cut;
  std::optional<bool> pre_repair_balanced;
  std::chrono::nanoseconds wall_time_qubo_build{0};
  std::chrono::nanoseconds wall_time_solve{0};
  std::string created_at;  // UTC, ISO 8601

  // Multiplier of an EST_TIMES_MULT record.
  std::optional<double> multiplier() const;
};

inline constexpr int kRecordSchemaVersion = 1;

// One JSON object per line. Timing and created_at are excluded from the
// canonical form used for determinism hashing.
std::string to_json_line(const ExperimentRecord& record);
std::string to_canonical_json(const ExperimentRecord& record);
ExperimentRecord record_from_json(std::string_view line);

struct RecordFilter {
  std::optional<std::int64_t> n;
  std::optional<double> p;
  std::optional<std::string> solver_id;
  std::optional<LambdaStrategyKind> strategy;

  bool matches(const ExperimentRecord& record) const;
};

struct ScanResult {
  std::vector<ExperimentRecord> records;
  std::size_t partial_lines = 0;  // unterminated trailing line, skipped
};

// Reads a record file. A missing file scans as empty; a header with another
// schema version throws SchemaError; a malformed complete line throws
// DataError naming the line.
ScanResult scan_store(const std::filesystem::path& path, const RecordFilter& filter = {});

// Append-only writer. A record is committed once its terminating newline is
// on disk; opening the store drops an unterminated tail left by a crash.
// Appends from several threads are serialized.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path path);

  void append(const ExperimentRecord& record);
  void append(std::span<const ExperimentRecord> records);
  const std::filesystem::path& path() const noexcept { return path_; }
  std::size_t dropped_tail_bytes() const noexcept { return dropped_tail_bytes_; }

 private:
  std::filesystem::path path_;
  std::size_t dropped_tail_bytes_ = 0;
  std::mutex mutex_;
};

struct RunOptions {
  std::uint64_t seed = 0;
  SaParams sa{};
};

// Resolves lambda and builds the QUBO once, then runs each solver. An
// edgeless graph short-circuits to one "trivial" record. Strategy errors are
// raised before any solver runs.
std::vector<ExperimentRecord> run_instance(const Graph& g, const LambdaStrategy& strategy,
                                           std::span<const std::string> solver_ids, const RunOptions& options,
                                           const SolverRegistry& registry);

struct SweepConfig {
  std::vector<NodeId> nodes;
  std::vector<double> probs;
  int seeds_per_cell = 1;
  // Empty: the tabulated candidates for each n.
  std::vector<double> multipliers;
  // When set, replaces the multiplier grid with this single strategy.
  std::optional<LambdaStrategy> strategy;
  std::vector<std::string> solvers;
  std::uint64_t master_seed = 0;
  int jobs = 1;
  SaParams sa{};
};

struct SweepCell {
  NodeId n = 0;
  double p = 0.0;
  int replicate = 0;
  std::uint64_t graph_seed = 0;
  std::uint64_t solver_seed = 0;
};

// Cells in order n, then p, then replicate; seeds derived from the master seed.
std::vector<SweepCell> sweep_cells(const SweepConfig& config);

struct SweepSummary {
  std::size_t appended = 0;
  std::size_t skipped = 0;
  std::vector<std::string> failures;
};

// Full factorial over cells x multipliers x solvers. Keys already in the
// store are skipped. Graph-native solvers run once per cell and are
// re-scored under each multiplier. Cells run on up to `jobs` threads and are
// appended in cell order. Per-cell failures are collected, not thrown.
SweepSummary sweep(const SweepConfig& config, RecordStore& store, const SolverRegistry& registry);

struct LambdaRangeExtraction {
  std::vector<LambdaRangeRow> rows;
  std::size_t excluded_graphs = 0;  // no balanced run
};

// Per graph, among balanced EST_TIMES_MULT runs of `solver_id`: the smallest
// and largest multiplier reaching the minimal cut.
LambdaRangeExtraction extract_lambda_ranges(std::span<const ExperimentRecord> records,
                                            const std::string& solver_id = "hybrid-standin");

struct HeatmapCell {
  std::int64_t n = 0;
  double density_bin = 0.0;  // lower edge of a width-0.1 bin
  std::size_t runs = 0;
  std::size_t successes = 0;
  double rate() const noexcept { return runs == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(runs); }
};

struct SuccessHeatmap {
  std::vector<HeatmapCell> cells;  // ordered by (n, density_bin)
  std::size_t total_runs = 0;
};

// A run succeeds when it is balanced and its cut equals the minimum over
// the balanced runs of the same graph.
SuccessHeatmap success_heatmap(std::span<const ExperimentRecord> records,
                               const std::string& solver_id = "hybrid-standin");

struct CompareRow {
  std::int64_t n = 0;
  std::size_t graphs = 0;
  double avg_density = 0.0;
  double avg_subject = 0.0;
  double avg_baseline = 0.0;
  double baseline_balanced_pct = 0.0;
  double subject_balanced_pct = 0.0;
  double subject_better_pct = 0.0;
  double abs_diff = 0.0;   // |avg(subject) - avg(baseline)|
  double perc_diff = 0.0;  // (avg(baseline) - avg(subject)) / avg(subject) * 100
};

struct CompareReport {
  std::vector<CompareRow> rows;
  std::size_t skipped_graphs = 0;  // one of the two solvers missing
};

// Per graph, the subject's best balanced run (best run if none is balanced)
// against the baseline's best run; rows per node count. The baseline's
// balance is taken before repair when the solver reports it.
CompareReport compare_report(std::span<const ExperimentRecord> records, const std::string& baseline_id,
                             const std::string& subject_id);

void write_compare_csv(std::ostream& out, const CompareReport& report);
void write_heatmap_csv(std::ostream& out, const SuccessHeatmap& heatmap);
void write_lambda_ranges_csv(std::ostream& out, std::span<const LambdaRangeRow> rows);
void print_compare_table(std::ostream& out, const CompareReport& report);
void print_heatmap_table(std::ostream& out, const SuccessHeatmap& heatmap);

struct AuditReport {
  std::size_t checked = 0;
  std::size_t replayed = 0;
  std::vector<std::string> failures;
  bool ok() const noexcept { return failures.empty(); }
};

// Regenerates each graph from (n, p, seed) and checks the stored graph
// fields, cut, balance and energy. With `registry`, seeded solver runs are
// replayed and their assignments compared.
AuditReport audit_records(std::span<const ExperimentRecord> records, const SolverRegistry* registry = nullptr);

// FNV-1a over the canonical JSON of every record, in order, as 16 hex digits.
std::string determinism_digest(std::span<const ExperimentRecord> records);

}  // namespace mbp
