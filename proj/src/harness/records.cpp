#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "mbp/detail/format.hpp"
#include "mbp/error.hpp"
#include "mbp/harness.hpp"
#include "mbp/rng.hpp"

namespace mbp {

using nlohmann::json;

namespace {

constexpr const char* kStoreFormat = "mbp-record-store";

template <typename T>
json optional_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

json lambda_spec_json(const LambdaSpec& spec) {
  json j;
  j["strategy"] = std::string(to_string(spec.strategy));
  j["lambda"] = spec.lambda;
  j["lambda_est"] = optional_json(spec.lambda_est);
  j["multiplier"] = optional_json(spec.multiplier);
  j["bounds"] = spec.bounds ? json{{"lower", spec.bounds->lower}, {"upper", spec.bounds->upper}} : json(nullptr);
  j["gbr_pred"] = spec.gbr_pred ? json{{"lambda_min_pred", spec.gbr_pred->lambda_min_pred},
                                       {"lambda_max_pred", spec.gbr_pred->lambda_max_pred}}
                                : json(nullptr);
  j["p_used"] = optional_json(spec.p_used);
  return j;
}

LambdaSpec lambda_spec_from(const json& j) {
  LambdaSpec spec;
  spec.strategy = parse_strategy_kind(j.at("strategy").get<std::string>());
  spec.lambda = j.at("lambda").get<double>();
  spec.lambda_est = optional_from<double>(j, "lambda_est");
  spec.multiplier = optional_from<double>(j, "multiplier");
  if (const auto& b = j.at("bounds"); !b.is_null()) {
    spec.bounds = LambdaBounds{b.at("lower").get<double>(), b.at("upper").get<double>()};
  }
  if (const auto& g = j.at("gbr_pred"); !g.is_null()) {
    spec.gbr_pred = GbrPrediction{g.at("lambda_min_pred").get<double>(), g.at("lambda_max_pred").get<double>()};
  }
  spec.p_used = optional_from<double>(j, "p_used");
  return spec;
}

json sa_json(const SaParams& sa) {
  return json{{"sweeps", sa.sweeps},
              {"restarts", sa.restarts},
              {"t_initial", optional_json(sa.t_initial)},
              {"cooling", sa.cooling},
              {"t_final", optional_json(sa.t_final)}};
}

SaParams sa_from(const json& j) {
  SaParams sa;
  sa.sweeps = j.at("sweeps").get<int>();
  sa.restarts = j.at("restarts").get<int>();
  sa.t_initial = optional_from<double>(j, "t_initial");
  sa.cooling = j.at("cooling").get<double>();
  sa.t_final = optional_from<double>(j, "t_final");
  return sa;
}

json stable_fields(const ExperimentRecord& r) {
  json j;
  j["record_id"] = r.record_id;
  j["graph_key"] = r.graph_key;
  j["graph"] = json{{"n", r.graph.n},
                    {"p", optional_json(r.graph.p)},
                    {"seed", optional_json(r.graph.seed)},
                    {"density", r.graph.density},
                    {"max_degree", r.graph.max_degree},
                    {"edge_count", r.graph.edge_count}};
  j["lambda_spec"] = r.lambda_spec ? lambda_spec_json(*r.lambda_spec) : json(nullptr);
  j["strategy"] = r.strategy;
  j["solver_id"] = r.solver_id;
  j["inter_edges"] = r.inter_edges;
  j["balanced"] = r.balanced;
  j["balance_deviation"] = r.balance_deviation;
  j["energy"] = r.energy;
  j["assignment"] = r.assignment;
  j["solver_seed"] = optional_json(r.solver_seed);
  j["iterations"] = optional_json(r.iterations);
  j["sa"] = r.sa ? sa_json(*r.sa) : json(nullptr);
  j["pre_repair_cut"] = optional_json(r.pre_repair_cut);
  j["pre_repair_balanced"] = optional_json(r.pre_repair_balanced);
  return j;
}

json header_json() { return json{{"format", kStoreFormat}, {"schema_version", kRecordSchemaVersion}}; }

void check_header(const std::string& line, const std::filesystem::path& path) {
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw DataError(path.string() + ": line 1: not a record store header");
  }
  if (!header.is_object() || header.value("format", "") != kStoreFormat) {
    throw DataError(path.string() + ": line 1: not a record store header");
  }
  const int version = header.value("schema_version", -1);
  if (version != kRecordSchemaVersion) {
    throw SchemaError(path.string() + ": schema version " + std::to_string(version) +
                      " cannot be read by this build (expects " + std::to_string(kRecordSchemaVersion) +
                      "); migrate the store first");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

}  // namespace

std::optional<double> ExperimentRecord::multiplier() const {
  if (!lambda_spec || lambda_spec->strategy != LambdaStrategyKind::EstTimesMult) return std::nullopt;
  return lambda_spec->multiplier;
}

std::string to_canonical_json(const ExperimentRecord& record) { return stable_fields(record).dump(); }

std::string to_json_line(const ExperimentRecord& record) {
  json j = stable_fields(record);
  j["wall_time_qubo_build_ns"] = record.wall_time_qubo_build.count();
  j["wall_time_solve_ns"] = record.wall_time_solve.count();
  j["created_at"] = record.created_at;
  return j.dump();
}

namespace {

ExperimentRecord parse_record(std::string_view line) {
  const json j = json::parse(line);
  ExperimentRecord r;
  r.record_id = j.at("record_id").get<std::string>();
  r.graph_key = j.at("graph_key").get<std::string>();
  const json& g = j.at("graph");
  r.graph.n = g.at("n").get<std::int64_t>();
  r.graph.p = optional_from<double>(g, "p");
  r.graph.seed = optional_from<std::uint64_t>(g, "seed");
  r.graph.density = g.at("density").get<double>();
  r.graph.max_degree = g.at("max_degree").get<std::int64_t>();
  r.graph.edge_count = g.at("edge_count").get<std::int64_t>();
  if (const auto& spec = j.at("lambda_spec"); !spec.is_null()) r.lambda_spec = lambda_spec_from(spec);
  r.strategy = j.at("strategy").get<std::string>();
  r.solver_id = j.at("solver_id").get<std::string>();
  r.inter_edges = j.at("inter_edges").get<std::int64_t>();
  r.balanced = j.at("balanced").get<bool>();
  r.balance_deviation = j.at("balance_deviation").get<std::int64_t>();
  r.energy = j.at("energy").get<double>();
  r.assignment = j.at("assignment").get<std::string>();
  r.solver_seed = optional_from<std::uint64_t>(j, "solver_seed");
  r.iterations = optional_from<std::int64_t>(j, "iterations");
  if (const auto& sa = j.at("sa"); !sa.is_null()) r.sa = sa_from(sa);
  r.pre_repair_cut = optional_from<std::int64_t>(j, "pre_repair_cut");
  r.pre_repair_balanced = optional_from<bool>(j, "pre_repair_balanced");
  r.wall_time_qubo_build = std::chrono::nanoseconds(j.value("wall_time_qubo_build_ns", std::int64_t{0}));
  r.wall_time_solve = std::chrono::nanoseconds(j.value("wall_time_solve_ns", std::int64_t{0}));
  r.created_at = j.value("created_at", std::string{});
  return r;
}

}  // namespace

ExperimentRecord record_from_json(std::string_view line) {
  try {
    return parse_record(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
}

bool RecordFilter::matches(const ExperimentRecord& record) const {
  if (n && record.graph.n != *n) return false;
  if (p && record.graph.p != *p) return false;
  if (solver_id && record.solver_id != *solver_id) return false;
  if (strategy && (!record.lambda_spec || record.lambda_spec->strategy != *strategy)) return false;
  return true;
}

ScanResult scan_store(const std::filesystem::path& path, const RecordFilter& filter) {
  ScanResult result;
  if (!std::filesystem::exists(path)) return result;
  const std::string content = read_file(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    const std::size_t end = content.find('\n', pos);
    ++line_no;
    if (end == std::string::npos) {
      ++result.partial_lines;
      break;
    }
    const std::string_view line(content.data() + pos, end - pos);
    pos = end + 1;
    if (line_no == 1) {
      check_header(std::string(line), path);
      continue;
    }
    if (line.empty()) continue;
    ExperimentRecord record;
    try {
      record = record_from_json(line);
    } catch (const Error& e) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    if (filter.matches(record)) result.records.push_back(std::move(record));
  }
  return result;
}

RecordStore::RecordStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot create " + path_.string());
    out << header_json().dump() << '\n';
    out.flush();
    if (!out) throw DataError("cannot write " + path_.string());
    return;
  }
  const std::string content = read_file(path_);
  const std::size_t first_newline = content.find('\n');
  if (first_newline == std::string::npos) throw DataError(path_.string() + ": truncated header");
  check_header(content.substr(0, first_newline), path_);
  const std::size_t committed = content.rfind('\n') + 1;
  if (committed < content.size()) {
    dropped_tail_bytes_ = content.size() - committed;
    std::filesystem::resize_file(path_, committed);
  }
}

void RecordStore::append(const ExperimentRecord& record) { append(std::span<const ExperimentRecord>(&record, 1)); }

void RecordStore::append(std::span<const ExperimentRecord> records) {
  if (records.empty()) return;
  std::string block;
  for (const auto& record : records) {
    block += to_json_line(record);
    block += '\n';
  }
  const std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw DataError("cannot open " + path_.string() + " for appending");
  out.write(block.data(), static_cast<std::streamsize>(block.size()));
  out.flush();
  if (!out) throw DataError("append to " + path_.string() + " failed: " + std::strerror(errno));
}

std::string determinism_digest(std::span<const ExperimentRecord> records) {
  std::uint64_t hash = fnv1a("");
  for (const auto& record : records) {
    hash = fnv1a(to_canonical_json(record), hash);
    hash = fnv1a("\n", hash);
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, hash >>= 4) out[static_cast<std::size_t>(i)] = kHex[hash & 0xF];
  return out;
}

}  // namespace mbp
