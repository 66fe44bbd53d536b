#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>

#include "mbp/detail/format.hpp"
#include "mbp/harness.hpp"

namespace mbp {

namespace {

// Records grouped by graph key, groups in order of first appearance.
template <typename Pred>
std::vector<std::vector<const ExperimentRecord*>> group_by_graph(std::span<const ExperimentRecord> records,
                                                                 Pred keep) {
  std::vector<std::vector<const ExperimentRecord*>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    if (!keep(r)) continue;
    const auto [it, inserted] = index.emplace(r.graph_key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&r);
  }
  return groups;
}

std::optional<std::int64_t> min_balanced_cut(const std::vector<const ExperimentRecord*>& runs) {
  std::optional<std::int64_t> best;
  for (const auto* r : runs) {
    if (r->balanced && (!best || r->inter_edges < *best)) best = r->inter_edges;
  }
  return best;
}

double density_bin(double density) {
  return std::floor(density * 10.0 + 1e-9) / 10.0;
}

std::string csv_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return detail::format_double(value);
}

}  // namespace

LambdaRangeExtraction extract_lambda_ranges(std::span<const ExperimentRecord> records, const std::string& solver_id) {
  LambdaRangeExtraction out;
  const auto groups = group_by_graph(records, [&](const ExperimentRecord& r) {
    return r.solver_id == solver_id && r.multiplier().has_value();
  });
  for (const auto& runs : groups) {
    const auto best = min_balanced_cut(runs);
    if (!best) {
      ++out.excluded_graphs;
      continue;
    }
    LambdaRangeRow row;
    row.graph_key = runs.front()->graph_key;
    row.n = runs.front()->graph.n;
    row.density = runs.front()->graph.density;
    row.lambda_est = runs.front()->lambda_spec->lambda_est.value_or(0.0);
    row.lambda_min = std::numeric_limits<double>::infinity();
    row.lambda_max = -std::numeric_limits<double>::infinity();
    for (const auto* r : runs) {
      if (!r->balanced || r->inter_edges != *best) continue;
      row.lambda_min = std::min(row.lambda_min, *r->multiplier());
      row.lambda_max = std::max(row.lambda_max, *r->multiplier());
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

SuccessHeatmap success_heatmap(std::span<const ExperimentRecord> records, const std::string& solver_id) {
  std::map<std::pair<std::int64_t, double>, HeatmapCell> cells;
  SuccessHeatmap heatmap;
  const auto groups = group_by_graph(records, [&](const ExperimentRecord& r) {
    return r.solver_id == solver_id && r.multiplier().has_value();
  });
  for (const auto& runs : groups) {
    const auto best = min_balanced_cut(runs);
    for (const auto* r : runs) {
      const double bin = density_bin(r->graph.density);
      HeatmapCell& cell = cells[{r->graph.n, bin}];
      cell.n = r->graph.n;
      cell.density_bin = bin;
      ++cell.runs;
      ++heatmap.total_runs;
      if (best && r->balanced && r->inter_edges == *best) ++cell.successes;
    }
  }
  for (auto& [key, cell] : cells) heatmap.cells.push_back(cell);
  return heatmap;
}

CompareReport compare_report(std::span<const ExperimentRecord> records, const std::string& baseline_id,
                             const std::string& subject_id) {
  struct Accum {
    std::size_t graphs = 0;
    double density = 0.0, subject = 0.0, baseline = 0.0;
    std::size_t baseline_balanced = 0, subject_balanced = 0, subject_better = 0;
  };
  std::map<std::int64_t, Accum> by_n;
  CompareReport report;
  const auto groups = group_by_graph(records, [&](const ExperimentRecord& r) {
    return r.solver_id == baseline_id || r.solver_id == subject_id;
  });
  for (const auto& runs : groups) {
    const ExperimentRecord* subject = nullptr;
    const ExperimentRecord* baseline = nullptr;
    for (const auto* r : runs) {
      if (r->solver_id == subject_id) {
        const bool better_class = subject == nullptr || (r->balanced && !subject->balanced);
        const bool same_class = subject != nullptr && r->balanced == subject->balanced;
        if (better_class || (same_class && r->inter_edges < subject->inter_edges)) subject = r;
      } else if (baseline == nullptr || r->inter_edges < baseline->inter_edges) {
        baseline = r;
      }
    }
    if (subject == nullptr || baseline == nullptr) {
      ++report.skipped_graphs;
      continue;
    }
    Accum& a = by_n[subject->graph.n];
    ++a.graphs;
    a.density += subject->graph.density;
    a.subject += static_cast<double>(subject->inter_edges);
    a.baseline += static_cast<double>(baseline->inter_edges);
    a.baseline_balanced += baseline->pre_repair_balanced.value_or(baseline->balanced) ? 1 : 0;
    a.subject_balanced += subject->balanced ? 1 : 0;
    a.subject_better += subject->inter_edges < baseline->inter_edges ? 1 : 0;
  }
  for (const auto& [n, a] : by_n) {
    const double count = static_cast<double>(a.graphs);
    CompareRow row;
    row.n = n;
    row.graphs = a.graphs;
    row.avg_density = a.density / count;
    row.avg_subject = a.subject / count;
    row.avg_baseline = a.baseline / count;
    row.baseline_balanced_pct = 100.0 * static_cast<double>(a.baseline_balanced) / count;
    row.subject_balanced_pct = 100.0 * static_cast<double>(a.subject_balanced) / count;
    row.subject_better_pct = 100.0 * static_cast<double>(a.subject_better) / count;
    row.abs_diff = std::abs(row.avg_subject - row.avg_baseline);
    if (row.avg_subject != 0.0) {
      row.perc_diff = (row.avg_baseline - row.avg_subject) / row.avg_subject * 100.0;
    } else {
      row.perc_diff = row.avg_baseline == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    report.rows.push_back(row);
  }
  return report;
}

void write_compare_csv(std::ostream& out, const CompareReport& report) {
  out << "n,graphs,avg_density,avg_subject_inter_edges,avg_baseline_inter_edges,baseline_balanced_pct,"
         "subject_balanced_pct,subject_better_pct,abs_diff,perc_diff\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << r.graphs << ',' << csv_number(r.avg_density) << ',' << csv_number(r.avg_subject) << ','
        << csv_number(r.avg_baseline) << ',' << csv_number(r.baseline_balanced_pct) << ','
        << csv_number(r.subject_balanced_pct) << ',' << csv_number(r.subject_better_pct) << ','
        << csv_number(r.abs_diff) << ',' << csv_number(r.perc_diff) << '\n';
  }
}

void write_heatmap_csv(std::ostream& out, const SuccessHeatmap& heatmap) {
  out << "n,density_bin,runs,successes,rate\n";
  for (const auto& c : heatmap.cells) {
    out << c.n << ',' << csv_number(c.density_bin) << ',' << c.runs << ',' << c.successes << ','
        << csv_number(c.rate()) << '\n';
  }
}

void write_lambda_ranges_csv(std::ostream& out, std::span<const LambdaRangeRow> rows) {
  out << "graph_key,n,density,lambda_est,lambda_min,lambda_max\n";
  for (const auto& r : rows) {
    out << r.graph_key << ',' << r.n << ',' << csv_number(r.density) << ',' << csv_number(r.lambda_est) << ','
        << csv_number(r.lambda_min) << ',' << csv_number(r.lambda_max) << '\n';
  }
}

void print_compare_table(std::ostream& out, const CompareReport& report) {
  const auto flags = out.flags();
  out << std::setw(6) << "n" << std::setw(8) << "graphs" << std::setw(10) << "density" << std::setw(12)
      << "subject" << std::setw(12) << "baseline" << std::setw(12) << "base bal%" << std::setw(12) << "better%"
      << std::setw(10) << "abs" << std::setw(10) << "perc%" << '\n';
  out << std::fixed;
  for (const auto& r : report.rows) {
    out << std::setw(6) << r.n << std::setw(8) << r.graphs << std::setprecision(4) << std::setw(10)
        << r.avg_density << std::setprecision(2) << std::setw(12) << r.avg_subject << std::setw(12)
        << r.avg_baseline << std::setw(12) << r.baseline_balanced_pct << std::setw(12) << r.subject_better_pct
        << std::setw(10) << r.abs_diff << std::setw(10) << r.perc_diff << '\n';
  }
  if (report.skipped_graphs > 0) out << "skipped graphs without both solvers: " << report.skipped_graphs << '\n';
  out.flags(flags);
}

void print_heatmap_table(std::ostream& out, const SuccessHeatmap& heatmap) {
  const auto flags = out.flags();
  out << std::setw(6) << "n" << std::setw(9) << "density" << std::setw(7) << "runs" << std::setw(11)
      << "successes" << std::setw(8) << "rate" << '\n';
  out << std::fixed;
  for (const auto& c : heatmap.cells) {
    out << std::setw(6) << c.n << std::setprecision(1) << std::setw(9) << c.density_bin << std::setw(7) << c.runs
        << std::setw(11) << c.successes << std::setprecision(3) << std::setw(8) << c.rate() << '\n';
  }
  out.flags(flags);
}

}  // namespace mbp
