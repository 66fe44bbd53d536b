#include "cli.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mbp/detail/format.hpp"
#include "mbp/error.hpp"
#include "mbp/gbr.hpp"
#include "mbp/graph.hpp"
#include "mbp/harness.hpp"
#include "mbp/qubo.hpp"
#include "mbp/solvers.hpp"

namespace mbp::cli {

namespace {

using detail::format_double;

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InvalidArgument(std::string(what) + ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

std::vector<double> parse_number_list(const std::string& text, std::string_view what) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(parse_number(item, what));
  if (values.empty()) throw InvalidArgument(std::string(what) + ": empty list");
  return values;
}

struct SaFlags {
  SaParams params;
  double t_initial = 0.0;
  double t_final = 0.0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--sweeps", params.sweeps, "Annealing sweeps per restart")->capture_default_str();
    cmd.add_option("--restarts", params.restarts, "Independent annealing restarts")->capture_default_str();
    cmd.add_option("--cooling", params.cooling, "Geometric cooling factor per sweep, in (0,1)")
        ->capture_default_str();
    cmd.add_option("--t-initial", t_initial, "Initial temperature (default: automatic)");
    cmd.add_option("--t-final", t_final, "Temperature floor (default: 1e-3 of the initial temperature)");
  }

  SaParams resolve(const CLI::App& cmd) const {
    SaParams out = params;
    if (cmd.count("--t-initial") > 0) out.t_initial = t_initial;
    if (cmd.count("--t-final") > 0) out.t_final = t_final;
    out.validate();
    return out;
  }
};

void print_spec(std::ostream& out, const LambdaSpec& spec) {
  out << "lambda: " << format_double(spec.lambda) << " (strategy " << to_string(spec.strategy);
  if (spec.lambda_est) out << ", lambda_est " << format_double(*spec.lambda_est);
  if (spec.bounds) out << ", bounds [" << format_double(spec.bounds->lower) << ", " << format_double(spec.bounds->upper) << "]";
  if (spec.multiplier) out << ", multiplier " << format_double(*spec.multiplier);
  if (spec.gbr_pred) {
    out << ", predicted multipliers [" << format_double(spec.gbr_pred->lambda_min_pred) << ", "
        << format_double(spec.gbr_pred->lambda_max_pred) << "]";
  }
  if (spec.p_used) out << ", p " << format_double(*spec.p_used);
  out << ")\n";
}

void print_resolved_config(std::ostream& err, const CLI::App& cmd) {
  err << "# resolved config: " << cmd.get_name() << '\n' << cmd.config_to_str(true, false);
}

std::string seconds(std::chrono::nanoseconds d) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << std::chrono::duration<double>(d).count() << " s";
  return s.str();
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  body(out);
  if (!out) throw DataError("write to " + path + " failed");
}

}  // namespace

LambdaStrategy parse_lambda_strategy(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  const bool has_arg = colon != std::string_view::npos;
  if (head == "maxcut" && !has_arg) return MaxcutStrategy{};
  if (head == "est" && !has_arg) return EstStrategy{};
  if (head == "mult" && has_arg) return MultStrategy{parse_number(arg, "mult")};
  if (head == "fixed" && has_arg) return FixedStrategy{parse_number(arg, "fixed")};
  if (head == "gbr" && has_arg && !arg.empty()) {
    LambdaModels models = load_lambda_models(std::string(arg));
    return GbrStrategy{std::make_shared<const GbrModel>(std::move(models.min_model)),
                       std::make_shared<const GbrModel>(std::move(models.max_model))};
  }
  throw InvalidArgument("lambda strategy '" + std::string(text) +
                        "' is not one of maxcut, est, mult:<v>, gbr:<dir>, fixed:<v>");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum bisection experiments: QUBO construction, penalty tuning, solvers and reports"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // generate
  auto* generate = app.add_subcommand("generate", "Write an Erdos-Renyi G(n,p) graph as an edge list");
  int gen_nodes = 0;
  double gen_prob = 0.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  generate->add_option("--nodes", gen_nodes, "Number of nodes (>= 2)")->required();
  generate->add_option("--prob", gen_prob, "Edge probability in [0,1]")->required();
  generate->add_option("--seed", gen_seed, "Generator seed")->required();
  generate->add_option("--out", gen_out, "Output edge-list file")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one graph with one solver");
  std::string solve_graph, solve_solver, solve_strategy = "est", solve_store;
  std::uint64_t solve_seed = 0;
  SaFlags solve_sa;
  solve->add_option("--graph", solve_graph, "Edge-list file")->required();
  solve->add_option("--solver", solve_solver, "Solver id")->required();
  solve->add_option("--lambda-strategy", solve_strategy, "maxcut | est | mult:<v> | gbr:<dir> | fixed:<v>")
      ->capture_default_str();
  solve->add_option("--seed", solve_seed, "Solver seed")->capture_default_str();
  solve->add_option("--store", solve_store, "Append the record to this record file");
  solve_sa.add_to(*solve);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Factorial sweep over sizes, densities, seeds and multipliers");
  std::vector<int> sweep_nodes;
  std::vector<double> sweep_probs;
  int sweep_seeds = 1;
  std::string sweep_mults = "table1", sweep_strategy, sweep_store;
  std::vector<std::string> sweep_solvers;
  std::uint64_t sweep_master = 0;
  int sweep_jobs = 1;
  SaFlags sweep_sa;
  sweep_cmd->add_option("--nodes-list", sweep_nodes, "Comma-separated node counts")->required()->delimiter(',');
  sweep_cmd->add_option("--probs-list", sweep_probs, "Comma-separated edge probabilities")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--seeds-per-cell", sweep_seeds, "Graphs per (n, p) cell")->capture_default_str();
  sweep_cmd->add_option("--multipliers", sweep_mults, "'table1' or a comma-separated multiplier list")
      ->capture_default_str();
  sweep_cmd->add_option("--lambda-strategy", sweep_strategy,
                        "Use this single strategy instead of the multiplier grid");
  sweep_cmd->add_option("--solvers", sweep_solvers, "Comma-separated solver ids")->required()->delimiter(',');
  sweep_cmd->add_option("--store", sweep_store, "Record file (created if missing, resumed otherwise)")->required();
  sweep_cmd->add_option("--master-seed", sweep_master, "Seed all graph and solver seeds derive from")
      ->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep_jobs, "Concurrent sweep cells")->capture_default_str();
  sweep_sa.add_to(*sweep_cmd);

  // train
  auto* train = app.add_subcommand("train", "Extract lambda ranges from a sweep and train the two regressors");
  std::string train_store, train_out, train_solver = "hybrid-standin";
  std::uint64_t train_split_seed = 0;
  GbrParams train_params;
  train->add_option("--store", train_store, "Record file from a multiplier sweep")->required();
  train->add_option("--model-out", train_out, "Directory for the models and metrics")->required();
  train->add_option("--split-seed", train_split_seed, "Seed of the 80/20 split")->capture_default_str();
  train->add_option("--solver", train_solver, "Solver whose runs define the ranges")->capture_default_str();
  train->add_option("--trees", train_params.n_trees, "Boosting rounds")->capture_default_str();
  train->add_option("--learning-rate", train_params.learning_rate, "Shrinkage")->capture_default_str();
  train->add_option("--max-depth", train_params.max_depth, "Tree depth")->capture_default_str();
  train->add_option("--min-samples-leaf", train_params.min_samples_leaf, "Minimum rows per leaf")
      ->capture_default_str();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict lambda for a graph from trained models");
  std::string predict_graph, predict_models;
  predict_cmd->add_option("--graph", predict_graph, "Edge-list file")->required();
  predict_cmd->add_option("--models", predict_models, "Directory written by train")->required();

  // report
  auto* report = app.add_subcommand("report", "Solver comparison and success-rate reports");
  std::string report_store, report_baseline = "multilevel", report_subject = "hybrid-standin", report_out,
                            report_heatmap, report_strategy, report_heatmap_solver = "hybrid-standin";
  report->add_option("--store", report_store, "Record file")->required();
  report->add_option("--baseline", report_baseline, "Baseline solver id")->capture_default_str();
  report->add_option("--subject", report_subject, "Subject solver id")->capture_default_str();
  report->add_option("--strategy", report_strategy, "Compare only records with this strategy label, e.g. gbr");
  report->add_option("--out", report_out, "Comparison CSV");
  report->add_option("--heatmap-out", report_heatmap, "Success-rate CSV");
  report->add_option("--heatmap-solver", report_heatmap_solver, "Solver for the success rates")
      ->capture_default_str();

  // audit
  auto* audit = app.add_subcommand("audit", "Recompute every stored record from its graph seed");
  std::string audit_store;
  bool audit_replay = false;
  audit->add_option("--store", audit_store, "Record file")->required();
  audit->add_flag("--replay", audit_replay, "Also re-run each seeded solve and compare assignments");

  // qubo
  auto* qubo_cmd = app.add_subcommand("qubo", "Write the bisection QUBO of a graph");
  std::string qubo_graph, qubo_strategy = "est", qubo_out;
  qubo_cmd->add_option("--graph", qubo_graph, "Edge-list file")->required();
  qubo_cmd->add_option("--lambda-strategy", qubo_strategy, "maxcut | est | mult:<v> | gbr:<dir> | fixed:<v>")
      ->capture_default_str();
  qubo_cmd->add_option("--out", qubo_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const SolverRegistry registry = SolverRegistry::with_builtin_backends();

    if (*generate) {
      print_resolved_config(err, *generate);
      const Graph g = generate_er(gen_nodes, gen_prob, gen_seed);
      save_graph(g, gen_out);
      out << "wrote " << gen_out << ": n=" << g.node_count() << " m=" << g.edge_count() << '\n';
      return kExitOk;
    }

    if (*solve) {
      print_resolved_config(err, *solve);
      const SaParams sa = solve_sa.resolve(*solve);
      const Graph g = load_graph(solve_graph);
      const LambdaStrategy strategy = parse_lambda_strategy(solve_strategy);
      const std::vector<std::string> ids{solve_solver};
      const auto records = run_instance(g, strategy, ids, RunOptions{solve_seed, sa}, registry);
      const ExperimentRecord& r = records.front();
      out << "graph: " << r.graph_key << " n=" << r.graph.n << " m=" << r.graph.edge_count
          << " density=" << format_double(r.graph.density) << " max_degree=" << r.graph.max_degree << '\n';
      if (r.lambda_spec) print_spec(out, *r.lambda_spec);
      else out << "lambda: none (edgeless graph)\n";
      out << "solver: " << r.solver_id << '\n'
          << "cut: " << r.inter_edges << '\n'
          << "balanced: " << (r.balanced ? "yes" : "no") << " (deviation " << r.balance_deviation << ")\n"
          << "energy: " << format_double(r.energy) << '\n'
          << "time: qubo " << seconds(r.wall_time_qubo_build) << ", solve " << seconds(r.wall_time_solve) << '\n'
          << "assignment: " << r.assignment << '\n';
      if (!solve_store.empty()) {
        RecordStore store(solve_store);
        store.append(records);
        out << "appended " << records.size() << " record(s) to " << solve_store << '\n';
      }
      return kExitOk;
    }

    if (*sweep_cmd) {
      print_resolved_config(err, *sweep_cmd);
      SweepConfig config;
      config.nodes.assign(sweep_nodes.begin(), sweep_nodes.end());
      config.probs = sweep_probs;
      config.seeds_per_cell = sweep_seeds;
      if (!sweep_strategy.empty()) {
        config.strategy = parse_lambda_strategy(sweep_strategy);
      } else if (sweep_mults != "table1") {
        config.multipliers = parse_number_list(sweep_mults, "--multipliers");
      }
      config.solvers = sweep_solvers;
      config.master_seed = sweep_master;
      config.jobs = sweep_jobs;
      config.sa = sweep_sa.resolve(*sweep_cmd);
      RecordStore store(sweep_store);
      if (store.dropped_tail_bytes() > 0) {
        err << "warning: dropped " << store.dropped_tail_bytes() << " bytes of an unterminated record\n";
      }
      const SweepSummary summary = sweep(config, store, registry);
      out << "appended " << summary.appended << ", skipped " << summary.skipped << " existing, "
          << summary.failures.size() << " failed cell(s)\n";
      for (const auto& f : summary.failures) err << "failed: " << f << '\n';
      const bool total_failure = !summary.failures.empty() && summary.appended == 0 && summary.skipped == 0;
      return total_failure ? kExitData : kExitOk;
    }

    if (*train) {
      print_resolved_config(err, *train);
      const ScanResult scan = scan_store(train_store);
      if (scan.partial_lines > 0) err << "warning: ignored " << scan.partial_lines << " partial line(s)\n";
      const LambdaRangeExtraction ranges = extract_lambda_ranges(scan.records, train_solver);
      out << "lambda ranges: " << ranges.rows.size() << " graph(s), " << ranges.excluded_graphs
          << " excluded without a balanced run\n";
      const LambdaModels models = train_lambda_models(ranges.rows, train_split_seed, train_params);
      save_lambda_models(models, train_out);
      write_file((std::filesystem::path(train_out) / "lambda_ranges.csv").string(),
                 [&](std::ostream& o) { write_lambda_ranges_csv(o, ranges.rows); });
      out << "train rows " << models.train_rows << ", test rows " << models.test_rows << '\n';
      out << "lambda_min: rmse " << format_double(models.test_min.rmse) << " mae "
          << format_double(models.test_min.mae) << " r2 " << format_double(models.test_min.r2) << '\n';
      out << "lambda_max: rmse " << format_double(models.test_max.rmse) << " mae "
          << format_double(models.test_max.mae) << " r2 " << format_double(models.test_max.r2) << '\n';
      out << "models written to " << train_out << '\n';
      return kExitOk;
    }

    if (*predict_cmd) {
      print_resolved_config(err, *predict_cmd);
      const Graph g = load_graph(predict_graph);
      const LambdaSpec spec = resolve_lambda(g, parse_lambda_strategy("gbr:" + predict_models));
      print_spec(out, spec);
      return kExitOk;
    }

    if (*report) {
      print_resolved_config(err, *report);
      const ScanResult scan = scan_store(report_store);
      if (scan.partial_lines > 0) err << "warning: ignored " << scan.partial_lines << " partial line(s)\n";
      std::vector<ExperimentRecord> compared;
      for (const auto& r : scan.records) {
        if (report_strategy.empty() || r.strategy == report_strategy) compared.push_back(r);
      }
      const CompareReport cmp = compare_report(compared, report_baseline, report_subject);
      if (cmp.skipped_graphs > 0) {
        err << "warning: " << cmp.skipped_graphs << " graph(s) lack runs of both solvers\n";
      }
      out << "comparison: subject " << report_subject << " vs baseline " << report_baseline << '\n';
      print_compare_table(out, cmp);
      const SuccessHeatmap heatmap = success_heatmap(scan.records, report_heatmap_solver);
      out << "success rate of " << report_heatmap_solver << " over multipliers\n";
      print_heatmap_table(out, heatmap);
      if (!report_out.empty()) write_file(report_out, [&](std::ostream& o) { write_compare_csv(o, cmp); });
      if (!report_heatmap.empty()) {
        write_file(report_heatmap, [&](std::ostream& o) { write_heatmap_csv(o, heatmap); });
      }
      return kExitOk;
    }

    if (*audit) {
      print_resolved_config(err, *audit);
      const ScanResult scan = scan_store(audit_store);
      if (scan.partial_lines > 0) err << "warning: ignored " << scan.partial_lines << " partial line(s)\n";
      const AuditReport result = audit_records(scan.records, audit_replay ? &registry : nullptr);
      out << "audited " << result.checked << " record(s), replayed " << result.replayed << ", "
          << result.failures.size() << " failure(s)\n";
      out << "digest " << determinism_digest(scan.records) << '\n';
      for (const auto& f : result.failures) out << "  " << f << '\n';
      return result.ok() ? kExitOk : kExitData;
    }

    if (*qubo_cmd) {
      print_resolved_config(err, *qubo_cmd);
      const Graph g = load_graph(qubo_graph);
      require_even_order(g);
      const LambdaSpec spec = resolve_lambda(g, parse_lambda_strategy(qubo_strategy));
      write_file(qubo_out, [&](std::ostream& o) { write_qubo(o, build_mbp_qubo(g, spec.lambda)); });
      print_spec(out, spec);
      out << "wrote " << qubo_out << '\n';
      return kExitOk;
    }
  } catch (const StrategyError& e) {
    err << "error: " << e.what() << '\n';
    return kExitStrategy;
  } catch (const CapabilityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCapability;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace mbp::cli
