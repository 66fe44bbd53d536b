#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "mbp/harness.hpp"
#include "support.hpp"

using namespace mbp;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mbp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("generate writes deterministic edge lists") {
  testing::TempDir dir("gen");
  const auto k4 = (dir / "k4.el").string();
  const Outcome o = run_cli({"generate", "--nodes", "4", "--prob", "1.0", "--seed", "7", "--out", k4});
  REQUIRE(o.code == cli::kExitOk);
  CHECK(read_all(k4) == "# n=4 p=1 seed=7\np el 4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
  CHECK(contains(o.err, "resolved config"));

  const auto a = (dir / "a.el").string(), b = (dir / "b.el").string();
  run_cli({"generate", "--nodes", "30", "--prob", "0.3", "--seed", "11", "--out", a});
  run_cli({"generate", "--nodes", "30", "--prob", "0.3", "--seed", "11", "--out", b});
  CHECK(read_all(a) == read_all(b));

  const auto odd = (dir / "odd.el").string();
  CHECK(run_cli({"generate", "--nodes", "3", "--prob", "0.5", "--seed", "1", "--out", odd}).code == cli::kExitOk);
  CHECK(run_cli({"solve", "--graph", odd, "--solver", "kl"}).code == cli::kExitUsage);
  CHECK(run_cli({"generate", "--nodes", "4", "--prob", "1.5", "--seed", "1", "--out", odd}).code ==
        cli::kExitUsage);
}

TEST_CASE("solve reports cuts and maps errors to exit codes") {
  testing::TempDir dir("solve");
  const auto path = (dir / "path.el").string();
  save_graph(path_graph(4), path);

  const Outcome ok = run_cli({"solve", "--graph", path, "--solver", "exact-qubo", "--lambda-strategy", "fixed:1"});
  REQUIRE(ok.code == cli::kExitOk);
  CHECK(contains(ok.out, "cut: 1\n"));
  CHECK(contains(ok.out, "balanced: yes"));
  CHECK(contains(ok.out, "lambda: 1 (strategy"));

  CHECK(run_cli({"solve", "--graph", path, "--solver", "kl", "--lambda-strategy", "maxcut"}).code ==
        cli::kExitStrategy);

  const auto big = (dir / "big.el").string();
  run_cli({"generate", "--nodes", "100", "--prob", "0.1", "--seed", "3", "--out", big});
  CHECK(run_cli({"solve", "--graph", big, "--solver", "exact-qubo"}).code == cli::kExitCapability);

  CHECK(run_cli({"solve", "--graph", (dir / "missing.el").string(), "--solver", "kl"}).code == cli::kExitData);
  std::ofstream(dir / "bad.el") << "p el 4 1\n0 9\n";
  CHECK(run_cli({"solve", "--graph", (dir / "bad.el").string(), "--solver", "kl"}).code == cli::kExitData);
  CHECK(run_cli({"solve", "--graph", path, "--solver", "nope"}).code == cli::kExitUsage);
  CHECK(run_cli({"solve", "--graph", path, "--solver", "kl", "--lambda-strategy", "sometimes"}).code ==
        cli::kExitUsage);
  CHECK(run_cli({"solve", "--graph", path, "--solver", "kl", "--lambda-strategy", "gbr:" + dir.path().string()})
            .code == cli::kExitData);

  const auto store = (dir / "s.jsonl").string();
  const Outcome stored = run_cli({"solve", "--graph", big, "--solver", "sa-mbp", "--seed", "5", "--sweeps", "200",
                                  "--restarts", "2", "--store", store});
  REQUIRE(stored.code == cli::kExitOk);
  const auto records = scan_store(store).records;
  REQUIRE(records.size() == 1);
  CHECK(records[0].sa->sweeps == 200);
  CHECK(records[0].solver_seed == 5u);
}

TEST_CASE("usage errors and help") {
  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run_cli({"generate", "--nodes", "4", "--prob", "1", "--seed", "1", "--out", "x", "--bogus"}).code ==
        cli::kExitUsage);
  CHECK(run_cli({"generate", "--nodes", "4"}).code == cli::kExitUsage);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);

  const std::vector<std::pair<std::string, std::vector<std::string>>> flags{
      {"generate", {"--nodes", "--prob", "--seed", "--out"}},
      {"solve",
       {"--graph", "--solver", "--lambda-strategy", "--seed", "--store", "--sweeps", "--restarts", "--cooling",
        "--t-initial", "--t-final"}},
      {"sweep",
       {"--nodes-list", "--probs-list", "--seeds-per-cell", "--multipliers", "--lambda-strategy", "--solvers",
        "--store", "--master-seed", "--jobs"}},
      {"train", {"--store", "--model-out", "--split-seed", "--solver", "--trees", "--learning-rate", "--max-depth"}},
      {"predict", {"--graph", "--models"}},
      {"report", {"--store", "--baseline", "--subject", "--strategy", "--out", "--heatmap-out", "--heatmap-solver"}},
      {"audit", {"--store", "--replay"}},
      {"qubo", {"--graph", "--lambda-strategy", "--out"}},
  };
  for (const auto& [cmd, names] : flags) {
    const Outcome help = run_cli({cmd, "--help"});
    CHECK(help.code == cli::kExitOk);
    for (const auto& flag : names) {
      INFO(cmd << " " << flag);
      CHECK(contains(help.out, flag));
    }
  }
}

TEST_CASE("sweep, resume, audit and report") {
  testing::TempDir dir("sweep");
  const auto store = (dir / "s.jsonl").string();
  const std::vector<std::string> args{"sweep",     "--nodes-list", "100",   "--probs-list",   "0.5",
                                      "--seeds-per-cell", "2",     "--multipliers", "table1", "--solvers",
                                      "hybrid-standin,multilevel", "--store", store, "--master-seed", "9"};
  const Outcome first = run_cli(args);
  REQUIRE(first.code == cli::kExitOk);
  CHECK(contains(first.out, "appended 16, skipped 0"));
  const Outcome again = run_cli(args);
  CHECK(again.code == cli::kExitOk);
  CHECK(contains(again.out, "appended 0, skipped 16"));
  CHECK(scan_store(store).records.size() == 16);

  const Outcome audit = run_cli({"audit", "--store", store, "--replay"});
  CHECK(audit.code == cli::kExitOk);
  CHECK(contains(audit.out, "0 failure(s)"));

  const auto cmp = (dir / "cmp.csv").string(), heat = (dir / "heat.csv").string();
  const Outcome report = run_cli({"report", "--store", store, "--out", cmp, "--heatmap-out", heat});
  REQUIRE(report.code == cli::kExitOk);
  CHECK(read_all(cmp).rfind("n,graphs,avg_density,", 0) == 0);
  std::istringstream rows(read_all(heat));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "n,density_bin,runs,successes,rate");
  std::size_t total = 0;
  while (std::getline(rows, line)) {
    std::istringstream fields(line);
    std::string n, bin, runs;
    std::getline(fields, n, ',');
    std::getline(fields, bin, ',');
    std::getline(fields, runs, ',');
    total += std::stoul(runs);
  }
  CHECK(total == 8);

  // Another seed gives different records; a tampered store fails the audit.
  const auto tampered = dir / "t.jsonl";
  std::string text = read_all(store);
  const auto at = text.find("\"inter_edges\":") + 14;
  text.insert(at, "1");
  std::ofstream(tampered, std::ios::binary) << text;
  CHECK(run_cli({"audit", "--store", tampered.string()}).code == cli::kExitData);

  std::ofstream(dir / "bad.jsonl") << R"({"format":"mbp-record-store","schema_version":7})" << '\n';
  CHECK(run_cli({"audit", "--store", (dir / "bad.jsonl").string()}).code == cli::kExitData);
  CHECK(run_cli({"sweep", "--nodes-list", "100", "--probs-list", "0.5", "--solvers", "exact-qubo", "--store",
                 (dir / "cap.jsonl").string()})
            .code == cli::kExitData);
}

TEST_CASE("train, predict and qubo") {
  testing::TempDir dir("train");
  const auto store = (dir / "s.jsonl").string();
  REQUIRE(run_cli({"sweep", "--nodes-list", "10,12", "--probs-list", "0.3,0.5,0.8", "--seeds-per-cell", "2",
                   "--multipliers", "0.5,1,2", "--solvers", "hybrid-standin", "--store", store, "--master-seed", "1", "--jobs", "4"})
              .code == cli::kExitOk);

  const auto models = (dir / "m").string(), models2 = (dir / "m2").string();
  const Outcome train = run_cli({"train", "--store", store, "--model-out", models, "--split-seed", "3"});
  REQUIRE(train.code == cli::kExitOk);
  CHECK(contains(train.out, "r2 "));
  run_cli({"train", "--store", store, "--model-out", models2, "--split-seed", "3"});
  for (const char* file : {"gbr_min.model", "gbr_max.model", "metrics.csv", "lambda_ranges.csv"}) {
    CHECK(read_all(std::filesystem::path(models) / file) == read_all(std::filesystem::path(models2) / file));
  }

  const auto graph = (dir / "g.el").string();
  run_cli({"generate", "--nodes", "12", "--prob", "0.5", "--seed", "4", "--out", graph});
  const Outcome predict = run_cli({"predict", "--graph", graph, "--models", models});
  CHECK(predict.code == cli::kExitOk);
  CHECK(contains(predict.out, "predicted multipliers"));
  CHECK(run_cli({"predict", "--graph", graph, "--models", (dir / "none").string()}).code == cli::kExitData);

  const Outcome gbr_solve =
      run_cli({"solve", "--graph", graph, "--solver", "exact-bisection", "--lambda-strategy", "gbr:" + models});
  CHECK(gbr_solve.code == cli::kExitOk);

  const auto qubo = (dir / "q.txt").string();
  CHECK(run_cli({"qubo", "--graph", graph, "--lambda-strategy", "est", "--out", qubo}).code == cli::kExitOk);
  CHECK(std::filesystem::file_size(qubo) > 0);

  // Too few usable rows.
  const auto tiny = (dir / "tiny.jsonl").string();
  run_cli({"sweep", "--nodes-list", "10", "--probs-list", "0.5", "--seeds-per-cell", "3", "--solvers",
           "hybrid-standin", "--store", tiny});
  CHECK(run_cli({"train", "--store", tiny, "--model-out", (dir / "t").string()}).code == cli::kExitData);
}
