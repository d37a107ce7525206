#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sparsecol/experiment.hpp"

using namespace sparsecol;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sparsecol_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunOptions quiet(const fs::path& outdir) {
  RunOptions o;
  o.outdir = outdir.string();
  return o;
}

} // namespace

TEST_CASE("defaults are complete and round trip") {
  const json d = default_config_json();
  for (const char* key : {"problem", "mesh", "nodes", "p", "strategies", "tolerance", "max_iterations", "max_solves",
                          "reference_order", "doerfler_fraction", "parallelism", "outdir", "seed"})
    CHECK(d.contains(key));
  CHECK(d.at("mesh").at("N") == 256);
  CHECK(d.at("problem").at("coefficient").at("family") == "cosine");
  CHECK(ExperimentConfig::from_json(d).to_json() == d);
  const auto c = parse_config(R"({"p": "inf", "nodes": "cc", "strategies": ["GN_profit"], "mesh": {"N": 64}})");
  CHECK(std::isinf(c.p));
  CHECK(c.nodes == NodeKind::ClenshawCurtis);
  CHECK(c.strategies == std::vector<Strategy>{Strategy::GNProfit});
  CHECK(c.mesh == 64);
}

TEST_CASE("config errors") {
  try {
    parse_config("{\n  \"problem\": {\"M\": 2},\n  \"mesh\": ,\n}");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"tolerances": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"tolerance": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"problem": {"M": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"strategies": ["GX"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"p": 0.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"mesh": "big"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"([1, 2])"), ConfigError);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  std::ostringstream err;
  const auto malformed = write_file(dir / "bad.json", "{\n\"problem\": {\"M\": 2}\n\"mesh\": 64\n}\n");
  CHECK(run_experiment_file(malformed, quiet(dir / "a"), err) == 3);
  CHECK(err.str().find("line 3") != std::string::npos);

  const auto elliptic = write_file(dir / "ell.json", R"({"problem": {"M": 1, "coefficient": {"gamma": 1.5}}})");
  err.str("");
  CHECK(run_experiment_file(elliptic, quiet(dir / "b"), err) == 3);
  CHECK(err.str().find("ellipticity") != std::string::npos);
  CHECK(run_experiment_file(dir / "missing.json", quiet(dir / "c"), err) == 3);

  const auto budget = write_file(dir / "budget.json",
                                 R"({"problem": {"M": 2}, "mesh": 64, "max_iterations": 4, "strategies": ["GN_envelope"]})");
  CHECK(run_experiment_file(budget, quiet(dir / "d"), err) == 2);
  const auto t = read_trace(dir / "d" / "GN_envelope-trace.csv");
  CHECK(t.rows.size() == 5);
  const json s = json::parse(read_file(dir / "d" / "summary.json"));
  CHECK(s.at("strategies")[0].at("budget_exhausted") == true);
}

TEST_CASE("deterministic problem gives single-row traces") {
  const auto dir = scratch("det");
  auto c = parse_config(
      R"({"problem": {"M": 2, "coefficient": {"family": "constant", "a0": 2, "am": [0, 0]}}, "mesh": 64,
          "strategies": ["GN_envelope", "GN_profit", "GG"]})");
  const auto r = run_experiment(c, quiet(dir));
  CHECK(r.exit_code == 0);
  for (const auto& o : r.outcomes) {
    const auto t = read_trace(o.trace_csv);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].total_estimator <= 1e-15);
    CHECK(t.rows[0].n == 0);
  }
}

TEST_CASE("default two-dimensional experiment") {
  const auto dir = scratch("m2");
  const auto c = parse_config(R"({"problem": {"M": 2}})");
  const auto r = run_experiment(c, quiet(dir));
  CHECK(r.exit_code == 0);
  REQUIRE(r.outcomes.size() == 2);
  const json s = json::parse(read_file(dir / "summary.json"));
  REQUIRE(s.at("strategies").size() == 2);
  const json& gn = s.at("strategies")[0];
  const json& gg = s.at("strategies")[1];
  CHECK(gn.at("strategy") == "GN_envelope");
  CHECK(gg.at("strategy") == "GG");
  CHECK(gn.at("terminal_reference_error").get<double>() <= 1e-6);
  CHECK(gg.at("terminal_reference_error").get<double>() <= 1e-6);
  CHECK(gn.at("solves").get<std::size_t>() <= gg.at("solves").get<std::size_t>());
  CHECK(gn.at("effectivity_min").get<double>() >= 1.0);
  CHECK(gg.contains("pre_augmentation_reference_error"));
  CHECK(s.at("problem_hash") == problem_hash(c));
  CHECK(fs::exists(dir / "solution_y0.csv"));

  // trace layout
  const std::string text = read_file(dir / "GN_envelope-trace.csv");
  std::istringstream in(text);
  std::string first, header;
  std::getline(in, first);
  std::getline(in, header);
  CHECK(first == "# problem_hash=" + problem_hash(c));
  CHECK(header == "n,strategy,lambda_size,grid_size,solves,total_estimator,max_estimator,reference_error,effectivity,wall_ms");
  const auto t = read_trace(dir / "GN_envelope-trace.csv");
  const auto& iters = r.outcomes[0].trace.iterations;
  REQUIRE(t.rows.size() == iters.size());
  for (std::size_t n = 0; n < iters.size(); ++n) {
    CHECK(t.rows[n].total_estimator == iters[n].report.total);  // 17 digits round trip exactly
    CHECK(t.rows[n].reference_error == iters[n].reference_error);
    CHECK(t.rows[n].solves == iters[n].solves);
    CHECK(t.rows[n].lambda_size == iters[n].index_set.size());
  }

  // a trace cut at a row boundary, or mid-row, still parses
  const auto cut = write_file(dir / "cut.csv", text.substr(0, text.size() / 2));
  const auto partial = read_trace(cut);
  CHECK(partial.rows.size() < t.rows.size());
  CHECK(partial.rows.size() > 0);
  CHECK(partial.problem_hash == t.problem_hash);

  // final set round trip
  const auto loaded = load_final_set(dir / "GN_envelope-final-set.json");
  const auto& mem = *r.outcomes[0].trace.final_interpolant;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> y{u(rng), u(rng)};
    CHECK((loaded.evaluate(y) - mem.evaluate(y)).lpNorm<Eigen::Infinity>() <= 1e-15);
  }

  // comparison
  const auto single = compare_report({dir / "GN_envelope-trace.csv"});
  REQUIRE(single.solves.size() == t.rows.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    CHECK(single.solves[k] == t.rows[k].solves);
    CHECK(single.errors[k][0] == t.rows[k].reference_error);
  }
  const auto both = compare_report({dir / "GN_envelope-trace.csv", dir / "GG-trace.csv"});
  CHECK(both.labels == std::vector<std::string>{"GN_envelope", "GG"});
  CHECK(std::is_sorted(both.solves.begin(), both.solves.end()));
  const auto gg_trace = read_trace(dir / "GG-trace.csv");
  for (std::size_t k = 0; k < both.solves.size(); ++k) {
    std::optional<double> want;
    for (const auto& row : gg_trace.rows)
      if (row.solves == both.solves[k]) want = row.reference_error;
    CHECK(both.errors[k][1] == want);
  }
  CHECK(both.csv().rfind("solves,GN_envelope:reference_error,GN_envelope:total_estimator,GG:reference_error", 0) == 0);
  CHECK(both.text().find("solves") != std::string::npos);
}

TEST_CASE("comparison refuses different problems") {
  const auto dir = scratch("cmp");
  auto a = parse_config(R"({"problem": {"M": 1}, "mesh": 32, "strategies": ["GN_envelope"]})");
  auto b = parse_config(R"({"problem": {"M": 1, "coefficient": {"gamma": 0.3}}, "mesh": 32, "strategies": ["GG"]})");
  run_experiment(a, quiet(dir / "a"));
  run_experiment(b, quiet(dir / "b"));
  CHECK_THROWS_AS(compare_report({dir / "a" / "GN_envelope-trace.csv", dir / "b" / "GG-trace.csv"}), CompareError);
  CHECK_THROWS_AS(compare_report({}), CompareError);
  CHECK_THROWS_AS(compare_report({dir / "a" / "summary.json"}), CompareError);
}

TEST_CASE("problem hash") {
  const auto a = parse_config(R"({"problem": {"M": 2}})");
  const auto b = parse_config(R"({"problem": {"M": 2, "coefficient": {"family": "cosine", "gamma": 0.4}},
                                  "strategies": ["GG"], "outdir": "elsewhere", "parallelism": 4})");
  CHECK(problem_hash(a) == problem_hash(b));
  CHECK(problem_hash(a).size() == 16);
  // pinned: the canonical serialization is platform independent
  CHECK(problem_hash(a) == "ad6a3cea49d2cf5e");
  CHECK(problem_hash(parse_config(R"({"problem": {"M": 3}})")) != problem_hash(a));
  CHECK(problem_hash(parse_config(R"({"problem": {"M": 2}, "mesh": 128})")) != problem_hash(a));
}

TEST_CASE("reference cadence") {
  CHECK(reference_cadence(1, false) == 1);
  CHECK(reference_cadence(2, false) == 1);
  CHECK(reference_cadence(3, false) == 5);
  CHECK(reference_cadence(4, false) == 5);
  CHECK(reference_cadence(5, false) == 0);
  CHECK(reference_cadence(5, true) == 1);
}

TEST_CASE("parallel runs write identical traces") {
  const auto dir = scratch("par");
  const auto c = parse_config(R"({"problem": {"M": 2}, "mesh": 64, "tolerance": 1e-7})");
  RunOptions one = quiet(dir / "one");
  RunOptions eight = quiet(dir / "eight");
  eight.parallelism = 8;
  run_experiment(c, one);
  run_experiment(c, eight);
  for (const char* name : {"GN_envelope-trace.csv", "GG-trace.csv"}) {
    const auto a = read_trace(dir / "one" / name);
    const auto b = read_trace(dir / "eight" / name);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t n = 0; n < a.rows.size(); ++n) {
      CHECK(a.rows[n].total_estimator == b.rows[n].total_estimator);
      CHECK(a.rows[n].reference_error == b.rows[n].reference_error);
      CHECK(a.rows[n].solves == b.rows[n].solves);
    }
  }
  CHECK(read_file(dir / "one" / "GG-final-set.json") == read_file(dir / "eight" / "GG-final-set.json"));
}
