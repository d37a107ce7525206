#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparsecol/experiment.hpp"
#include "sparsecol/nodes.hpp"
#include "sparsecol/selftest.hpp"

using namespace sparsecol;

int main(int argc, char** argv) {
  CLI::App app{"Adaptive sparse-grid collocation for parametric diffusion"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the strategies of a JSON experiment config");
  std::string config_path;
  std::string outdir;
  unsigned parallelism = 0;
  bool force_reference = false;
  bool print_defaults = false;
  bool quiet = false;
  run->add_option("config", config_path, "Experiment config (JSON)");
  run->add_option("--outdir", outdir, "Output directory (overrides the config)");
  run->add_option("--parallelism", parallelism, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
  run->add_flag("--force-reference", force_reference, "Compute the reference error every iteration");
  run->add_flag("--print-defaults", print_defaults, "Print the default config and exit");
  run->add_flag("--quiet", quiet, "No per-iteration progress on stderr");

  auto* compare = app.add_subcommand("compare", "Join traces of one problem into an error-vs-solves table");
  std::vector<std::string> traces;
  std::string csv_out;
  compare->add_option("traces", traces, "Trace CSV files");
  compare->add_option("--csv", csv_out, "Also write the table as CSV to this file");

  auto* nodes = app.add_subcommand("nodes", "Print the first n nodes of a family as CSV");
  std::string kind;
  std::size_t count = 0;
  nodes->add_option("kind", kind, "leja | rleja | cc")->required();
  nodes->add_option("n", count, "Number of nodes")->required();

  auto* selftest = app.add_subcommand("selftest", "Run the fast property checks");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    if (print_defaults) {
      std::cout << default_config_json().dump(2) << '\n';
      return 0;
    }
    if (config_path.empty()) {
      std::cerr << "run: a config file is required\n" << run->help();
      return 3;
    }
    RunOptions options;
    if (!outdir.empty()) options.outdir = outdir;
    if (parallelism > 0) options.parallelism = parallelism;
    options.force_reference = force_reference;
    options.verbose = !quiet;
    return run_experiment_file(config_path, options, std::cerr);
  }

  if (*compare) {
    if (traces.empty()) {
      std::cerr << "compare: at least one trace is required\n" << compare->help();
      return 64;
    }
    try {
      const ComparisonTable table = compare_report({traces.begin(), traces.end()});
      std::cout << table.text();
      if (!csv_out.empty()) {
        std::FILE* f = std::fopen(csv_out.c_str(), "w");
        if (!f) throw CompareError("cannot write " + csv_out);
        const std::string s = table.csv();
        std::fwrite(s.data(), 1, s.size(), f);
        std::fclose(f);
      }
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "compare: " << e.what() << '\n';
      return 1;
    }
  }

  if (*nodes) {
    try {
      const auto family = NodeFamily::get(parse_node_kind(kind));
      const auto y = family->nodes(count);
      std::cout << "i,y\n";
      for (std::size_t i = 0; i < y.size(); ++i) std::printf("%zu,%.17g\n", i, y[i]);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "nodes: " << e.what() << '\n';
      return 3;
    }
  }

  if (*selftest) {
    bool ok = true;
    for (const auto& c : run_selftest()) {
      std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << "  " << c.detail << '\n';
      ok = ok && c.passed;
    }
    return ok ? 0 : 1;
  }
  return 0;
}
