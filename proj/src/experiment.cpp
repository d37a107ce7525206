#include "sparsecol/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace sparsecol {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kTraceColumns = {"n",          "strategy",        "lambda_size",   "grid_size",
                                                "solves",     "total_estimator", "max_estimator", "reference_error",
                                                "effectivity", "wall_ms"};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json normalize_problem(const json& p) {
  if (!p.is_object()) throw ConfigError("problem must be an object");
  for (const auto& [key, _] : p.items())
    if (key != "M" && key != "coefficient" && key != "rhs") throw ConfigError("unknown problem key '" + key + "'");
  if (!p.contains("M") || !p.at("M").is_number_integer() || p.at("M").get<long>() < 1)
    throw ConfigError("problem.M must be a positive integer");
  const auto dim = p.at("M").get<std::size_t>();
  json coef = p.value("coefficient", json::object());
  json rhs = p.value("rhs", json::object());
  const std::string family = coef.value("family", "cosine");
  json c = {{"family", family}, {"a0", coef.value("a0", 1.0)}};
  if (family == "constant") {
    c["am"] = coef.value("am", std::vector<double>(dim, 0.0));
  } else {
    c["gamma"] = coef.value("gamma", 0.4);
    c["sigma"] = coef.value("sigma", 2.0);
  }
  const std::string type = rhs.value("type", "constant");
  json r = {{"type", type}};
  if (type == "sine")
    r["amplitude"] = rhs.value("amplitude", 1.0);
  else
    r["value"] = rhs.value("value", 1.0);
  return {{"M", dim}, {"coefficient", c}, {"rhs", r}};
}

double parse_p(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw ConfigError("p must be a number >= 1 or \"inf\"");
  }
  if (!v.is_number() || v.get<double>() < 1.0) throw ConfigError("p must be a number >= 1 or \"inf\"");
  return v.get<double>();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string trace_line(const TraceRow& r) {
  std::ostringstream s;
  s << r.n << ',' << r.strategy << ',' << r.lambda_size << ',' << r.grid_size << ',' << r.solves << ','
    << format_double(r.total_estimator) << ',' << format_double(r.max_estimator) << ',' << cell(r.reference_error)
    << ',' << cell(r.effectivity) << ',' << format_double(r.wall_ms) << '\n';
  return s.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Upper bound implied by the estimator; for GG the constant is unknown and taken as 1.
double error_bound(Strategy s, double total, double a_min) { return s == Strategy::GG ? total : total / a_min; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

json default_config_json() { return ExperimentConfig::from_json(json::object()).to_json(); }

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known = {"problem",        "mesh",          "nodes",           "p",
                                                 "strategies",     "tolerance",     "max_iterations",  "max_solves",
                                                 "reference_order", "doerfler_fraction", "parallelism", "outdir",
                                                 "seed"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");

  ExperimentConfig c;
  try {
    c.problem = normalize_problem(j.value("problem", json{{"M", 2}}));
    if (j.contains("mesh")) {
      const json& m = j.at("mesh");
      c.mesh = m.is_object() ? m.at("N").get<std::size_t>() : m.get<std::size_t>();
    }
    if (c.mesh < 2) throw ConfigError("mesh.N must be at least 2");
    c.nodes = parse_node_kind(j.value("nodes", std::string("leja")));
    if (j.contains("p")) c.p = parse_p(j.at("p"));
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.push_back(parse_strategy(s.get<std::string>()));
      if (c.strategies.empty()) throw ConfigError("strategies must not be empty");
    }
    c.tolerance = j.value("tolerance", c.tolerance);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.max_solves = j.value("max_solves", c.max_solves);
    c.reference_order = j.value("reference_order", c.reference_order);
    c.doerfler_fraction = j.value("doerfler_fraction", c.doerfler_fraction);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.outdir = j.value("outdir", c.outdir);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(c.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (c.max_iterations < 1 || c.max_solves < 1) throw ConfigError("budgets must be at least 1");
  if (c.reference_order < 1) throw ConfigError("reference_order must be at least 1");
  if (c.doerfler_fraction < 0.0 || c.doerfler_fraction > 1.0) throw ConfigError("doerfler_fraction must lie in [0,1]");
  if (c.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  return c;
}

json ExperimentConfig::to_json() const {
  json strategies = json::array();
  for (auto s : this->strategies) strategies.push_back(sparsecol::to_string(s));
  return {{"problem", problem},
          {"mesh", {{"N", mesh}}},
          {"nodes", sparsecol::to_string(nodes)},
          {"p", std::isinf(p) ? json("inf") : json(p)},
          {"strategies", strategies},
          {"tolerance", tolerance},
          {"max_iterations", max_iterations},
          {"max_solves", max_solves},
          {"reference_order", reference_order},
          {"doerfler_fraction", doerfler_fraction},
          {"parallelism", parallelism},
          {"outdir", outdir},
          {"seed", seed}};
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
    throw ConfigError("config parse error at line " + std::to_string(line) + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string problem_hash(const ExperimentConfig& config) {
  const json key = {{"problem", config.problem},
                    {"mesh", config.mesh},
                    {"p", std::isinf(config.p) ? json("inf") : json(config.p)}};
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(key.dump())));
  return buf;
}

int reference_cadence(std::size_t dim, bool force) {
  if (force) return 1;
  if (dim <= 2) return 1;
  if (dim <= 4) return 5;
  return 0;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const DiffusionProblem problem = DiffusionProblem::from_json(config.problem);
  const SpatialDiscretization disc(problem, config.mesh);
  const EllipticityReport ell = check_ellipticity(problem, disc);
  const unsigned threads = options.parallelism.value_or(config.parallelism);
  const fs::path outdir = options.outdir.value_or(config.outdir);
  fs::create_directories(outdir);
  const std::string hash = problem_hash(config);

  NormSpec norm;
  norm.p = config.p;
  const int cadence = reference_cadence(problem.dim(), options.force_reference);
  std::optional<ReferenceSolution> reference;
  if (cadence > 0) reference.emplace(disc, config.reference_order, threads);

  {
    std::ofstream snap(outdir / "solution_y0.csv");
    write_solution_csv(disc, solve_at(disc, std::vector<double>(problem.dim(), 0.0)), snap);
  }

  ExperimentResult result;
  json strategies = json::array();
  for (const Strategy s : config.strategies) {
    const std::string name = to_string(s);
    StrategyOutcome out{s, {}, outdir / (name + "-trace.csv"), outdir / (name + "-final-set.json")};
    std::ofstream csv(out.trace_csv, std::ios::trunc);
    csv << "# problem_hash=" << hash << '\n';
    for (std::size_t c = 0; c < kTraceColumns.size(); ++c) csv << (c ? "," : "") << kTraceColumns[c];
    csv << '\n' << std::flush;

    std::vector<double> effectivities;
    AdaptiveConfig ac;
    ac.strategy = s;
    ac.norm = norm;
    ac.tolerance = config.tolerance;
    ac.max_iterations = config.max_iterations;
    ac.max_solves = config.max_solves;
    ac.nodes = config.nodes;
    ac.parallelism = threads;
    ac.doerfler_fraction = s == Strategy::GG ? config.doerfler_fraction : 0.0;
    ac.reference = reference ? &*reference : nullptr;
    ac.reference_every = cadence;
    ac.verbose = options.verbose;
    ac.on_iteration = [&](const IterationRecord& rec) {
      TraceRow row;
      row.n = rec.n;
      row.strategy = name;
      row.lambda_size = rec.index_set.size();
      row.grid_size = rec.grid_size;
      row.solves = rec.solves;
      row.total_estimator = rec.report.total;
      row.max_estimator = rec.report.max;
      row.reference_error = rec.reference_error;
      if (rec.reference_error && *rec.reference_error > 0.0) {
        row.effectivity = error_bound(s, rec.report.total, ell.a_min) / *rec.reference_error;
        effectivities.push_back(*row.effectivity);
      }
      row.wall_ms = rec.wall_ms;
      csv << trace_line(row) << std::flush;
    };
    out.trace = run_adaptive(problem, disc, ac);
    csv.close();

    const auto& last = out.trace.iterations.back();
    json final_set = {{"strategy", name},
                      {"problem_hash", hash},
                      {"problem", config.problem},
                      {"mesh", {{"N", config.mesh}}},
                      {"interpolant", out.trace.final_interpolant->to_json()}};
    std::ofstream(out.final_set) << final_set.dump(1) << '\n';

    json entry = {{"strategy", name},
                  {"converged", out.trace.converged},
                  {"budget_exhausted", out.trace.budget_exhausted},
                  {"stopping_rule", out.trace.stopping_rule},
                  {"iterations", out.trace.iterations.size()},
                  {"lambda_size", last.index_set.size()},
                  {"final_lambda_size", out.trace.final_interpolant->index_set().size()},
                  {"terminal_estimator", last.report.total},
                  {"terminal_reference_error", opt_json(out.trace.final_reference_error)},
                  {"solves", out.trace.final_solves},
                  {"effectivity_min", effectivities.empty() ? json(nullptr)
                                                            : json(*std::min_element(effectivities.begin(),
                                                                                     effectivities.end()))},
                  {"effectivity_median", effectivities.empty() ? json(nullptr) : json(median(effectivities))},
                  {"trace", out.trace_csv.filename().string()},
                  {"final_set", out.final_set.filename().string()}};
    if (s == Strategy::GG) entry["pre_augmentation_reference_error"] = opt_json(out.trace.pre_augmentation_reference_error);
    strategies.push_back(entry);
    if (out.trace.budget_exhausted) result.exit_code = 2;
    result.outcomes.push_back(std::move(out));
  }

  result.summary = {{"problem_hash", hash},
                    {"a_min", ell.a_min},
                    {"a_max", ell.a_max},
                    {"reference_every", cadence},
                    {"config", config.to_json()},
                    {"strategies", strategies}};
  std::ofstream(outdir / "summary.json") << result.summary.dump(2) << '\n';
  return result;
}

int run_experiment_file(const fs::path& config_path, const RunOptions& options, std::ostream& err) {
  try {
    const ExperimentConfig config = load_config(config_path);
    return run_experiment(config, options).exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 3;
  } catch (const EllipticityViolation& e) {
    err << "ellipticity error: " << e.what() << '\n';
    return 3;
  } catch (const DimensionMismatch& e) {
    err << "config error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

TraceFile read_trace(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CompareError("cannot read trace " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  TraceFile t;
  bool header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // partial last line
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# problem_hash=";
      if (line.rfind(tag, 0) == 0) t.problem_hash = line.substr(tag.size());
      continue;
    }
    const auto f = split(line, ',');
    if (!header) {
      if (f != kTraceColumns) throw CompareError(path.string() + " is not a trace file");
      header = true;
      continue;
    }
    if (f.size() != kTraceColumns.size()) throw CompareError("malformed trace row in " + path.string());
    TraceRow r;
    r.n = std::stoi(f[0]);
    r.strategy = f[1];
    r.lambda_size = std::stoul(f[2]);
    r.grid_size = std::stoul(f[3]);
    r.solves = std::stoul(f[4]);
    r.total_estimator = std::stod(f[5]);
    r.max_estimator = std::stod(f[6]);
    r.reference_error = opt_double(f[7]);
    r.effectivity = opt_double(f[8]);
    r.wall_ms = std::stod(f[9]);
    t.rows.push_back(std::move(r));
  }
  if (!header) throw CompareError(path.string() + " has no trace header");
  return t;
}

SparseInterpolant load_final_set(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  return SparseInterpolant::from_json(json::parse(in).at("interpolant"));
}

ComparisonTable compare_report(const std::vector<fs::path>& traces) {
  if (traces.empty()) throw CompareError("usage: compare <trace.csv>...");
  std::vector<TraceFile> files;
  for (const auto& p : traces) files.push_back(read_trace(p));
  for (std::size_t t = 1; t < files.size(); ++t)
    if (files[t].problem_hash != files[0].problem_hash)
      throw CompareError("traces " + traces[0].string() + " and " + traces[t].string() +
                         " belong to different problems (" + files[0].problem_hash + " vs " + files[t].problem_hash +
                         ")");

  ComparisonTable table;
  std::map<std::string, int> seen;
  for (std::size_t t = 0; t < files.size(); ++t) {
    std::string label = files[t].rows.empty() ? traces[t].stem().string() : files[t].rows.front().strategy;
    if (seen[label]++) label += "#" + std::to_string(seen[label]);
    table.labels.push_back(label);
  }
  std::vector<std::size_t> keys;
  for (const auto& f : files)
    for (const auto& r : f.rows) keys.push_back(r.solves);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  table.solves = keys;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    std::vector<std::optional<double>> err(files.size()), est(files.size());
    for (std::size_t t = 0; t < files.size(); ++t)
      for (const auto& r : files[t].rows)
        if (r.solves == keys[k]) {  // the last row with this count wins
          err[t] = r.reference_error;
          est[t] = r.total_estimator;
        }
    table.errors.push_back(std::move(err));
    table.estimators.push_back(std::move(est));
  }
  return table;
}

std::string ComparisonTable::csv() const {
  std::ostringstream s;
  s << "solves";
  for (const auto& l : labels) s << ',' << l << ":reference_error," << l << ":total_estimator";
  s << '\n';
  for (std::size_t k = 0; k < solves.size(); ++k) {
    s << solves[k];
    for (std::size_t t = 0; t < labels.size(); ++t) s << ',' << cell(errors[k][t]) << ',' << cell(estimators[k][t]);
    s << '\n';
  }
  return s.str();
}

std::string ComparisonTable::text() const {
  std::ostringstream s;
  s << std::setw(8) << "solves";
  for (const auto& l : labels) s << "  " << std::setw(14) << (l + " err") << "  " << std::setw(14) << (l + " eta");
  s << '\n';
  auto put = [&s](const std::optional<double>& v) {
    s << "  " << std::setw(14);
    if (v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6e", *v);
      s << buf;
    } else {
      s << "-";
    }
  };
  for (std::size_t k = 0; k < solves.size(); ++k) {
    s << std::setw(8) << solves[k];
    for (std::size_t t = 0; t < labels.size(); ++t) {
      put(errors[k][t]);
      put(estimators[k][t]);
    }
    s << '\n';
  }
  return s.str();
}

} // namespace sparsecol
