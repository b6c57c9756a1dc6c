#include "mixbn/cli.hpp"

#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mixbn/bench.hpp"
#include "mixbn/error.hpp"
#include "mixbn/io.hpp"

namespace mixbn::cli {

namespace {

struct EvoFlags {
  EvoConfig config;

  void attach(CLI::App* cmd) {
    cmd->add_option("--population", config.population_size, "evolutionary population size");
    cmd->add_option("--generations", config.generations, "evolutionary generation budget");
    cmd->add_option("--mutation-rate", config.mutation_rate, "probability of mutating a child");
    cmd->add_option("--crossover-rate", config.crossover_rate, "probability of crossover");
    cmd->add_option("--tournament", config.tournament_size, "tournament size");
    cmd->add_option("--stagnation", config.stagnation_limit,
                    "stop after this many generations without improvement");
  }
};

struct LearnArgs {
  std::string data;
  std::string schema;
  std::string score = "mi-mixed";
  std::string search = "hc";
  std::string params = "mixed";
  std::size_t bins = 5;
  std::optional<std::size_t> max_parents;
  std::uint64_t seed = 0;
  std::string out;
  std::string dot;
  std::size_t min_group_size = 2;
  EvoFlags evo;
};

struct SampleArgs {
  std::string model;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct ImputeArgs {
  std::string model;
  std::string data;
  std::string strategy = "sample";
  std::uint64_t seed = 0;
  std::string out;
  std::string na;
};

struct BenchArgs {
  std::string spec;
  std::string data;
  std::string schema;
  std::vector<std::string> search;
  std::size_t seeds = 10;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string strategy = "sample";
  std::string score = "mi";
  std::size_t bins = 5;
  std::optional<std::size_t> max_parents;
  std::size_t min_group_size = 2;
  bool timings = false;
  EvoFlags evo;
};

struct CompareArgs {
  std::string model;
  std::string data;
  std::string schema;
  std::string node;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::size_t bins = 20;
  std::string out;
};

std::string csv_text(const Dataset& data) {
  std::ostringstream ss;
  write_csv(ss, data);
  return ss.str();
}

Dataset load_data(const std::string& path, const std::string& schema_path, std::ostream& err) {
  std::optional<KindMap> kinds;
  if (!schema_path.empty()) kinds = load_schema_csv(schema_path);
  LoadReport report;
  Dataset data = load_csv(path, kinds ? &*kinds : nullptr, &report);
  if (!report.rejected_rows.empty())
    err << "warning: dropped " << report.rejected_rows.size()
        << " row(s) with missing or unparseable cells\n";
  return data;
}

// ---------------------------------------------------------------------------

int cmd_learn(const LearnArgs& a, std::ostream& out, std::ostream& err) {
  bool discretized_structure = false;
  ScoreKind kind = ScoreKind::MI;
  if (a.score == "mi-mixed") {
    kind = ScoreKind::MI;
  } else if (a.score == "mi-disc") {
    discretized_structure = true;
  } else {
    kind = parse_score_kind(a.score);
  }
  const SearchAlgorithm search = parse_search_algorithm(a.search);
  if (a.params != "mixed" && a.params != "disc")
    throw InputError("--params must be 'mixed' or 'disc'");
  const bool discrete_params = a.params == "disc";

  const Dataset data = load_data(a.data, a.schema, err);
  const bool need_bins = discretized_structure || discrete_params;
  std::optional<Discretization> disc;
  if (need_bins) {
    disc = equal_frequency_discretize(data, a.bins);
    for (const auto& w : disc->warnings) err << "warning: " << w << '\n';
  }

  SearchOptions opts;
  opts.max_parents = a.max_parents;
  opts.score.min_group_size = a.min_group_size;
  opts.constraint_kinds = (discretized_structure && discrete_params) ? disc->data.kinds()
                                                                      : data.kinds();
  const Dataset& search_data = discretized_structure ? disc->data : data;

  ScoredNetwork net;
  if (search == SearchAlgorithm::HillClimb) {
    net = hill_climb(search_data, kind, std::nullopt, opts);
  } else {
    EvoConfig evo = a.evo.config;
    evo.seed = a.seed;
    net = evolve(search_data, kind, evo, opts);
  }

  NetworkDocument doc;
  FitDiagnostics diag;
  const Dataset& fit_data = discrete_params ? disc->data : data;
  doc.network = fit_parameters(fit_data, net.dag.with_kinds(fit_data.kinds()), {}, &diag);
  if (discrete_params) doc.network.discretization = disc->maps;
  doc.provenance.score = a.score;
  doc.provenance.search = std::string(to_string(search));
  doc.provenance.parameters = a.params;
  doc.provenance.seed = a.seed;

  if (!a.out.empty()) save_network(a.out, doc);
  if (!a.dot.empty()) write_file_atomic(a.dot, to_dot(doc.network.dag));

  std::size_t rejected = 0;
  for (const auto& l : net.local) rejected += l.rejected ? 1 : 0;
  out << "score " << format_double(net.total) << '\n';
  out << "edges " << doc.network.dag.edge_count() << '\n';
  if (rejected) err << "note: " << rejected << " family score(s) rejected as degenerate\n";
  if (diag.ridge_fallbacks)
    err << "note: " << diag.ridge_fallbacks << " regression(s) needed the ridge fallback\n";
  return 0;
}

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  const NetworkDocument doc = load_network(a.model);
  const std::string text = csv_text(forward_sample(doc.network, a.n, a.seed));
  if (a.out.empty())
    out << text;
  else
    write_file_atomic(a.out, text);
  return 0;
}

int cmd_impute(const ImputeArgs& a, std::ostream& out, std::ostream& err) {
  const NetworkDocument doc = load_network(a.model);
  const BayesianNetwork& bn = doc.network;
  const ImputeStrategy strategy = parse_impute_strategy(a.strategy);

  std::ifstream in(a.data);
  if (!in) throw InputError("cannot open '" + a.data + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_record(line);

  // Column position of every network variable.
  std::vector<std::size_t> column(bn.size());
  for (std::size_t v = 0; v < bn.size(); ++v) {
    auto it = std::find(header.begin(), header.end(), bn.schema[v].name);
    if (it == header.end()) throw InputError("data lacks variable '" + bn.schema[v].name + "'");
    column[v] = static_cast<std::size_t>(it - header.begin());
  }
  if (header.size() != bn.size())
    throw InputError("data has columns the network does not know");

  std::ostringstream result;
  result << line << '\n';
  std::size_t imputed = 0, fallbacks = 0, row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_record(line);
    if (fields.size() != header.size())
      throw InputError("malformed CSV: data row " + std::to_string(row_no) + " has " +
                       std::to_string(fields.size()) + " fields");
    PartialRow partial{Row{std::vector<int>(bn.size(), 0), std::vector<double>(bn.size(), 0.0)},
                       std::vector<bool>(bn.size(), false)};
    for (std::size_t v = 0; v < bn.size(); ++v) {
      const std::string& cell = fields[column[v]];
      if (cell == a.na) {
        partial.missing[v] = true;
        continue;
      }
      const Variable& var = bn.schema[v];
      if (const DiscretizationMap* map = bn.binned(v)) {
        const auto x = parse_number(cell);
        if (!x) throw InputError("'" + cell + "' is not a number in column '" + var.name + "'");
        partial.row.codes[v] = map->apply(*x);
      } else if (var.is_discrete()) {
        auto it = std::find(var.labels.begin(), var.labels.end(), cell);
        if (it == var.labels.end())
          throw InputError("'" + cell + "' is not a category of '" + var.name + "'");
        partial.row.codes[v] = static_cast<int>(it - var.labels.begin());
      } else {
        const auto x = parse_number(cell);
        if (!x) throw InputError("'" + cell + "' is not a number in column '" + var.name + "'");
        partial.row.values[v] = *x;
      }
    }
    const ImputeResult res = impute(bn, partial, derive_seed(a.seed, row_no), strategy);
    imputed += res.imputed;
    fallbacks += res.fallbacks;
    for (std::size_t v = 0; v < bn.size(); ++v) {
      if (!partial.missing[v]) continue;
      std::string& cell = fields[column[v]];
      if (const DiscretizationMap* map = bn.binned(v))
        cell = format_double(map->decode(res.row.codes[v]));
      else if (bn.schema[v].is_discrete())
        cell = bn.schema[v].labels[static_cast<std::size_t>(res.row.codes[v])];
      else
        cell = format_double(res.row.values[v]);
    }
    for (std::size_t c = 0; c < fields.size(); ++c)
      result << (c ? "," : "") << quote_csv_field(fields[c]);
    result << '\n';
    ++row_no;
  }
  if (a.out.empty())
    out << result.str();
  else
    write_file_atomic(a.out, result.str());
  // Keep standard output clean when it carries the table itself.
  (a.out.empty() ? err : out) << "imputed " << imputed << " fallbacks " << fallbacks << '\n';
  return 0;
}

GeneratorSpec load_spec(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("spec must be a JSON object");
  GeneratorSpec s;
  try {
    if (j.contains("preset")) {
      const auto p = j.at("preset").get<std::string>();
      if (p == "healthcare") s = GeneratorSpec::healthcare();
      else if (p == "sangiovese") s = GeneratorSpec::sangiovese();
      else if (p == "mehra") s = GeneratorSpec::mehra();
      else throw InputError("unknown preset '" + p + "'");
    }
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    read("name", s.name);
    read("nodes", s.nodes);
    read("discrete", s.discrete);
    read("min_cardinality", s.min_cardinality);
    read("max_cardinality", s.max_cardinality);
    read("edge_density", s.edge_density);
    read("max_parents", s.max_parents);
    read("coef_min", s.coef_min);
    read("coef_max", s.coef_max);
    read("intercept_range", s.intercept_range);
    read("noise_min", s.noise_min);
    read("noise_max", s.noise_max);
    read("rows", s.rows);
    read("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid spec field: ") + e.what());
  }
  s.validate();
  return s;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.spec.empty() == a.data.empty()) throw InputError("give exactly one of --spec or --data");
  if (a.seeds == 0) throw InputError("--seeds must be positive");
  if (a.out_dir.empty()) throw InputError("--out-dir is required");

  std::vector<SearchAlgorithm> searches;
  for (const auto& s : a.search.empty() ? std::vector<std::string>{"hc"} : a.search) {
    const auto alg = parse_search_algorithm(s);
    if (std::find(searches.begin(), searches.end(), alg) == searches.end())
      searches.push_back(alg);
  }

  MatrixOptions opts;
  opts.score = parse_score_kind(a.score);
  opts.bins = a.bins;
  opts.strategy = parse_impute_strategy(a.strategy);
  opts.evo = a.evo.config;
  opts.evo.validate();
  opts.max_parents = a.max_parents;
  opts.score_options.min_group_size = a.min_group_size;

  std::optional<GeneratedNetwork> generated;
  std::uint64_t spec_seed = 0;
  Dataset data;
  if (!a.spec.empty()) {
    const GeneratorSpec spec = load_spec(a.spec);
    spec_seed = spec.seed;
    generated = generate_clg_network(spec);
    data = generated->data;
  } else {
    data = load_data(a.data, a.schema, err);
  }

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  if (generated) {
    NetworkDocument truth;
    truth.network = generated->network;
    truth.provenance.score = "generator";
    truth.provenance.search = "none";
    truth.provenance.parameters = "mixed";
    truth.provenance.seed = spec_seed;
    save_network(dir / "truth.json", truth);
  }

  std::vector<MatrixResult> results;
  for (std::size_t i = 0; i < a.seeds; ++i)
    for (SearchAlgorithm s : searches)
      results.push_back(run_matrix(data, generated ? &generated->network : nullptr, s,
                                   a.seed + i, opts));

  std::ostringstream csv;
  write_results_csv(csv, results);
  write_file_atomic(dir / "results.csv", csv.str());
  write_file_atomic(dir / "summary.json", summary_json(results));
  if (a.timings) {
    std::ostringstream t;
    write_timings_csv(t, results);
    write_file_atomic(dir / "timings.csv", t.str());
  }
  std::set<std::string> seen;
  for (const auto& r : results)
    for (const auto& w : r.warnings)
      if (seen.insert(w).second) err << "warning: " << w << '\n';
  print_reduction_table(out, results);
  return 0;
}

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  const NetworkDocument doc = load_network(a.model);
  const Dataset reference = load_data(a.data, a.schema, err);
  const auto cmp = compare_distributions(doc.network, reference, a.node, a.n, a.seed, a.bins);
  if (!a.out.empty()) {
    std::ostringstream ss;
    write_histogram_csv(ss, cmp);
    write_file_atomic(a.out, ss.str());
  }
  out << (cmp.continuous ? "wasserstein1 " : "total_variation ") << format_double(cmp.distance)
      << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian networks for mixed discrete/continuous data", "mixbn"};
  app.require_subcommand(1);

  LearnArgs learn;
  auto* c_learn = app.add_subcommand("learn", "learn structure and parameters from a CSV");
  c_learn->add_option("--data", learn.data, "input CSV")->required();
  c_learn->add_option("--schema", learn.schema, "name,kind CSV overriding type inference");
  c_learn->add_option("--score", learn.score, "mi-mixed | mi-disc | ll | bic | aic")
      ->capture_default_str();
  c_learn->add_option("--search", learn.search, "hc | evo")->capture_default_str();
  c_learn->add_option("--params", learn.params, "mixed | disc")->capture_default_str();
  c_learn->add_option("--bins", learn.bins, "equal-frequency bins for discretization")
      ->capture_default_str();
  c_learn->add_option("--max-parents", learn.max_parents, "parent-set size cap");
  c_learn->add_option("--seed", learn.seed, "random seed")->capture_default_str();
  c_learn->add_option("--out", learn.out, "network JSON to write");
  c_learn->add_option("--dot", learn.dot, "Graphviz file to write");
  c_learn->add_option("--min-group-size", learn.min_group_size,
                      "smallest discrete-parent group a Gaussian block may use")
      ->capture_default_str();
  learn.evo.attach(c_learn);

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "forward-sample rows from a network");
  c_sample->add_option("--model", sample.model, "network JSON")->required();
  c_sample->add_option("--n", sample.n, "number of rows")->required();
  c_sample->add_option("--seed", sample.seed, "random seed")->capture_default_str();
  c_sample->add_option("--out", sample.out, "CSV to write (default: standard output)");

  ImputeArgs impute_args;
  auto* c_impute = app.add_subcommand("impute", "fill missing cells of a CSV");
  c_impute->add_option("--model", impute_args.model, "network JSON")->required();
  c_impute->add_option("--data", impute_args.data, "CSV with missing cells")->required();
  c_impute->add_option("--strategy", impute_args.strategy, "sample | mode")
      ->capture_default_str();
  c_impute->add_option("--seed", impute_args.seed, "random seed")->capture_default_str();
  c_impute->add_option("--out", impute_args.out, "CSV to write (default: standard output)");
  c_impute->add_option("--na", impute_args.na, "missing-value token (default: empty field)");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "run the structure x parameter matrix");
  c_bench->add_option("--spec", bench.spec, "generator spec JSON");
  c_bench->add_option("--data", bench.data, "real data CSV");
  c_bench->add_option("--schema", bench.schema, "name,kind CSV for --data");
  c_bench->add_option("--search", bench.search, "hc | evo (repeatable)");
  c_bench->add_option("--seeds", bench.seeds, "number of seeds")->capture_default_str();
  c_bench->add_option("--seed", bench.seed, "first seed")->capture_default_str();
  c_bench->add_option("--out-dir", bench.out_dir, "output directory")->required();
  c_bench->add_option("--strategy", bench.strategy, "sample | mode")->capture_default_str();
  c_bench->add_option("--score", bench.score, "mi | ll | bic | aic")->capture_default_str();
  c_bench->add_option("--bins", bench.bins, "equal-frequency bins")->capture_default_str();
  c_bench->add_option("--max-parents", bench.max_parents, "parent-set size cap");
  c_bench->add_option("--min-group-size", bench.min_group_size, "smallest Gaussian group")
      ->capture_default_str();
  c_bench->add_flag("--timings", bench.timings, "also write timings.csv");
  bench.evo.attach(c_bench);

  CompareArgs compare;
  auto* c_compare = app.add_subcommand("compare", "compare sampled and reference marginals");
  c_compare->add_option("--model", compare.model, "network JSON")->required();
  c_compare->add_option("--data", compare.data, "reference CSV")->required();
  c_compare->add_option("--schema", compare.schema, "name,kind CSV for --data");
  c_compare->add_option("--node", compare.node, "variable name")->required();
  c_compare->add_option("--n", compare.n, "number of samples")->capture_default_str();
  c_compare->add_option("--seed", compare.seed, "random seed")->capture_default_str();
  c_compare->add_option("--bins", compare.bins, "histogram bins")->capture_default_str();
  c_compare->add_option("--out", compare.out, "histogram CSV to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_learn) return cmd_learn(learn, out, err);
    if (*c_sample) return cmd_sample(sample, out);
    if (*c_impute) return cmd_impute(impute_args, out, err);
    if (*c_bench) return cmd_bench(bench, out, err);
    if (*c_compare) return cmd_compare(compare, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace mixbn::cli
