#include "mixbn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mixbn/error.hpp"

namespace mixbn {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Generator

void GeneratorSpec::validate() const {
  if (nodes == 0) throw InputError("generator: need at least one node");
  if (discrete > nodes) throw InputError("generator: more discrete nodes than nodes");
  if (discrete > 0 && (min_cardinality < 2 || max_cardinality < min_cardinality))
    throw InputError("generator: cardinality range must satisfy 2 <= min <= max");
  if (!(edge_density >= 0.0 && edge_density <= 1.0))
    throw InputError("generator: edge density must lie in [0, 1]");
  if (!(coef_min >= 0.0 && coef_max >= coef_min))
    throw InputError("generator: coefficient range must satisfy 0 <= min <= max");
  if (!(noise_min > 0.0 && noise_max >= noise_min))
    throw InputError("generator: noise variance range must satisfy 0 < min <= max");
  if (!(intercept_range >= 0.0)) throw InputError("generator: intercept range must be >= 0");
  if (rows == 0) throw InputError("generator: rows must be positive");
}

GeneratorSpec GeneratorSpec::healthcare() {
  GeneratorSpec s;
  s.name = "healthcare";
  s.nodes = 7;
  s.discrete = 3;
  return s;
}

GeneratorSpec GeneratorSpec::sangiovese() {
  GeneratorSpec s;
  s.name = "sangiovese";
  s.nodes = 15;
  s.discrete = 1;
  s.edge_density = 0.2;
  return s;
}

GeneratorSpec GeneratorSpec::mehra() {
  GeneratorSpec s;
  s.name = "mehra";
  s.nodes = 24;
  s.discrete = 8;
  s.edge_density = 0.12;
  return s;
}

GeneratedNetwork generate_clg_network(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(derive_seed(spec.seed, 0x6e6574));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  // Discrete variables first by name, but positions in the causal order are random.
  Schema schema;
  std::vector<VariableKind> kinds;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    Variable var;
    if (i < spec.discrete) {
      var.name = "D" + std::to_string(i + 1);
      var.kind = VariableKind::Discrete;
      std::uniform_int_distribution<std::size_t> card(spec.min_cardinality, spec.max_cardinality);
      const std::size_t k = card(rng);
      for (std::size_t c = 0; c < k; ++c) var.labels.push_back("s" + std::to_string(c));
    } else {
      var.name = "C" + std::to_string(i + 1 - spec.discrete);
      var.kind = VariableKind::Continuous;
    }
    kinds.push_back(var.kind);
    schema.push_back(std::move(var));
  }
  std::vector<std::string> names;
  for (const auto& v : schema) names.push_back(v.name);

  Dag dag(names, kinds);
  std::vector<std::size_t> order(spec.nodes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t j = 1; j < order.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) {
      const std::size_t from = order[i];
      const std::size_t to = order[j];
      if (!dag.kind_allows(from, to)) continue;
      if (dag.parents(to).size() >= spec.max_parents) continue;
      if (unit(rng) < spec.edge_density) dag.add_edge(from, to);
    }

  BayesianNetwork bn;
  bn.schema = schema;
  bn.dag = dag;
  bn.variance_floor = 1e-12;
  for (std::size_t v = 0; v < spec.nodes; ++v) {
    NodeModel model;
    for (std::size_t p : dag.parents(v))
      (schema[p].is_discrete() ? model.discrete_parents : model.continuous_parents).push_back(p);

    // Every configuration of the discrete parents, in lexicographic order.
    std::vector<Config> configs{Config{}};
    for (std::size_t p : model.discrete_parents) {
      std::vector<Config> next;
      for (const auto& c : configs)
        for (std::size_t k = 0; k < schema[p].cardinality(); ++k) {
          Config e = c;
          e.push_back(static_cast<int>(k));
          next.push_back(std::move(e));
        }
      configs = std::move(next);
    }

    auto random_regression = [&] {
      LinearGaussian lg;
      lg.intercept = uniform(-spec.intercept_range, spec.intercept_range);
      for (std::size_t j = 0; j < model.continuous_parents.size(); ++j) {
        const double mag = uniform(spec.coef_min, spec.coef_max);
        lg.coefficients.push_back(unit(rng) < 0.5 ? -mag : mag);
      }
      lg.variance = uniform(spec.noise_min, spec.noise_max);
      return lg;
    };

    if (schema[v].is_discrete()) {
      Cpt cpt;
      cpt.cardinality = schema[v].cardinality();
      std::exponential_distribution<double> gamma1(1.0);
      std::vector<double> total(cpt.cardinality, 0.0);
      for (const auto& c : configs) {
        std::vector<double> row(cpt.cardinality);
        double sum = 0.0;
        for (auto& x : row) sum += (x = gamma1(rng));
        for (std::size_t k = 0; k < row.size(); ++k) {
          row[k] /= sum;
          total[k] += row[k] / static_cast<double>(configs.size());
        }
        cpt.rows.emplace(c, std::move(row));
      }
      const double t = std::accumulate(total.begin(), total.end(), 0.0);
      for (auto& x : total) x /= t;
      cpt.fallback = std::move(total);
      model.distribution = std::move(cpt);
    } else if (model.discrete_parents.empty() && model.continuous_parents.empty()) {
      const LinearGaussian lg = random_regression();
      model.distribution = Gaussian{lg.intercept, lg.variance};
    } else if (model.discrete_parents.empty()) {
      model.distribution = random_regression();
    } else {
      ConditionalLinearGaussian clg;
      for (const auto& c : configs) clg.by_config.emplace(c, random_regression());
      clg.fallback = clg.by_config.begin()->second;
      model.distribution = std::move(clg);
    }
    bn.models.push_back(std::move(model));
  }
  bn.validate();
  Dataset data = forward_sample(bn, spec.rows, derive_seed(spec.seed, 0x73616d));
  return {std::move(bn), std::move(data)};
}

// ---------------------------------------------------------------------------
// Structure metrics

namespace {

void check_same_variables(const Dag& a, const Dag& b) {
  if (a.names() != b.names())
    throw std::invalid_argument("graph comparison needs identical variable lists");
}

}  // namespace

std::size_t structural_hamming_distance(const Dag& truth, const Dag& learned) {
  check_same_variables(truth, learned);
  std::size_t shd = 0;
  for (std::size_t u = 0; u < truth.size(); ++u)
    for (std::size_t v = u + 1; v < truth.size(); ++v) {
      const bool t_uv = truth.has_edge(u, v), t_vu = truth.has_edge(v, u);
      const bool l_uv = learned.has_edge(u, v), l_vu = learned.has_edge(v, u);
      if (t_uv != l_uv || t_vu != l_vu) ++shd;
    }
  return shd;
}

SkeletonScore skeleton_f1(const Dag& truth, const Dag& learned) {
  check_same_variables(truth, learned);
  std::size_t tp = 0, n_truth = 0, n_learned = 0;
  for (std::size_t u = 0; u < truth.size(); ++u)
    for (std::size_t v = u + 1; v < truth.size(); ++v) {
      const bool t = truth.has_edge(u, v) || truth.has_edge(v, u);
      const bool l = learned.has_edge(u, v) || learned.has_edge(v, u);
      n_truth += t;
      n_learned += l;
      tp += t && l;
    }
  SkeletonScore s;
  if (n_truth == 0 && n_learned == 0) return {1.0, 1.0, 1.0};
  s.precision = n_learned ? static_cast<double>(tp) / static_cast<double>(n_learned) : 0.0;
  s.recall = n_truth ? static_cast<double>(tp) / static_cast<double>(n_truth) : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// Matrix

std::string_view to_string(SearchAlgorithm a) {
  return a == SearchAlgorithm::HillClimb ? "hc" : "evo";
}

SearchAlgorithm parse_search_algorithm(std::string_view text) {
  if (text == "hc") return SearchAlgorithm::HillClimb;
  if (text == "evo") return SearchAlgorithm::Evolutionary;
  throw InputError("unknown search algorithm '" + std::string(text) + "'");
}

std::string CellResult::label() const {
  return std::string(mixed_structure ? "M" : "D") + "+" + (mixed_parameters ? "M" : "D");
}

const CellResult& MatrixResult::cell(bool mixed_structure, bool mixed_parameters) const {
  for (const auto& c : cells)
    if (c.mixed_structure == mixed_structure && c.mixed_parameters == mixed_parameters) return c;
  throw std::out_of_range("matrix cell not present");
}

double MatrixResult::error_reduction(const CellResult& c, std::string_view variable) const {
  const double base = baseline().report.at(variable).value;
  const double mine = c.report.at(variable).value;
  return base > 0.0 ? 100.0 * (base - mine) / base : 0.0;
}

MatrixResult run_matrix(const Dataset& data, const BayesianNetwork* ground_truth,
                        SearchAlgorithm search, std::uint64_t seed, const MatrixOptions& options) {
  MatrixResult result;
  result.search = search;
  result.seed = seed;
  if (!data.has_continuous())
    result.warnings.push_back("no continuous variables: all four cells coincide");
  if (!data.has_discrete())
    result.warnings.push_back("no discrete variables: the matrix is degenerate (mixed = continuous)");

  auto [train, test] = train_test_split(data, options.test_fraction, seed);
  result.train_rows = train.n_rows();
  result.test_rows = test.n_rows();
  Discretization disc = equal_frequency_discretize(train, options.bins);
  for (auto& w : disc.warnings) result.warnings.push_back(std::move(w));

  struct Learned {
    ScoredNetwork network;
    double seconds = 0.0;
  };
  auto learn = [&](const Dataset& d, const std::vector<VariableKind>& constraint) {
    SearchOptions opts;
    opts.max_parents = options.max_parents;
    opts.constraint_kinds = constraint;
    opts.score = options.score_options;
    const auto t0 = std::chrono::steady_clock::now();
    Learned out;
    if (search == SearchAlgorithm::HillClimb) {
      out.network = hill_climb(d, options.score, std::nullopt, opts);
    } else {
      EvoConfig evo = options.evo;
      evo.seed = derive_seed(seed, options.evo.seed, 0x65766f);
      out.network = evolve(d, options.score, evo, opts);
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  };

  const Learned d_free = learn(disc.data, disc.data.kinds());
  const Learned d_mixed = learn(disc.data, train.kinds());
  const Learned m = learn(train, train.kinds());

  const std::uint64_t eval_seed = derive_seed(seed, 0x726573);
  auto make_cell = [&](bool ms, bool mp, const Learned& learned) {
    CellResult cell;
    cell.mixed_structure = ms;
    cell.mixed_parameters = mp;
    cell.structure_seconds = learned.seconds;
    cell.structure_score = learned.network.total;
    if (mp) {
      cell.network = fit_parameters(train, learned.network.dag.with_kinds(train.kinds()));
    } else {
      cell.network = fit_parameters(disc.data, learned.network.dag.with_kinds(disc.data.kinds()));
      cell.network.discretization = disc.maps;
    }
    cell.report = evaluate_restoration(cell.network, test, eval_seed, options.strategy);
    if (ground_truth) {
      cell.shd = structural_hamming_distance(ground_truth->dag, learned.network.dag);
      cell.skeleton_f1 = skeleton_f1(ground_truth->dag, learned.network.dag).f1;
    }
    return cell;
  };
  result.cells.push_back(make_cell(false, false, d_free));
  result.cells.push_back(make_cell(false, true, d_mixed));
  result.cells.push_back(make_cell(true, false, m));
  result.cells.push_back(make_cell(true, true, m));
  return result;
}

// ---------------------------------------------------------------------------
// Distribution comparison

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InputError("wasserstein1: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(a.front(), b.front());
  double dist = 0.0;
  while (i < a.size() || j < b.size()) {
    const double next = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    const double fa = static_cast<double>(i) / na;
    const double fb = static_cast<double>(j) / nb;
    dist += std::abs(fa - fb) * (next - prev);
    prev = next;
    while (i < a.size() && a[i] == next) ++i;
    while (j < b.size() && b[j] == next) ++j;
  }
  return dist;
}

DistributionComparison compare_distributions(const BayesianNetwork& bn, const Dataset& reference,
                                             std::string_view node, std::size_t n_samples,
                                             std::uint64_t seed, std::size_t bins) {
  if (reference.n_rows() == 0) throw InputError("compare_distributions: empty reference");
  const auto v = bn.dag.find(node);
  if (!v) throw InputError("network has no node '" + std::string(node) + "'");
  const std::size_t ref_col = reference.index_of(node);
  if (n_samples == 0) throw InputError("compare_distributions: need at least one sample");
  if (bins == 0) bins = 1;

  const Dataset sample = forward_sample(bn, n_samples, seed);
  DistributionComparison out;
  out.node = std::string(node);

  if (!reference.variable(ref_col).is_discrete()) {
    out.continuous = true;
    auto ref = reference.values(ref_col);
    std::vector<double> a(ref.begin(), ref.end());
    std::vector<double> b;
    b.reserve(n_samples);
    if (const DiscretizationMap* map = bn.binned(*v)) {
      for (int code : sample.codes(*v)) b.push_back(map->decode(code));
    } else if (!bn.schema[*v].is_discrete()) {
      auto s = sample.values(*v);
      b.assign(s.begin(), s.end());
    } else {
      throw InputError("node '" + out.node + "' is discrete in the network");
    }
    const double lo = std::min(*std::min_element(a.begin(), a.end()),
                               *std::min_element(b.begin(), b.end()));
    double hi = std::max(*std::max_element(a.begin(), a.end()),
                         *std::max_element(b.begin(), b.end()));
    if (hi <= lo) hi = lo + 1.0;
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) out.edges.push_back(lo + width * static_cast<double>(i));
    auto histogram = [&](const std::vector<double>& xs) {
      std::vector<double> h(bins, 0.0);
      for (double x : xs) {
        auto k = static_cast<std::size_t>((x - lo) / width);
        h[std::min(k, bins - 1)] += 1.0 / static_cast<double>(xs.size());
      }
      return h;
    };
    out.reference = histogram(a);
    out.sampled = histogram(b);
    out.distance = wasserstein1(std::move(a), std::move(b));
    return out;
  }

  if (!bn.schema[*v].is_discrete())
    throw InputError("node '" + out.node + "' is continuous in the network");
  const Variable& var = bn.schema[*v];
  out.categories = var.labels;
  out.reference.assign(var.cardinality(), 0.0);
  out.sampled.assign(var.cardinality(), 0.0);
  const Variable& ref_var = reference.variable(ref_col);
  for (int code : reference.codes(ref_col)) {
    const auto& label = ref_var.labels[static_cast<std::size_t>(code)];
    auto it = std::find(var.labels.begin(), var.labels.end(), label);
    if (it == var.labels.end())
      throw InputError("reference category '" + label + "' unknown to the network");
    out.reference[static_cast<std::size_t>(it - var.labels.begin())] +=
        1.0 / static_cast<double>(reference.n_rows());
  }
  for (int code : sample.codes(*v))
    out.sampled[static_cast<std::size_t>(code)] += 1.0 / static_cast<double>(n_samples);
  double tv = 0.0;
  for (std::size_t k = 0; k < out.reference.size(); ++k)
    tv += std::abs(out.reference[k] - out.sampled[k]);
  out.distance = 0.5 * tv;
  return out;
}

// ---------------------------------------------------------------------------
// Reporting

namespace {

std::string metric_name(RestorationMetric m) {
  return m == RestorationMetric::Rmse ? "rmse" : "accuracy";
}

struct Aggregate {
  std::vector<double> values;
  RestorationMetric metric = RestorationMetric::Rmse;

  double mean() const {
    return values.empty() ? 0.0
                          : std::accumulate(values.begin(), values.end(), 0.0) /
                                static_cast<double>(values.size());
  }
  double sd() const {
    if (values.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(values.size() - 1));
  }
};

// search -> cell label -> variable -> aggregate
using AggregateTable =
    std::map<std::string, std::map<std::string, std::map<std::string, Aggregate>>>;

AggregateTable aggregate(const std::vector<MatrixResult>& results) {
  AggregateTable t;
  for (const auto& r : results)
    for (const auto& c : r.cells)
      for (const auto& v : c.report.variables) {
        auto& a = t[std::string(to_string(r.search))][c.label()][v.name];
        a.metric = v.metric;
        a.values.push_back(v.value);
      }
  return t;
}

std::vector<std::string> variable_order(const std::vector<MatrixResult>& results) {
  std::vector<std::string> names;
  if (results.empty() || results.front().cells.empty()) return names;
  for (const auto& v : results.front().cells.front().report.variables) names.push_back(v.name);
  return names;
}

const char* kCells[] = {"D+D", "D+M", "M+D", "M+M"};

double reduction(double base, double mine) {
  return base > 0.0 ? 100.0 * (base - mine) / base : 0.0;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<MatrixResult>& results) {
  out << "seed,search,cell,variable,metric,value,error_reduction_pct,shd,skeleton_f1\n";
  for (const auto& r : results)
    for (const auto& c : r.cells)
      for (const auto& v : c.report.variables) {
        out << r.seed << ',' << to_string(r.search) << ',' << c.label() << ','
            << quote_csv_field(v.name) << ',' << metric_name(v.metric) << ','
            << format_double(v.value) << ',';
        if (v.metric == RestorationMetric::Rmse) out << format_double(r.error_reduction(c, v.name));
        out << ',';
        if (c.shd) out << *c.shd;
        out << ',';
        if (c.skeleton_f1) out << format_double(*c.skeleton_f1);
        out << '\n';
      }
}

void write_timings_csv(std::ostream& out, const std::vector<MatrixResult>& results) {
  out << "seed,search,cell,structure_seconds\n";
  for (const auto& r : results)
    for (const auto& c : r.cells)
      out << r.seed << ',' << to_string(r.search) << ',' << c.label() << ','
          << format_double(c.structure_seconds) << '\n';
}

std::string summary_json(const std::vector<MatrixResult>& results) {
  const AggregateTable table = aggregate(results);
  const auto names = variable_order(results);
  ordered_json doc;
  doc["runs"] = results.size();
  ordered_json searches = ordered_json::object();
  for (const auto& [search, cells] : table) {
    ordered_json s = ordered_json::object();
    const auto base_it = cells.find("D+D");
    for (const char* label : kCells) {
      auto it = cells.find(label);
      if (it == cells.end()) continue;
      ordered_json vars = ordered_json::array();
      for (const auto& name : names) {
        const Aggregate& a = it->second.at(name);
        ordered_json e;
        e["variable"] = name;
        e["metric"] = metric_name(a.metric);
        e["mean"] = a.mean();
        e["sd"] = a.sd();
        if (a.metric == RestorationMetric::Rmse && base_it != cells.end())
          e["error_reduction_pct"] = reduction(base_it->second.at(name).mean(), a.mean());
        vars.push_back(std::move(e));
      }
      s[label] = std::move(vars);
    }
    searches[search] = std::move(s);
  }
  doc["searches"] = std::move(searches);

  if (table.count("hc") && table.count("evo")) {
    ordered_json diff = ordered_json::object();
    for (const char* label : kCells) {
      ordered_json vars = ordered_json::array();
      for (const auto& name : names) {
        const Aggregate& h = table.at("hc").at(label).at(name);
        const Aggregate& e = table.at("evo").at(label).at(name);
        if (h.metric != RestorationMetric::Rmse) continue;
        ordered_json d;
        d["variable"] = name;
        d["hc_minus_evo_pct"] = e.mean() > 0 ? 100.0 * (e.mean() - h.mean()) / e.mean() : 0.0;
        vars.push_back(std::move(d));
      }
      diff[label] = std::move(vars);
    }
    doc["hc_minus_evo"] = std::move(diff);
  }

  ordered_json warnings = ordered_json::array();
  std::set<std::string> seen;
  for (const auto& r : results)
    for (const auto& w : r.warnings)
      if (seen.insert(w).second) warnings.push_back(w);
  doc["warnings"] = std::move(warnings);
  return doc.dump(2) + "\n";
}

void print_reduction_table(std::ostream& out, const std::vector<MatrixResult>& results) {
  const AggregateTable table = aggregate(results);
  const auto names = variable_order(results);
  const bool both = table.count("hc") && table.count("evo");

  out << "Error reduction vs D+D (%), continuous variables, mean over runs\n";
  out << std::left << std::setw(14) << "variable";
  for (const auto& [search, cells] : table)
    for (const char* label : {"D+M", "M+D", "M+M"})
      out << std::right << std::setw(12) << (search + ":" + label);
  if (both) out << std::right << std::setw(16) << "M+M hc-evo";
  out << '\n';
  for (const auto& name : names) {
    const auto& any = table.begin()->second.at("D+D").at(name);
    if (any.metric != RestorationMetric::Rmse) continue;
    out << std::left << std::setw(14) << name;
    for (const auto& [search, cells] : table) {
      const double base = cells.at("D+D").at(name).mean();
      for (const char* label : {"D+M", "M+D", "M+M"})
        out << std::right << std::setw(12) << fixed(reduction(base, cells.at(label).at(name).mean()), 2);
    }
    if (both) {
      const double h = table.at("hc").at("M+M").at(name).mean();
      const double e = table.at("evo").at("M+M").at(name).mean();
      out << std::right << std::setw(16) << fixed(e > 0 ? 100.0 * (e - h) / e : 0.0, 2);
    }
    out << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const DistributionComparison& cmp) {
  if (cmp.continuous) {
    out << "bin_low,bin_high,reference,sampled\n";
    for (std::size_t i = 0; i < cmp.reference.size(); ++i)
      out << format_double(cmp.edges[i]) << ',' << format_double(cmp.edges[i + 1]) << ','
          << format_double(cmp.reference[i]) << ',' << format_double(cmp.sampled[i]) << '\n';
  } else {
    out << "category,reference,sampled\n";
    for (std::size_t i = 0; i < cmp.reference.size(); ++i)
      out << quote_csv_field(cmp.categories[i]) << ',' << format_double(cmp.reference[i]) << ','
          << format_double(cmp.sampled[i]) << '\n';
  }
}

}  // namespace mixbn
