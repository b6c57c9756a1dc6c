#include "mixbn/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mixbn/error.hpp"

namespace mixbn {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFormat = "mixbn-network";

std::vector<std::string> names_of(const Schema& schema, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (std::size_t i : idx) out.push_back(schema[i].name);
  return out;
}

ordered_json regression_json(const LinearGaussian& lg) {
  ordered_json j;
  j["intercept"] = lg.intercept;
  j["coefficients"] = lg.coefficients;
  j["variance"] = lg.variance;
  return j;
}

ordered_json model_json(const BayesianNetwork& bn, std::size_t v) {
  const NodeModel& m = bn.models[v];
  ordered_json j;
  j["name"] = bn.schema[v].name;
  j["type"] = model_type_name(m.distribution);
  j["discrete_parents"] = names_of(bn.schema, m.discrete_parents);
  j["continuous_parents"] = names_of(bn.schema, m.continuous_parents);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Cpt>) {
          ordered_json rows = ordered_json::array();
          for (const auto& [cfg, probs] : d.rows)
            rows.push_back(ordered_json{{"config", cfg}, {"probabilities", probs}});
          j["rows"] = std::move(rows);
          j["fallback"] = d.fallback;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          j["mean"] = d.mean;
          j["variance"] = d.variance;
        } else if constexpr (std::is_same_v<T, LinearGaussian>) {
          j.update(regression_json(d));
        } else {
          ordered_json rows = ordered_json::array();
          for (const auto& [cfg, lg] : d.by_config) {
            ordered_json r{{"config", cfg}};
            r.update(regression_json(lg));
            rows.push_back(std::move(r));
          }
          j["configurations"] = std::move(rows);
          j["fallback"] = regression_json(d.fallback);
        }
      },
      m.distribution);
  return j;
}

// Accessors that turn nlohmann's type errors into InputError with context.
const ordered_json& field(const ordered_json& j, const char* key, std::string_view where) {
  if (!j.is_object() || !j.contains(key))
    throw InputError(std::string(where) + ": missing field '" + key + "'");
  return j.at(key);
}

template <typename T>
T get(const ordered_json& j, const char* key, std::string_view where) {
  try {
    return field(j, key, where).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

LinearGaussian regression_from(const ordered_json& j, std::string_view where) {
  LinearGaussian lg;
  lg.intercept = get<double>(j, "intercept", where);
  lg.coefficients = get<std::vector<double>>(j, "coefficients", where);
  lg.variance = get<double>(j, "variance", where);
  return lg;
}

std::vector<std::size_t> indices_of(const Dag& dag, const std::vector<std::string>& names,
                                    std::string_view where) {
  std::vector<std::size_t> out;
  for (const auto& n : names) {
    const auto v = dag.find(n);
    if (!v) throw InputError(std::string(where) + ": unknown parent '" + n + "'");
    out.push_back(*v);
  }
  return out;
}

NodeModel model_from(const ordered_json& j, const Dag& dag, std::string_view where) {
  NodeModel m;
  m.discrete_parents =
      indices_of(dag, get<std::vector<std::string>>(j, "discrete_parents", where), where);
  m.continuous_parents =
      indices_of(dag, get<std::vector<std::string>>(j, "continuous_parents", where), where);
  const auto type = get<std::string>(j, "type", where);
  if (type == "cpt") {
    Cpt cpt;
    for (const auto& r : field(j, "rows", where))
      cpt.rows.emplace(get<Config>(r, "config", where),
                       get<std::vector<double>>(r, "probabilities", where));
    cpt.fallback = get<std::vector<double>>(j, "fallback", where);
    cpt.cardinality = cpt.fallback.size();
    m.distribution = std::move(cpt);
  } else if (type == "gaussian") {
    m.distribution = Gaussian{get<double>(j, "mean", where), get<double>(j, "variance", where)};
  } else if (type == "linear_gaussian") {
    m.distribution = regression_from(j, where);
  } else if (type == "conditional_linear_gaussian") {
    ConditionalLinearGaussian clg;
    for (const auto& r : field(j, "configurations", where))
      clg.by_config.emplace(get<Config>(r, "config", where), regression_from(r, where));
    clg.fallback = regression_from(field(j, "fallback", where), where);
    m.distribution = std::move(clg);
  } else {
    throw InputError(std::string(where) + ": unknown model type '" + type + "'");
  }
  return m;
}

}  // namespace

std::string serialize_network(const NetworkDocument& doc) {
  const BayesianNetwork& bn = doc.network;
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kDocumentVersion;

  ordered_json vars = ordered_json::array();
  for (const auto& v : bn.schema) {
    ordered_json e{{"name", v.name}, {"kind", to_string(v.kind)}};
    if (v.is_discrete()) e["labels"] = v.labels;
    vars.push_back(std::move(e));
  }
  j["variables"] = std::move(vars);

  ordered_json edges = ordered_json::array();
  for (const auto& [from, to] : bn.dag.edges())
    edges.push_back(ordered_json::array({bn.dag.name(from), bn.dag.name(to)}));
  j["edges"] = std::move(edges);
  j["variance_floor"] = bn.variance_floor;

  ordered_json nodes = ordered_json::array();
  for (std::size_t v = 0; v < bn.size(); ++v) nodes.push_back(model_json(bn, v));
  j["nodes"] = std::move(nodes);

  ordered_json maps = ordered_json::array();
  for (const auto& m : bn.discretization)
    maps.push_back(ordered_json{
        {"column", m.column}, {"cut_points", m.cut_points}, {"bin_means", m.bin_means}});
  j["discretization"] = std::move(maps);

  const Provenance& p = doc.provenance;
  j["provenance"] = ordered_json{{"score", p.score},
                                 {"search", p.search},
                                 {"parameters", p.parameters},
                                 {"seed", p.seed},
                                 {"library_version", p.library_version}};
  return j.dump(2) + "\n";
}

NetworkDocument parse_network(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("network document is not valid JSON: ") + e.what());
  }
  const std::string_view top = "network document";
  if (get<std::string>(j, "format", top) != kFormat)
    throw InputError("network document: unexpected format tag");
  const int version = get<int>(j, "version", top);
  if (version != kDocumentVersion)
    throw InputError("network document: unsupported version " + std::to_string(version));

  NetworkDocument doc;
  BayesianNetwork& bn = doc.network;
  std::vector<std::string> names;
  std::vector<VariableKind> kinds;
  for (const auto& e : field(j, "variables", top)) {
    Variable v;
    v.name = get<std::string>(e, "name", "variable");
    v.kind = parse_variable_kind(get<std::string>(e, "kind", v.name));
    if (v.is_discrete()) v.labels = get<std::vector<std::string>>(e, "labels", v.name);
    names.push_back(v.name);
    kinds.push_back(v.kind);
    bn.schema.push_back(std::move(v));
  }
  try {
    bn.dag = Dag(names, kinds);
    for (const auto& e : field(j, "edges", top)) {
      const auto pair = e.get<std::vector<std::string>>();
      if (pair.size() != 2) throw InputError("network document: edges must be [parent, child]");
      const auto from = bn.dag.find(pair[0]);
      const auto to = bn.dag.find(pair[1]);
      if (!from || !to)
        throw InputError("network document: edge names unknown variable");
      if (bn.dag.has_edge(*from, *to)) throw InputError("network document: duplicate edge");
      auto parents = bn.dag.parents(*to);
      parents.push_back(*from);
      bn.dag.set_parents_unchecked(*to, std::move(parents));
    }
    bn.variance_floor = get<double>(j, "variance_floor", top);

    const auto& nodes = field(j, "nodes", top);
    if (!nodes.is_array() || nodes.size() != bn.size())
      throw InputError("network document: need one node model per variable");
    for (std::size_t v = 0; v < bn.size(); ++v) {
      if (get<std::string>(nodes[v], "name", "node") != bn.schema[v].name)
        throw InputError("network document: node models out of variable order");
      bn.models.push_back(model_from(nodes[v], bn.dag, bn.schema[v].name));
    }
    for (const auto& m : field(j, "discretization", top)) {
      DiscretizationMap map;
      map.column = get<std::string>(m, "column", "discretization");
      map.cut_points = get<std::vector<double>>(m, "cut_points", map.column);
      map.bin_means = get<std::vector<double>>(m, "bin_means", map.column);
      bn.discretization.push_back(std::move(map));
    }
    const auto& p = field(j, "provenance", top);
    doc.provenance.score = get<std::string>(p, "score", "provenance");
    doc.provenance.search = get<std::string>(p, "search", "provenance");
    doc.provenance.parameters = get<std::string>(p, "parameters", "provenance");
    doc.provenance.seed = get<std::uint64_t>(p, "seed", "provenance");
    doc.provenance.library_version = get<std::string>(p, "library_version", "provenance");

    bn.validate();
  } catch (const std::logic_error& e) {
    throw InputError(std::string("invalid network document: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid network document: ") + e.what());
  }
  return doc;
}

NetworkDocument load_network(const std::filesystem::path& path) {
  return parse_network(read_file(path));
}

void save_network(const std::filesystem::path& path, const NetworkDocument& doc) {
  write_file_atomic(path, serialize_network(doc));
}

void write_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t c = 0; c < data.n_cols(); ++c)
    out << (c ? "," : "") << quote_csv_field(data.variable(c).name);
  out << '\n';
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    for (std::size_t c = 0; c < data.n_cols(); ++c)
      out << (c ? "," : "") << quote_csv_field(data.cell_text(c, r));
    out << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("cannot replace '" + path.string() + "': " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mixbn
