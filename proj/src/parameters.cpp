#include "mixbn/parameters.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mixbn/error.hpp"

namespace mixbn {

namespace {

struct ParentSplit {
  std::vector<std::size_t> discrete;
  std::vector<std::size_t> continuous;
};

ParentSplit split_parents(const Schema& schema, const std::vector<std::size_t>& parents) {
  ParentSplit s;
  for (std::size_t p : parents) (schema.at(p).is_discrete() ? s.discrete : s.continuous).push_back(p);
  return s;
}

Config config_at(const std::vector<std::size_t>& discrete_parents, const Row& row) {
  Config c;
  c.reserve(discrete_parents.size());
  for (std::size_t p : discrete_parents) c.push_back(row.codes.at(p));
  return c;
}

std::vector<double> normalized_counts(const std::vector<double>& counts, double alpha) {
  double total = 0.0;
  for (double c : counts) total += c + alpha;
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = (counts[i] + alpha) / total;
  return p;
}

LinearGaussian fit_rows(const Dataset& data, std::size_t node,
                        const std::vector<std::size_t>& continuous_parents,
                        const std::vector<std::size_t>& rows, double floor, bool* ridge) {
  auto y_all = data.values(node);
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t r : rows) y.push_back(y_all[r]);
  std::vector<std::vector<double>> x(continuous_parents.size());
  for (std::size_t j = 0; j < continuous_parents.size(); ++j) {
    auto col = data.values(continuous_parents[j]);
    x[j].reserve(rows.size());
    for (std::size_t r : rows) x[j].push_back(col[r]);
  }
  return fit_linear_gaussian(x, y, floor, ridge);
}

void check_row(const std::vector<double>& row, std::size_t k, const std::string& where) {
  if (row.size() != k) throw std::logic_error(where + ": probability row has wrong length");
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::logic_error(where + ": probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::logic_error(where + ": probabilities do not sum to 1");
}

void check_lg(const LinearGaussian& lg, std::size_t n_coef, const std::string& where) {
  if (lg.coefficients.size() != n_coef)
    throw std::logic_error(where + ": coefficient count does not match continuous parents");
  if (!std::isfinite(lg.intercept) || !(lg.variance > 0.0) || !std::isfinite(lg.variance))
    throw std::logic_error(where + ": invalid regression parameters");
  for (double c : lg.coefficients)
    if (!std::isfinite(c)) throw std::logic_error(where + ": non-finite coefficient");
}

}  // namespace

double LinearGaussian::mean_given(std::span<const double> parents) const {
  double m = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) m += coefficients[j] * parents[j];
  return m;
}

std::string_view model_type_name(const Distribution& d) {
  switch (d.index()) {
    case 0: return "cpt";
    case 1: return "gaussian";
    case 2: return "linear_gaussian";
    default: return "conditional_linear_gaussian";
  }
}

Conditional conditional_at(const NodeModel& model, const Row& row) {
  Conditional c;
  auto regression = [&](const LinearGaussian& lg) {
    c.mean = lg.intercept;
    for (std::size_t j = 0; j < model.continuous_parents.size(); ++j)
      c.mean += lg.coefficients[j] * row.values.at(model.continuous_parents[j]);
    c.variance = lg.variance;
  };
  if (const auto* cpt = std::get_if<Cpt>(&model.distribution)) {
    c.discrete = true;
    auto it = cpt->rows.find(config_at(model.discrete_parents, row));
    if (it == cpt->rows.end()) {
      c.probabilities = &cpt->fallback;
      c.fallback = true;
    } else {
      c.probabilities = &it->second;
    }
  } else if (const auto* g = std::get_if<Gaussian>(&model.distribution)) {
    c.mean = g->mean;
    c.variance = g->variance;
  } else if (const auto* lg = std::get_if<LinearGaussian>(&model.distribution)) {
    regression(*lg);
  } else {
    const auto& clg = std::get<ConditionalLinearGaussian>(model.distribution);
    auto it = clg.by_config.find(config_at(model.discrete_parents, row));
    if (it == clg.by_config.end()) {
      regression(clg.fallback);
      c.fallback = true;
    } else {
      regression(it->second);
    }
  }
  return c;
}

double log_density(const Conditional& c, int code, double value) {
  if (c.discrete) {
    const double p = c.probabilities->at(static_cast<std::size_t>(code));
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  }
  const double z = value - c.mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * c.variance) - z * z / (2.0 * c.variance);
}

const DiscretizationMap* BayesianNetwork::binned(std::size_t var) const {
  if (!schema.at(var).is_discrete()) return nullptr;
  for (const auto& m : discretization)
    if (m.column == schema[var].name) return &m;
  return nullptr;
}

void BayesianNetwork::validate() const {
  if (dag.size() != schema.size() || models.size() != schema.size())
    throw std::logic_error("network: schema, graph and models differ in size");
  for (std::size_t v = 0; v < schema.size(); ++v) {
    if (dag.name(v) != schema[v].name || dag.kind(v) != schema[v].kind)
      throw std::logic_error("network: graph variables do not match the schema");
  }
  dag.validate();
  if (!(variance_floor > 0.0)) throw std::logic_error("network: variance floor must be positive");

  for (std::size_t v = 0; v < schema.size(); ++v) {
    const std::string where = "node '" + schema[v].name + "'";
    const NodeModel& m = models[v];
    const ParentSplit split = split_parents(schema, dag.parents(v));
    if (m.discrete_parents != split.discrete || m.continuous_parents != split.continuous)
      throw std::logic_error(where + ": model parents do not match the graph");

    auto check_config = [&](const Config& cfg) {
      if (cfg.size() != m.discrete_parents.size())
        throw std::logic_error(where + ": configuration has wrong arity");
      for (std::size_t i = 0; i < cfg.size(); ++i)
        if (cfg[i] < 0 ||
            static_cast<std::size_t>(cfg[i]) >= schema[m.discrete_parents[i]].cardinality())
          throw std::logic_error(where + ": configuration code out of range");
    };

    const auto type = m.distribution.index();
    if (schema[v].is_discrete()) {
      if (type != 0) throw std::logic_error(where + ": discrete node needs a CPT");
      const auto& cpt = std::get<Cpt>(m.distribution);
      if (cpt.cardinality != schema[v].cardinality())
        throw std::logic_error(where + ": CPT cardinality mismatch");
      if (cpt.rows.empty()) throw std::logic_error(where + ": CPT has no rows");
      for (const auto& [cfg, row] : cpt.rows) {
        check_config(cfg);
        check_row(row, cpt.cardinality, where);
      }
      check_row(cpt.fallback, cpt.cardinality, where + " fallback");
    } else if (split.discrete.empty() && split.continuous.empty()) {
      if (type != 1) throw std::logic_error(where + ": parentless continuous node needs a Gaussian");
      const auto& g = std::get<Gaussian>(m.distribution);
      if (!std::isfinite(g.mean) || !(g.variance > 0.0) || !std::isfinite(g.variance))
        throw std::logic_error(where + ": invalid Gaussian parameters");
    } else if (split.discrete.empty()) {
      if (type != 2) throw std::logic_error(where + ": expected a linear Gaussian");
      check_lg(std::get<LinearGaussian>(m.distribution), split.continuous.size(), where);
    } else {
      if (type != 3) throw std::logic_error(where + ": expected a conditional linear Gaussian");
      const auto& clg = std::get<ConditionalLinearGaussian>(m.distribution);
      if (clg.by_config.empty()) throw std::logic_error(where + ": CLG has no configurations");
      for (const auto& [cfg, lg] : clg.by_config) {
        check_config(cfg);
        check_lg(lg, split.continuous.size(), where);
      }
      check_lg(clg.fallback, split.continuous.size(), where + " fallback");
    }
  }

  for (const auto& map : discretization) {
    const auto v = dag.find(map.column);
    if (!v) throw std::logic_error("discretization names unknown column '" + map.column + "'");
    for (std::size_t i = 1; i < map.cut_points.size(); ++i)
      if (!(map.cut_points[i] > map.cut_points[i - 1]))
        throw std::logic_error("discretization cut points not strictly increasing");
    if (map.bin_means.size() != map.bins())
      throw std::logic_error("discretization bin means do not match bin count");
    if (schema[*v].is_discrete() && schema[*v].cardinality() != map.bins())
      throw std::logic_error("binned variable cardinality does not match its map");
  }
}

double variance_floor_for(const Dataset& data) {
  double min_var = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < data.n_cols(); ++c) {
    if (data.variable(c).is_discrete() || data.n_rows() == 0) continue;
    auto v = data.values(c);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    min_var = std::min(min_var, var);
  }
  if (!std::isfinite(min_var)) return 1e-12;
  return std::max(1e-12, 1e-12 * min_var);
}

LinearGaussian fit_linear_gaussian(const std::vector<std::vector<double>>& predictors,
                                   std::span<const double> response, double variance_floor,
                                   bool* used_ridge) {
  const auto n = static_cast<Eigen::Index>(response.size());
  const auto p = static_cast<Eigen::Index>(predictors.size());
  if (n == 0) throw std::invalid_argument("fit_linear_gaussian: no observations");
  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    x(r, 0) = 1.0;
    y(r) = response[static_cast<std::size_t>(r)];
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& col = predictors[static_cast<std::size_t>(j)];
    if (static_cast<Eigen::Index>(col.size()) != n)
      throw std::invalid_argument("fit_linear_gaussian: predictor length mismatch");
    for (Eigen::Index r = 0; r < n; ++r) x(r, j + 1) = col[static_cast<std::size_t>(r)];
  }

  Eigen::VectorXd beta;
  bool ridge = false;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() == p + 1) {
    beta = qr.solve(y);
  } else {
    const Eigen::MatrixXd gram = x.transpose() * x;
    const double lambda = 1e-8 * gram.trace();
    Eigen::MatrixXd reg = gram;
    reg.diagonal().array() += lambda;
    beta = reg.ldlt().solve(x.transpose() * y);
    ridge = true;
  }
  if (used_ridge) *used_ridge = ridge;
  if (!beta.allFinite()) throw NumericalError("fit_linear_gaussian: regression diverged");

  const Eigen::VectorXd resid = y - x * beta;
  LinearGaussian lg;
  lg.intercept = beta(0);
  lg.coefficients.assign(beta.data() + 1, beta.data() + beta.size());
  lg.variance = std::max(resid.squaredNorm() / static_cast<double>(n), variance_floor);
  return lg;
}

BayesianNetwork fit_parameters(const Dataset& data, const Dag& dag, const FitOptions& options,
                               FitDiagnostics* diagnostics) {
  if (dag.names() != data.names())
    throw std::invalid_argument("fit_parameters: graph variables do not match the data");
  if (dag.kinds() != data.kinds())
    throw std::invalid_argument("fit_parameters: graph kinds do not match the data");
  dag.validate();
  if (data.n_rows() == 0) throw InputError("fit_parameters: empty dataset");

  BayesianNetwork bn;
  bn.schema = data.schema();
  bn.dag = dag;
  bn.variance_floor = variance_floor_for(data);
  const std::size_t n = data.n_rows();
  FitDiagnostics diag;

  for (std::size_t v = 0; v < data.n_cols(); ++v) {
    const ParentSplit split = split_parents(bn.schema, dag.parents(v));
    NodeModel model;
    model.discrete_parents = split.discrete;
    model.continuous_parents = split.continuous;

    // Rows of each observed discrete-parent configuration.
    std::map<Config, std::vector<std::size_t>> groups;
    {
      std::vector<std::span<const int>> cols;
      for (std::size_t p : split.discrete) cols.push_back(data.codes(p));
      for (std::size_t r = 0; r < n; ++r) {
        Config cfg;
        cfg.reserve(cols.size());
        for (const auto& c : cols) cfg.push_back(c[r]);
        groups[cfg].push_back(r);
      }
    }

    if (bn.schema[v].is_discrete()) {
      if (!split.continuous.empty())
        throw std::invalid_argument("fit_parameters: discrete node with continuous parent");
      Cpt cpt;
      cpt.cardinality = bn.schema[v].cardinality();
      auto codes = data.codes(v);
      std::vector<double> total(cpt.cardinality, 0.0);
      for (const auto& [cfg, rows] : groups) {
        std::vector<double> counts(cpt.cardinality, 0.0);
        for (std::size_t r : rows) counts[static_cast<std::size_t>(codes[r])] += 1.0;
        for (std::size_t k = 0; k < counts.size(); ++k) total[k] += counts[k];
        cpt.rows.emplace(cfg, normalized_counts(counts, options.laplace_alpha));
      }
      cpt.fallback = normalized_counts(total, options.laplace_alpha);
      model.distribution = std::move(cpt);
    } else if (split.discrete.empty() && split.continuous.empty()) {
      auto y = data.values(v);
      double mean = 0.0;
      for (double x : y) mean += x;
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (double x : y) var += (x - mean) * (x - mean);
      model.distribution = Gaussian{mean, std::max(var / static_cast<double>(n), bn.variance_floor)};
    } else {
      std::vector<std::size_t> all(n);
      for (std::size_t r = 0; r < n; ++r) all[r] = r;
      bool ridge = false;
      LinearGaussian pooled = fit_rows(data, v, split.continuous, all, bn.variance_floor, &ridge);
      diag.ridge_fallbacks += ridge ? 1 : 0;
      if (split.discrete.empty()) {
        model.distribution = std::move(pooled);
      } else {
        ConditionalLinearGaussian clg;
        clg.fallback = std::move(pooled);
        for (const auto& [cfg, rows] : groups) {
          clg.by_config.emplace(
              cfg, fit_rows(data, v, split.continuous, rows, bn.variance_floor, &ridge));
          diag.ridge_fallbacks += ridge ? 1 : 0;
        }
        model.distribution = std::move(clg);
      }
    }
    bn.models.push_back(std::move(model));
  }
  if (diagnostics) *diagnostics = diag;
  return bn;
}

LogLikelihood local_log_likelihood(const NodeModel& model, const Dataset& data, std::size_t node) {
  LogLikelihood out;
  const bool discrete = data.variable(node).is_discrete();
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    const Row row = data.row(r);
    const Conditional c = conditional_at(model, row);
    out.fallbacks += c.fallback ? 1 : 0;
    out.value += discrete ? log_density(c, row.codes[node], 0.0)
                          : log_density(c, 0, row.values[node]);
  }
  return out;
}

}  // namespace mixbn
