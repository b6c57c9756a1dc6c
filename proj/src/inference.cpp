#include "mixbn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mixbn/error.hpp"

namespace mixbn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int draw_category(const std::vector<double>& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = static_cast<int>(k);
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return last_positive;
}

int most_probable(const std::vector<double>& probs) {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

/// Fills node `v` of `row` from its conditional; returns true on fallback.
bool fill(const BayesianNetwork& bn, std::size_t v, Row& row, std::mt19937_64& rng,
          ImputeStrategy strategy) {
  const Conditional c = conditional_at(bn.models[v], row);
  if (c.discrete) {
    row.codes[v] = strategy == ImputeStrategy::Mode ? most_probable(*c.probabilities)
                                                    : draw_category(*c.probabilities, rng);
  } else if (strategy == ImputeStrategy::Mode) {
    row.values[v] = c.mean;
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    row.values[v] = c.mean + std::sqrt(c.variance) * normal(rng);
  }
  return c.fallback;
}

std::vector<std::size_t> order_of(const BayesianNetwork& bn) {
  auto order = bn.dag.topological_order();
  if (order.size() != bn.size()) throw std::logic_error("network graph is not acyclic");
  return order;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

std::string_view to_string(ImputeStrategy s) {
  return s == ImputeStrategy::Sample ? "sample" : "mode";
}

ImputeStrategy parse_impute_strategy(std::string_view text) {
  if (text == "sample") return ImputeStrategy::Sample;
  if (text == "mode" || text == "mean") return ImputeStrategy::Mode;
  throw InputError("unknown imputation strategy '" + std::string(text) + "'");
}

Dataset forward_sample(const BayesianNetwork& bn, std::size_t n, std::uint64_t seed) {
  const auto order = order_of(bn);
  const std::size_t d = bn.size();
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> codes(d);
  std::vector<std::vector<double>> values(d);
  for (std::size_t v = 0; v < d; ++v)
    (bn.schema[v].is_discrete() ? codes[v].reserve(n) : values[v].reserve(n));

  Row row{std::vector<int>(d, 0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t v : order) fill(bn, v, row, rng, ImputeStrategy::Sample);
    for (std::size_t v = 0; v < d; ++v) {
      if (bn.schema[v].is_discrete())
        codes[v].push_back(row.codes[v]);
      else
        values[v].push_back(row.values[v]);
    }
  }
  return Dataset(bn.schema, std::move(codes), std::move(values));
}

ImputeResult impute_with(const BayesianNetwork& bn, const PartialRow& partial,
                         std::mt19937_64& rng, ImputeStrategy strategy) {
  const std::size_t d = bn.size();
  if (partial.row.codes.size() != d || partial.row.values.size() != d ||
      partial.missing.size() != d)
    throw InputError("row does not match the network's variables");
  ImputeResult out;
  out.row = partial.row;
  if (std::none_of(partial.missing.begin(), partial.missing.end(), [](bool m) { return m; }))
    return out;
  for (std::size_t v : order_of(bn)) {
    if (!partial.missing[v]) continue;
    out.fallbacks += fill(bn, v, out.row, rng, strategy) ? 1 : 0;
    ++out.imputed;
  }
  return out;
}

ImputeResult impute(const BayesianNetwork& bn, const PartialRow& row, std::uint64_t seed,
                    ImputeStrategy strategy) {
  std::mt19937_64 rng(seed);
  return impute_with(bn, row, rng, strategy);
}

const VariableRestoration& ImputationReport::at(std::string_view name) const {
  for (const auto& v : variables)
    if (v.name == name) return v;
  throw std::out_of_range("no restoration entry for '" + std::string(name) + "'");
}

Dataset to_network_space(const BayesianNetwork& bn, const Dataset& data) {
  std::vector<DiscretizationMap> maps;
  for (std::size_t v = 0; v < bn.size(); ++v) {
    const DiscretizationMap* map = bn.binned(v);
    if (!map) continue;
    const auto col = data.find(bn.schema[v].name);
    if (col && !data.variable(*col).is_discrete()) maps.push_back(*map);
  }
  const Dataset binned = maps.empty() ? data : apply_discretization(data, maps);
  return align_to_schema(binned, bn.schema);
}

ImputationReport evaluate_restoration(const BayesianNetwork& bn, const Dataset& test,
                                      std::uint64_t seed, ImputeStrategy strategy) {
  const Dataset coded = to_network_space(bn, test);
  const std::size_t d = bn.size();
  const std::size_t n = coded.n_rows();
  if (n == 0) throw InputError("evaluate_restoration: empty test set");

  std::vector<Row> rows;
  rows.reserve(n);
  for (std::size_t r = 0; r < n; ++r) rows.push_back(coded.row(r));

  ImputationReport report;
  for (std::size_t v = 0; v < d; ++v) {
    const std::string& name = bn.schema[v].name;
    const std::size_t truth_col = test.index_of(name);
    const bool continuous_truth = !test.variable(truth_col).is_discrete();
    const DiscretizationMap* map = bn.binned(v);

    VariableRestoration entry;
    entry.name = name;
    entry.metric = continuous_truth ? RestorationMetric::Rmse : RestorationMetric::Accuracy;
    double accum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      PartialRow partial{rows[r], std::vector<bool>(d, false)};
      partial.missing[v] = true;
      std::mt19937_64 rng(derive_seed(seed, v, r));
      const ImputeResult res = impute_with(bn, partial, rng, strategy);
      entry.fallbacks += res.fallbacks;
      ++entry.imputed;
      if (continuous_truth) {
        const double truth = test.values(truth_col)[r];
        const double guess = map ? map->decode(res.row.codes[v]) : res.row.values[v];
        accum += (guess - truth) * (guess - truth);
      } else {
        accum += res.row.codes[v] == rows[r].codes[v] ? 1.0 : 0.0;
      }
    }
    entry.value = continuous_truth ? std::sqrt(accum / static_cast<double>(n))
                                   : accum / static_cast<double>(n);
    report.variables.push_back(std::move(entry));
  }
  return report;
}

}  // namespace mixbn
