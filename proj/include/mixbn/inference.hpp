#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mixbn/dataset.hpp"
#include "mixbn/parameters.hpp"

namespace mixbn {

/// Seed for the (seed, a, b) stream, mixed with splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Draws `n` rows in topological order. The result uses the network's
/// schema, so binned variables come out as bin labels.
Dataset forward_sample(const BayesianNetwork& bn, std::size_t n, std::uint64_t seed);

enum class ImputeStrategy {
  Sample,  // one draw from the node's conditional
  Mode,    // most probable category / conditional mean
};

std::string_view to_string(ImputeStrategy s);
ImputeStrategy parse_impute_strategy(std::string_view text);

/// A row in the network's coding with some cells marked missing.
struct PartialRow {
  Row row;
  std::vector<bool> missing;
};

struct ImputeResult {
  Row row;
  std::size_t imputed = 0;
  std::size_t fallbacks = 0;
};

/// Fills missing cells in topological order from each node's conditional
/// given its (observed or already imputed) parents.
ImputeResult impute(const BayesianNetwork& bn, const PartialRow& row, std::uint64_t seed,
                    ImputeStrategy strategy = ImputeStrategy::Sample);

/// Same as `impute` with a caller-owned generator.
ImputeResult impute_with(const BayesianNetwork& bn, const PartialRow& row, std::mt19937_64& rng,
                         ImputeStrategy strategy);

enum class RestorationMetric { Accuracy, Rmse };

struct VariableRestoration {
  std::string name;
  RestorationMetric metric = RestorationMetric::Rmse;
  double value = 0.0;
  std::size_t imputed = 0;
  std::size_t fallbacks = 0;
};

struct ImputationReport {
  std::vector<VariableRestoration> variables;

  const VariableRestoration& at(std::string_view name) const;
};

/// Converts a dataset in the original variable space into the network's
/// coding: binned variables go through their maps, categories are matched
/// by label. Throws InputError on schema mismatch.
Dataset to_network_space(const BayesianNetwork& bn, const Dataset& data);

/// For every variable and every test row: delete that one cell, impute it,
/// and compare to the truth. Discrete truth -> accuracy; continuous truth
/// -> RMSE, binned imputations decoded to their bin's training mean.
ImputationReport evaluate_restoration(const BayesianNetwork& bn, const Dataset& test,
                                      std::uint64_t seed,
                                      ImputeStrategy strategy = ImputeStrategy::Sample);

}  // namespace mixbn
