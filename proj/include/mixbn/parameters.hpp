#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mixbn/dag.hpp"
#include "mixbn/dataset.hpp"

namespace mixbn {

/// Codes of the discrete parents, in ascending parent-index order.
using Config = std::vector<int>;

struct Cpt {
  std::size_t cardinality = 0;
  /// One probability row per observed parent configuration.
  std::map<Config, std::vector<double>> rows;
  /// Marginal of the child over the full sample, used for unseen configs.
  std::vector<double> fallback;
};

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};

struct LinearGaussian {
  double intercept = 0.0;
  /// One coefficient per continuous parent, ascending parent-index order.
  std::vector<double> coefficients;
  double variance = 1.0;

  double mean_given(std::span<const double> parents) const;
};

struct ConditionalLinearGaussian {
  std::map<Config, LinearGaussian> by_config;
  /// Regression on the continuous parents over the full sample.
  LinearGaussian fallback;
};

using Distribution = std::variant<Cpt, Gaussian, LinearGaussian, ConditionalLinearGaussian>;

/// Fitted conditional distribution of one node.
struct NodeModel {
  std::vector<std::size_t> discrete_parents;
  std::vector<std::size_t> continuous_parents;
  Distribution distribution;
};

std::string_view model_type_name(const Distribution& d);

/// The distribution a node evaluates to once its parents are fixed.
struct Conditional {
  bool discrete = false;
  const std::vector<double>* probabilities = nullptr;
  double mean = 0.0;
  double variance = 0.0;
  bool fallback = false;
};

/// Resolves the model at one row, reading parents from `row`.
Conditional conditional_at(const NodeModel& model, const Row& row);

struct BayesianNetwork {
  Schema schema;
  Dag dag;
  std::vector<NodeModel> models;
  /// Present when some originally continuous variables were binned.
  std::vector<DiscretizationMap> discretization;
  double variance_floor = 1e-12;

  std::size_t size() const { return schema.size(); }
  /// Map for a variable that the network models in binned form, if any.
  const DiscretizationMap* binned(std::size_t var) const;

  /// Throws std::logic_error describing the first violated invariant.
  void validate() const;
};

struct FitOptions {
  /// Additive smoothing for CPT rows; 0 is plain maximum likelihood.
  double laplace_alpha = 0.0;
};

struct FitDiagnostics {
  std::size_t ridge_fallbacks = 0;
};

/// max(1e-12, 1e-12 * smallest continuous-column variance).
double variance_floor_for(const Dataset& data);

/// Maximum-likelihood fit of every node following the mixed taxonomy:
/// discrete -> Cpt; continuous without parents -> Gaussian; continuous with
/// only continuous parents -> LinearGaussian; any discrete parent ->
/// ConditionalLinearGaussian. `dag` must be over the data's variables with
/// matching kinds.
BayesianNetwork fit_parameters(const Dataset& data, const Dag& dag, const FitOptions& options = {},
                               FitDiagnostics* diagnostics = nullptr);

/// Least squares of y on [1, X]; falls back to ridge with
/// lambda = 1e-8 * trace(G) when the Gram matrix G is singular.
LinearGaussian fit_linear_gaussian(const std::vector<std::vector<double>>& predictors,
                                   std::span<const double> response, double variance_floor,
                                   bool* used_ridge = nullptr);

struct LogLikelihood {
  double value = 0.0;
  std::size_t fallbacks = 0;
};

/// Sum over rows of ln p(x_node | parents) under `model`.
LogLikelihood local_log_likelihood(const NodeModel& model, const Dataset& data, std::size_t node);

/// Log density (or mass) of one value under a resolved conditional.
double log_density(const Conditional& c, int code, double value);

}  // namespace mixbn
