#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixbn/dag.hpp"
#include "mixbn/dataset.hpp"
#include "mixbn/inference.hpp"
#include "mixbn/parameters.hpp"
#include "mixbn/scoring.hpp"
#include "mixbn/search.hpp"

namespace mixbn {

/// Shape of a random conditional-linear-Gaussian ground truth.
struct GeneratorSpec {
  std::string name = "synthetic";
  std::size_t nodes = 7;
  std::size_t discrete = 3;
  std::size_t min_cardinality = 2;
  std::size_t max_cardinality = 4;
  /// Probability that an admissible pair (earlier -> later in a random
  /// order) becomes an edge.
  double edge_density = 0.35;
  std::size_t max_parents = 3;
  /// Magnitude range of regression slopes; signs are random.
  double coef_min = 0.5;
  double coef_max = 1.5;
  /// Intercepts are uniform in [-intercept_range, intercept_range].
  double intercept_range = 3.0;
  double noise_min = 0.25;
  double noise_max = 1.0;
  std::size_t rows = 3000;
  std::uint64_t seed = 0;

  void validate() const;

  /// Table-2 shaped presets.
  static GeneratorSpec healthcare();
  static GeneratorSpec sangiovese();
  static GeneratorSpec mehra();
};

struct GeneratedNetwork {
  BayesianNetwork network;
  Dataset data;
};

/// Random DAG honouring the kind constraint, Dirichlet(1,...,1) CPT rows,
/// uniform slopes/intercepts/noise, then `rows` forward samples.
GeneratedNetwork generate_clg_network(const GeneratorSpec& spec);

/// Edge-level distance: one per unordered pair whose adjacency or
/// orientation differs. Graphs must share variable names.
std::size_t structural_hamming_distance(const Dag& truth, const Dag& learned);

struct SkeletonScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Undirected-adjacency precision/recall/F1. Two empty graphs score 1.
SkeletonScore skeleton_f1(const Dag& truth, const Dag& learned);

enum class SearchAlgorithm { HillClimb, Evolutionary };

std::string_view to_string(SearchAlgorithm a);
SearchAlgorithm parse_search_algorithm(std::string_view text);

struct MatrixOptions {
  ScoreKind score = ScoreKind::MI;
  std::size_t bins = 5;
  double test_fraction = 0.1;
  ImputeStrategy strategy = ImputeStrategy::Sample;
  EvoConfig evo;
  std::optional<std::size_t> max_parents;
  ScoreOptions score_options;
};

struct CellResult {
  bool mixed_structure = false;
  bool mixed_parameters = false;
  BayesianNetwork network;
  double structure_score = 0.0;
  ImputationReport report;
  /// Wall clock of structure learning only.
  double structure_seconds = 0.0;
  std::optional<std::size_t> shd;
  std::optional<double> skeleton_f1;

  std::string label() const;  // "D+D", "D+M", "M+D", "M+M"
};

struct MatrixResult {
  SearchAlgorithm search = SearchAlgorithm::HillClimb;
  std::uint64_t seed = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  /// D+D, D+M, M+D, M+M.
  std::vector<CellResult> cells;
  std::vector<std::string> warnings;

  const CellResult& cell(bool mixed_structure, bool mixed_parameters) const;
  const CellResult& baseline() const { return cell(false, false); }
  /// 100 * (baseline - cell) / baseline for the RMSE of `variable`.
  double error_reduction(const CellResult& cell, std::string_view variable) const;
};

/// Learns the four structure x parameter combinations on one 90/10 split
/// and scores each by single-cell restoration on the held-out rows.
/// D-structure cells search discretized data (the D+M cell under the
/// mixed kind constraint); D-parameter cells fit CPTs on binned data.
MatrixResult run_matrix(const Dataset& data, const BayesianNetwork* ground_truth,
                        SearchAlgorithm search, std::uint64_t seed,
                        const MatrixOptions& options = {});

struct DistributionComparison {
  std::string node;
  bool continuous = false;
  /// Bin edges (continuous, size bins+1) or category labels (discrete).
  std::vector<double> edges;
  std::vector<std::string> categories;
  std::vector<double> reference;
  std::vector<double> sampled;
  /// 1-Wasserstein for continuous nodes, total variation for discrete.
  double distance = 0.0;
};

/// Empirical 1-Wasserstein distance between two samples.
double wasserstein1(std::vector<double> a, std::vector<double> b);

DistributionComparison compare_distributions(const BayesianNetwork& bn, const Dataset& reference,
                                             std::string_view node, std::size_t n_samples,
                                             std::uint64_t seed, std::size_t bins = 20);

/// One row per (seed, search, cell, variable).
void write_results_csv(std::ostream& out, const std::vector<MatrixResult>& results);
/// Structure-learning seconds per (seed, search, cell).
void write_timings_csv(std::ostream& out, const std::vector<MatrixResult>& results);
/// Mean restoration metric per (search, cell, variable) plus error reductions.
std::string summary_json(const std::vector<MatrixResult>& results);
/// Error-reduction table, and the HC-minus-EVO column when both ran.
void print_reduction_table(std::ostream& out, const std::vector<MatrixResult>& results);
void write_histogram_csv(std::ostream& out, const DistributionComparison& cmp);

}  // namespace mixbn
