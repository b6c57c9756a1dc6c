#pragma once

#include <Eigen/Core>

#include <atomic>
#include <cstddef>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mixbn/dag.hpp"
#include "mixbn/dataset.hpp"

namespace mixbn {

enum class ScoreKind { MI, LL, BIC, AIC };

std::string_view to_string(ScoreKind kind);
ScoreKind parse_score_kind(std::string_view text);

/// A node together with its canonical (sorted, duplicate-free) parents.
struct ParentSet {
  std::size_t node = 0;
  std::vector<std::size_t> parents;

  /// Sorts parents; throws std::invalid_argument when node is among them.
  static ParentSet make(std::size_t node, std::vector<std::size_t> parents);
};

struct LocalScore {
  double value = 0.0;  // nats per observation
  ScoreKind kind = ScoreKind::MI;
  /// A discrete configuration was too small to estimate its covariance;
  /// `value` is meaningless and must not be summed.
  bool rejected = false;
  std::size_t jitter_events = 0;
};

struct ScoreOptions {
  /// Smallest group a Gaussian block may be estimated from. The effective
  /// bound for a d-dimensional block is max(min_group_size, d + 1).
  std::size_t min_group_size = 2;
};

/// How a group below the size bound is treated inside a block entropy.
enum class SmallGroupPolicy {
  Flag,        // mark the result as pathological
  FullSample,  // substitute the full-sample entropy of the block
};

struct EntropyValue {
  double value = 0.0;
  bool jittered = false;
};

/// Plug-in joint entropy -sum p ln p of one or more equal-length discrete
/// columns. Throws std::invalid_argument on empty input.
double discrete_entropy(std::span<const std::span<const int>> columns);

/// 1/2 ln|2 pi e Sigma| via a Cholesky log-determinant. When the
/// factorization fails or a pivot is tiny, eps*I with
/// eps = max(1e-8 * trace / d, 1e-12) is added and the result flagged.
EntropyValue gaussian_entropy(const Eigen::MatrixXd& covariance);

/// Maximum-likelihood covariance (divides by n) of the given columns.
Eigen::MatrixXd mle_covariance(const Dataset& data, std::span<const std::size_t> columns);

/// Per-configuration summary of a continuous block within the groups
/// induced by a set of discrete columns.
struct GroupStats {
  std::vector<int> config;
  double probability = 0.0;
  Eigen::MatrixXd covariance;
  std::size_t count = 0;
};

std::vector<GroupStats> group_stats(const Dataset& data,
                                    std::span<const std::size_t> continuous,
                                    std::span<const std::size_t> discrete);

struct BlockEntropy {
  double value = 0.0;
  bool pathological = false;
  std::size_t jitter_events = 0;
};

/// Entropy of a mixed block: H(discrete part) + sum_j P(y_j) H(continuous | y_j),
/// the continuous conditionals approximated by Gaussians.
BlockEntropy mixed_entropy(const Dataset& data, std::span<const std::size_t> block,
                           SmallGroupPolicy policy, const ScoreOptions& options = {});

struct MiValue {
  double value = 0.0;
  bool pathological = false;
  std::size_t jitter_events = 0;
};

/// Mutual information of a variable block. The block is split into its
/// continuous part X and discrete part Y:
///   both present     -> H(X) - sum_j P(Y=y_j) H(X | Y=y_j)
///   only continuous  -> Gaussian entropy of the full-sample covariance
///   only discrete    -> H(first) for a single column, otherwise the
///                       classical MI between the first column and the rest.
/// Throws std::invalid_argument on an empty block.
MiValue mixed_mi(const Dataset& data, std::span<const std::size_t> block,
                 const ScoreOptions& options = {});

/// I(node; parents) = H(node) + H(parents) - H(node, parents) with mixed
/// block entropies. Zero for an empty parent set.
MiValue mutual_information(const Dataset& data, const ParentSet& ps, SmallGroupPolicy policy,
                           const ScoreOptions& options = {});

/// Free parameters of the local model, used by the BIC/AIC penalties.
/// Continuous node: q * (c + 2); discrete node: q * (k - 1), with q the
/// number of discrete-parent configurations and c the continuous parents.
std::size_t parameter_count(const Dataset& data, const ParentSet& ps);

/// Memo of local scores keyed by (kind, node, parents). One cache must only
/// ever see one dataset and one ScoreOptions value. Safe for concurrent use.
class ScoreCache {
 public:
  bool lookup(ScoreKind kind, const ParentSet& ps, LocalScore& out) const;
  void insert(ScoreKind kind, const ParentSet& ps, const LocalScore& score);
  std::size_t size() const;
  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }

 private:
  static std::string key(ScoreKind kind, const ParentSet& ps);

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, LocalScore> entries_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

/// Local score of one family, in nats per observation:
///   MI  -> H(X) + I(X; Pa)   (equals H(X) for an empty parent set)
///   LL  -> MI - H(X) = I(X; Pa)
///   BIC -> LL - params * ln(n) / (2n)
///   AIC -> LL - params / n
/// MI/LL flag undersized groups as rejected; BIC/AIC substitute the
/// full-sample entropy for them.
LocalScore local_score(const Dataset& data, const ParentSet& ps, ScoreKind kind,
                       ScoreCache* cache = nullptr, const ScoreOptions& options = {});

struct ScoredNetwork {
  Dag dag;
  double total = 0.0;
  std::vector<LocalScore> local;
  bool rejected = false;
  /// Accepted totals in search order (best-so-far per generation for the
  /// evolutionary search).
  std::vector<double> trace;
};

/// Sum of local scores. Throws std::invalid_argument for a cyclic graph or
/// one whose variables do not match the data.
ScoredNetwork network_score(const Dataset& data, const Dag& dag, ScoreKind kind,
                            ScoreCache* cache = nullptr, const ScoreOptions& options = {});

}  // namespace mixbn
