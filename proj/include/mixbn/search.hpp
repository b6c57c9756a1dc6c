#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mixbn/dag.hpp"
#include "mixbn/dataset.hpp"
#include "mixbn/scoring.hpp"

namespace mixbn {

inline constexpr double kTieEpsilon = 1e-9;

struct SearchOptions {
  std::optional<std::size_t> max_parents;
  /// Kinds that drive the continuous -> discrete prohibition. Defaults to
  /// the data's own kinds; set it to search discretized data under the
  /// original mixed constraint.
  std::optional<std::vector<VariableKind>> constraint_kinds;
  ScoreOptions score;
  /// Shared memo; a private one is used when null.
  ScoreCache* cache = nullptr;
};

/// Empty graph over the data's variables with the constraint kinds.
Dag empty_search_dag(const Dataset& data, const SearchOptions& options);

/// Best-improvement Hill-Climbing over add/delete/reverse moves. Ties go to
/// the smallest (kind, from, to); stops once no move gains more than
/// kTieEpsilon. Rejected families are never adopted.
ScoredNetwork hill_climb(const Dataset& data, ScoreKind kind,
                         const std::optional<Dag>& start = std::nullopt,
                         const SearchOptions& options = {});

struct EvoConfig {
  std::size_t population_size = 20;
  std::size_t generations = 100;
  double mutation_rate = 0.8;
  double crossover_rate = 0.8;
  std::size_t tournament_size = 3;
  std::size_t stagnation_limit = 15;
  std::uint64_t seed = 0;

  /// Throws InputError when a field is out of range.
  void validate() const;
};

/// Evolutionary structure search: random sparse population, then per
/// generation tournament selection with one elite, parent-set crossover,
/// single-move mutation and cycle repair. Stops after `generations` or
/// `stagnation_limit` generations without improvement of the best.
ScoredNetwork evolve(const Dataset& data, ScoreKind kind, const EvoConfig& config,
                     const SearchOptions& options = {});

// Operators exposed for testing.

/// Each legal ordered pair becomes an edge with probability 2/n, then
/// cycles and parent-cap violations are repaired.
Dag random_dag(const Dag& empty, std::mt19937_64& rng, std::optional<std::size_t> max_parents);

/// Deletes random edges on cycles until acyclic, then random parents of
/// any node above `max_parents`.
void repair(Dag& dag, std::mt19937_64& rng, std::optional<std::size_t> max_parents);

/// Child takes each node's parent set from a uniformly chosen parent.
Dag crossover(const Dag& a, const Dag& b, std::mt19937_64& rng,
              std::optional<std::size_t> max_parents);

/// Applies one uniformly chosen legal move; returns false if none exists.
bool mutate(Dag& dag, std::mt19937_64& rng, std::optional<std::size_t> max_parents);

}  // namespace mixbn
