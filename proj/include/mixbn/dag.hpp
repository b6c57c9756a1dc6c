#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixbn/dataset.hpp"

namespace mixbn {

using Edge = std::pair<std::size_t, std::size_t>;  // (parent, child)

/// Directed acyclic graph over a fixed, ordered variable set. Edges from a
/// continuous node into a discrete node are never allowed.
class Dag {
 public:
  Dag() = default;
  Dag(std::vector<std::string> names, std::vector<VariableKind> kinds);
  static Dag empty_for(const Dataset& data);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<VariableKind>& kinds() const { return kinds_; }
  const std::string& name(std::size_t v) const { return names_.at(v); }
  VariableKind kind(std::size_t v) const { return kinds_.at(v); }
  std::optional<std::size_t> find(std::string_view name) const;

  /// Sorted parent indices of `v`.
  const std::vector<std::size_t>& parents(std::size_t v) const { return parents_.at(v); }
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;
  bool has_edge(std::size_t from, std::size_t to) const;

  /// True when `from` may be a parent of `to` by kind alone.
  bool kind_allows(std::size_t from, std::size_t to) const;
  /// True when a path from -> ... -> to exists.
  bool reachable(std::size_t from, std::size_t to) const;
  /// Adding from->to keeps every invariant (ignores any parent cap).
  bool can_add(std::size_t from, std::size_t to) const;

  /// Throw std::logic_error when the edge would break an invariant.
  void add_edge(std::size_t from, std::size_t to);
  void remove_edge(std::size_t from, std::size_t to);
  void reverse_edge(std::size_t from, std::size_t to);

  /// Replaces all parents of `v` without validation; callers repair.
  void set_parents_unchecked(std::size_t v, std::vector<std::size_t> parents);

  /// Kahn order, smallest index first among ready nodes. Empty when cyclic.
  std::vector<std::size_t> topological_order() const;
  bool is_acyclic() const;
  /// Edges of one directed cycle, or empty when acyclic.
  std::vector<Edge> find_cycle() const;

  /// Empty when valid, otherwise a description of the first violation.
  std::string validation_error() const;
  void validate() const;

  /// Same edges over a new kind vector (names unchanged).
  Dag with_kinds(std::vector<VariableKind> kinds) const;

  bool operator==(const Dag& other) const;

 private:
  std::vector<std::string> names_;
  std::vector<VariableKind> kinds_;
  std::vector<std::vector<std::size_t>> parents_;
};

enum class MoveKind { Add = 0, Delete = 1, Reverse = 2 };

struct Move {
  MoveKind kind;
  Edge edge;

  auto operator<=>(const Move&) const = default;
};

std::string_view to_string(MoveKind kind);

/// Every move that keeps `dag` valid. Add/Reverse also respect
/// `max_parents` on the receiving node. Sorted by (kind, from, to).
std::vector<Move> legal_moves(const Dag& dag, std::optional<std::size_t> max_parents = {});

bool is_legal(const Dag& dag, const Move& move, std::optional<std::size_t> max_parents = {});
void apply_move(Dag& dag, const Move& move);

std::string to_dot(const Dag& dag);

}  // namespace mixbn
