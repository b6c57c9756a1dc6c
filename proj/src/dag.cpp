#include "mixbn/dag.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace mixbn {

Dag::Dag(std::vector<std::string> names, std::vector<VariableKind> kinds)
    : names_(std::move(names)), kinds_(std::move(kinds)), parents_(names_.size()) {
  if (names_.size() != kinds_.size())
    throw std::invalid_argument("Dag: names and kinds differ in length");
}

Dag Dag::empty_for(const Dataset& data) { return Dag(data.names(), data.kinds()); }

std::optional<std::size_t> Dag::find(std::string_view name) const {
  for (std::size_t v = 0; v < names_.size(); ++v)
    if (names_[v] == name) return v;
  return std::nullopt;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  for (std::size_t v = 0; v < parents_.size(); ++v)
    for (std::size_t p : parents_[v]) out.emplace_back(p, v);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Dag::edge_count() const {
  std::size_t n = 0;
  for (const auto& ps : parents_) n += ps.size();
  return n;
}

bool Dag::has_edge(std::size_t from, std::size_t to) const {
  const auto& ps = parents_.at(to);
  return std::binary_search(ps.begin(), ps.end(), from);
}

bool Dag::kind_allows(std::size_t from, std::size_t to) const {
  return from != to &&
         !(kinds_.at(from) == VariableKind::Continuous && kinds_.at(to) == VariableKind::Discrete);
}

bool Dag::reachable(std::size_t from, std::size_t to) const {
  // Walk backwards from `to` through parent links.
  if (from == to) return true;
  std::vector<char> seen(size(), 0);
  std::vector<std::size_t> stack{to};
  seen[to] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t p : parents_[v]) {
      if (p == from) return true;
      if (!seen[p]) {
        seen[p] = 1;
        stack.push_back(p);
      }
    }
  }
  return false;
}

bool Dag::can_add(std::size_t from, std::size_t to) const {
  return kind_allows(from, to) && !has_edge(from, to) && !reachable(to, from);
}

void Dag::add_edge(std::size_t from, std::size_t to) {
  if (!can_add(from, to))
    throw std::logic_error("illegal edge " + names_.at(from) + " -> " + names_.at(to));
  auto& ps = parents_[to];
  ps.insert(std::lower_bound(ps.begin(), ps.end(), from), from);
}

void Dag::remove_edge(std::size_t from, std::size_t to) {
  auto& ps = parents_.at(to);
  auto it = std::lower_bound(ps.begin(), ps.end(), from);
  if (it == ps.end() || *it != from)
    throw std::logic_error("no edge " + names_.at(from) + " -> " + names_.at(to));
  ps.erase(it);
}

void Dag::reverse_edge(std::size_t from, std::size_t to) {
  remove_edge(from, to);
  if (!can_add(to, from)) {
    auto& ps = parents_[to];
    ps.insert(std::lower_bound(ps.begin(), ps.end(), from), from);
    throw std::logic_error("illegal reversal of " + names_.at(from) + " -> " + names_.at(to));
  }
  add_edge(to, from);
}

void Dag::set_parents_unchecked(std::size_t v, std::vector<std::size_t> parents) {
  std::sort(parents.begin(), parents.end());
  parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
  parents_.at(v) = std::move(parents);
}

std::vector<std::size_t> Dag::topological_order() const {
  const std::size_t n = size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t v = 0; v < n; ++v) {
    indegree[v] = parents_[v].size();
    for (std::size_t p : parents_[v]) children[p].push_back(v);
  }
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push_back(v);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto it = std::min_element(ready.begin(), ready.end());
    const std::size_t v = *it;
    ready.erase(it);
    order.push_back(v);
    for (std::size_t c : children[v])
      if (--indegree[c] == 0) ready.push_back(c);
  }
  if (order.size() != n) order.clear();
  return order;
}

bool Dag::is_acyclic() const { return size() == 0 || !topological_order().empty(); }

std::vector<Edge> Dag::find_cycle() const {
  const std::size_t n = size();
  // 0 = unvisited, 1 = on stack, 2 = done. Walk child -> parent links.
  std::vector<int> state(n, 0);
  std::vector<std::size_t> via(n, 0);
  for (std::size_t root = 0; root < n; ++root) {
    if (state[root]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      if (i < parents_[v].size()) {
        const std::size_t p = parents_[v][i++];
        if (state[p] == 1) {
          // Cycle: p -> v -> ... following child links back to p.
          std::vector<Edge> cycle{{p, v}};
          std::size_t cur = v;
          while (cur != p) {
            cycle.emplace_back(cur, via[cur]);
            cur = via[cur];
          }
          return cycle;
        }
        if (state[p] == 0) {
          state[p] = 1;
          via[p] = v;
          stack.emplace_back(p, 0);
        }
      } else {
        state[v] = 2;
        stack.pop_back();
      }
    }
  }
  return {};
}

std::string Dag::validation_error() const {
  for (std::size_t v = 0; v < size(); ++v) {
    const auto& ps = parents_[v];
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps[i] >= size()) return "parent index out of range";
      if (i > 0 && ps[i] <= ps[i - 1]) return "duplicate or unsorted parents of " + names_[v];
      if (ps[i] == v) return "self-loop on " + names_[v];
      if (!kind_allows(ps[i], v))
        return "continuous node " + names_[ps[i]] + " cannot be a parent of discrete node " +
               names_[v];
    }
  }
  if (!is_acyclic()) return "graph contains a cycle";
  return {};
}

void Dag::validate() const {
  if (auto err = validation_error(); !err.empty()) throw std::logic_error("invalid DAG: " + err);
}

Dag Dag::with_kinds(std::vector<VariableKind> kinds) const {
  Dag out(names_, std::move(kinds));
  out.parents_ = parents_;
  return out;
}

bool Dag::operator==(const Dag& other) const {
  return names_ == other.names_ && kinds_ == other.kinds_ && parents_ == other.parents_;
}

std::string_view to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::Add: return "add";
    case MoveKind::Delete: return "delete";
    case MoveKind::Reverse: return "reverse";
  }
  return "?";
}

bool is_legal(const Dag& dag, const Move& move, std::optional<std::size_t> max_parents) {
  const auto [from, to] = move.edge;
  if (from >= dag.size() || to >= dag.size()) return false;
  switch (move.kind) {
    case MoveKind::Add:
      return dag.can_add(from, to) && (!max_parents || dag.parents(to).size() < *max_parents);
    case MoveKind::Delete:
      return dag.has_edge(from, to);
    case MoveKind::Reverse: {
      if (!dag.has_edge(from, to) || !dag.kind_allows(to, from)) return false;
      if (max_parents && dag.parents(from).size() >= *max_parents) return false;
      // Reversal is acyclic iff no other directed path from -> to exists.
      Dag probe = dag;
      probe.remove_edge(from, to);
      return !probe.reachable(from, to);
    }
  }
  return false;
}

std::vector<Move> legal_moves(const Dag& dag, std::optional<std::size_t> max_parents) {
  std::vector<Move> out;
  const std::size_t n = dag.size();
  for (std::size_t from = 0; from < n; ++from)
    for (std::size_t to = 0; to < n; ++to) {
      if (from == to) continue;
      if (dag.has_edge(from, to)) continue;
      if (is_legal(dag, {MoveKind::Add, {from, to}}, max_parents))
        out.push_back({MoveKind::Add, {from, to}});
    }
  for (const auto& e : dag.edges()) out.push_back({MoveKind::Delete, e});
  for (const auto& e : dag.edges())
    if (is_legal(dag, {MoveKind::Reverse, e}, max_parents)) out.push_back({MoveKind::Reverse, e});
  std::sort(out.begin(), out.end());
  return out;
}

void apply_move(Dag& dag, const Move& move) {
  switch (move.kind) {
    case MoveKind::Add: dag.add_edge(move.edge.first, move.edge.second); break;
    case MoveKind::Delete: dag.remove_edge(move.edge.first, move.edge.second); break;
    case MoveKind::Reverse: dag.reverse_edge(move.edge.first, move.edge.second); break;
  }
}

std::string to_dot(const Dag& dag) {
  std::ostringstream os;
  os << "digraph bn {\n";
  for (std::size_t v = 0; v < dag.size(); ++v)
    os << "  \"" << dag.name(v) << "\" [shape="
       << (dag.kind(v) == VariableKind::Discrete ? "box" : "ellipse") << "];\n";
  for (const auto& [p, c] : dag.edges())
    os << "  \"" << dag.name(p) << "\" -> \"" << dag.name(c) << "\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace mixbn
