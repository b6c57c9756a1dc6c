#include "mixbn/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixbn/error.hpp"

namespace mixbn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double usable(const LocalScore& s) { return s.rejected ? kNegInf : s.value; }

double gain(double after, double before) {
  if (after == kNegInf) return kNegInf;
  if (before == kNegInf) return std::numeric_limits<double>::infinity();
  return after - before;
}

std::vector<std::size_t> with(std::vector<std::size_t> set, std::size_t v) {
  set.insert(std::lower_bound(set.begin(), set.end(), v), v);
  return set;
}

std::vector<std::size_t> without(std::vector<std::size_t> set, std::size_t v) {
  set.erase(std::remove(set.begin(), set.end(), v), set.end());
  return set;
}

void check_variables(const Dataset& data, const Dag& dag) {
  if (dag.names() != data.names())
    throw std::invalid_argument("search: DAG variables do not match the data");
  dag.validate();
}

double fitness(const ScoredNetwork& s) { return s.rejected ? kNegInf : s.total; }

}  // namespace

Dag empty_search_dag(const Dataset& data, const SearchOptions& options) {
  std::vector<VariableKind> kinds = options.constraint_kinds.value_or(data.kinds());
  if (kinds.size() != data.n_cols())
    throw std::invalid_argument("constraint kinds do not match the data");
  return Dag(data.names(), std::move(kinds));
}

ScoredNetwork hill_climb(const Dataset& data, ScoreKind kind, const std::optional<Dag>& start,
                         const SearchOptions& options) {
  ScoreCache private_cache;
  ScoreCache* cache = options.cache ? options.cache : &private_cache;
  Dag dag = start ? *start : empty_search_dag(data, options);
  check_variables(data, dag);

  auto score = [&](std::size_t node, std::vector<std::size_t> parents) {
    return local_score(data, ParentSet{node, std::move(parents)}, kind, cache, options.score);
  };

  const std::size_t n = dag.size();
  std::vector<double> current(n);
  for (std::size_t v = 0; v < n; ++v) current[v] = usable(score(v, dag.parents(v)));

  std::vector<double> trace;
  auto total = [&] {
    double t = 0.0;
    for (double c : current) t += c;
    return t;
  };
  trace.push_back(total());

  while (true) {
    const std::vector<Move> moves = legal_moves(dag, options.max_parents);
    double best_gain = kTieEpsilon;
    std::optional<Move> best;
    double best_child = 0.0;
    double best_parent = 0.0;

    for (const Move& m : moves) {
      const auto [from, to] = m.edge;
      double delta = 0.0;
      double child_after = 0.0;
      double parent_after = 0.0;
      switch (m.kind) {
        case MoveKind::Add:
          child_after = usable(score(to, with(dag.parents(to), from)));
          delta = gain(child_after, current[to]);
          break;
        case MoveKind::Delete:
          child_after = usable(score(to, without(dag.parents(to), from)));
          delta = gain(child_after, current[to]);
          break;
        case MoveKind::Reverse: {
          child_after = usable(score(to, without(dag.parents(to), from)));
          parent_after = usable(score(from, with(dag.parents(from), to)));
          const double a = gain(child_after, current[to]);
          const double b = gain(parent_after, current[from]);
          delta = (a == kNegInf || b == kNegInf) ? kNegInf : a + b;
          break;
        }
      }
      if (delta > best_gain) {
        best_gain = delta;
        best = m;
        best_child = child_after;
        best_parent = parent_after;
      }
    }
    if (!best) break;

    apply_move(dag, *best);
    current[best->edge.second] = best_child;
    if (best->kind == MoveKind::Reverse) current[best->edge.first] = best_parent;
    trace.push_back(total());
  }

  ScoredNetwork out = network_score(data, dag, kind, cache, options.score);
  out.trace = std::move(trace);
  return out;
}

void EvoConfig::validate() const {
  if (population_size < 2) throw InputError("population size must be at least 2");
  if (tournament_size < 1 || tournament_size > population_size)
    throw InputError("tournament size must lie in [1, population size]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
    throw InputError("mutation rate must lie in [0, 1]");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
    throw InputError("crossover rate must lie in [0, 1]");
}

void repair(Dag& dag, std::mt19937_64& rng, std::optional<std::size_t> max_parents) {
  for (auto cycle = dag.find_cycle(); !cycle.empty(); cycle = dag.find_cycle()) {
    std::uniform_int_distribution<std::size_t> pick(0, cycle.size() - 1);
    const Edge e = cycle[pick(rng)];
    dag.remove_edge(e.first, e.second);
  }
  if (!max_parents) return;
  for (std::size_t v = 0; v < dag.size(); ++v) {
    while (dag.parents(v).size() > *max_parents) {
      std::uniform_int_distribution<std::size_t> pick(0, dag.parents(v).size() - 1);
      dag.remove_edge(dag.parents(v)[pick(rng)], v);
    }
  }
}

Dag random_dag(const Dag& empty, std::mt19937_64& rng, std::optional<std::size_t> max_parents) {
  Dag dag = empty;
  const std::size_t n = dag.size();
  if (n < 2) return dag;
  const double p = std::min(1.0, 2.0 / static_cast<double>(n));
  std::bernoulli_distribution coin(p);
  std::vector<std::vector<std::size_t>> parents(n);
  for (std::size_t from = 0; from < n; ++from)
    for (std::size_t to = 0; to < n; ++to)
      if (dag.kind_allows(from, to) && coin(rng)) parents[to].push_back(from);
  for (std::size_t v = 0; v < n; ++v) dag.set_parents_unchecked(v, std::move(parents[v]));
  repair(dag, rng, max_parents);
  return dag;
}

Dag crossover(const Dag& a, const Dag& b, std::mt19937_64& rng,
              std::optional<std::size_t> max_parents) {
  Dag child = a;
  std::bernoulli_distribution coin(0.5);
  for (std::size_t v = 0; v < child.size(); ++v)
    child.set_parents_unchecked(v, coin(rng) ? a.parents(v) : b.parents(v));
  repair(child, rng, max_parents);
  return child;
}

bool mutate(Dag& dag, std::mt19937_64& rng, std::optional<std::size_t> max_parents) {
  const auto moves = legal_moves(dag, max_parents);
  if (moves.empty()) return false;
  std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
  apply_move(dag, moves[pick(rng)]);
  return true;
}

ScoredNetwork evolve(const Dataset& data, ScoreKind kind, const EvoConfig& config,
                     const SearchOptions& options) {
  config.validate();
  ScoreCache private_cache;
  ScoreCache* cache = options.cache ? options.cache : &private_cache;
  const Dag empty = empty_search_dag(data, options);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto evaluate = [&](const Dag& dag) {
    return network_score(data, dag, kind, cache, options.score);
  };

  std::vector<Dag> population;
  population.reserve(config.population_size);
  for (std::size_t i = 0; i < config.population_size; ++i)
    population.push_back(random_dag(empty, rng, options.max_parents));
  std::vector<double> fit(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) fit[i] = fitness(evaluate(population[i]));

  auto argmax = [](const std::vector<double>& f) {
    return static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
  };

  Dag best = empty;
  double best_fit = fitness(evaluate(empty));
  {
    const std::size_t i = argmax(fit);
    if (fit[i] != kNegInf || best_fit == kNegInf) {
      best = population[i];
      best_fit = fit[i];
    }
  }
  std::vector<double> trace{best_fit};

  auto tournament = [&] {
    std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
    std::size_t winner = pick(rng);
    for (std::size_t t = 1; t < config.tournament_size; ++t) {
      const std::size_t c = pick(rng);
      if (fit[c] > fit[winner] || (fit[c] == fit[winner] && c < winner)) winner = c;
    }
    return winner;
  };

  std::size_t stagnant = 0;
  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    if (config.stagnation_limit > 0 && stagnant >= config.stagnation_limit) break;

    std::vector<Dag> next;
    next.reserve(population.size());
    next.push_back(population[argmax(fit)]);
    while (next.size() < population.size()) {
      const std::size_t a = tournament();
      Dag child = population[a];
      if (unit(rng) < config.crossover_rate) {
        const std::size_t b = tournament();
        child = crossover(population[a], population[b], rng, options.max_parents);
      }
      if (unit(rng) < config.mutation_rate) mutate(child, rng, options.max_parents);
      next.push_back(std::move(child));
    }
    population = std::move(next);
    for (std::size_t i = 0; i < population.size(); ++i) fit[i] = fitness(evaluate(population[i]));

    const std::size_t i = argmax(fit);
    if (fit[i] > best_fit + kTieEpsilon || (best_fit == kNegInf && fit[i] != kNegInf)) {
      best = population[i];
      best_fit = fit[i];
      stagnant = 0;
    } else {
      ++stagnant;
    }
    trace.push_back(best_fit);
  }

  ScoredNetwork out = evaluate(best);
  out.trace = std::move(trace);
  return out;
}

}  // namespace mixbn
