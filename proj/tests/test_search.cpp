#include "doctest.h"
#include "mixbn/error.hpp"
#include "mixbn/search.hpp"
#include "support.hpp"

using namespace mixbn;

namespace {

bool adjacent(const Dag& g, std::size_t u, std::size_t v) {
  return g.has_edge(u, v) || g.has_edge(v, u);
}

}  // namespace

TEST_CASE("hill climbing recovers the chain skeleton") {
  const auto d = testsupport::chain_data(3000, 1);
  for (ScoreKind kind : {ScoreKind::MI, ScoreKind::BIC}) {
    const auto r = hill_climb(d, kind);
    CHECK(adjacent(r.dag, 0, 1));
    CHECK(adjacent(r.dag, 1, 2));
    if (kind == ScoreKind::BIC) CHECK_FALSE(adjacent(r.dag, 0, 2));
  }
}

TEST_CASE("hill climbing recovers the collider exactly") {
  const auto d = testsupport::collider_data(3000, 2);
  const auto r = hill_climb(d, ScoreKind::BIC);
  CHECK(r.dag.has_edge(0, 2));
  CHECK(r.dag.has_edge(1, 2));
  CHECK(r.dag.edge_count() == 2);
}

TEST_CASE("penalized search leaves independent columns unconnected") {
  const auto d = testsupport::independent_data(3000, 3);
  CHECK(hill_climb(d, ScoreKind::BIC).dag.edge_count() == 0);
}

TEST_CASE("plug-in LL always finds a small positive gain") {
  // Sample MI between independent columns is positive, so unpenalized LL
  // accepts edges that a penalized score refuses.
  const auto d = testsupport::independent_data(3000, 3);
  const auto r = hill_climb(d, ScoreKind::LL);
  CHECK(r.total >= 0.0);
  CHECK(r.total < 0.01);
}

TEST_CASE("hill climbing trace increases strictly") {
  const auto d = testsupport::chain_data(1000, 4);
  const auto r = hill_climb(d, ScoreKind::MI);
  REQUIRE_FALSE(r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] > r.trace[i - 1] + kTieEpsilon);
  CHECK(r.trace.back() == doctest::Approx(r.total));
  CHECK(r.dag.validation_error().empty());
}

TEST_CASE("hill climbing is deterministic and honours a start graph") {
  const auto d = testsupport::chain_data(800, 5);
  CHECK(hill_climb(d, ScoreKind::BIC).dag == hill_climb(d, ScoreKind::BIC).dag);
  Dag start = Dag::empty_for(d);
  start.add_edge(0, 2);
  const auto r = hill_climb(d, ScoreKind::BIC, start);
  CHECK(r.total >= network_score(d, start, ScoreKind::BIC).total);
}

TEST_CASE("search never adopts rejected parent sets") {
  // Y has a singleton level, so any family with Y as parent of X is rejected.
  std::vector<double> x(40);
  std::vector<int> y(40, 0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i % 7);
  y[39] = 1;
  const auto d = DatasetBuilder().continuous("X", x).discrete("Y", y).build();
  const auto r = hill_climb(d, ScoreKind::MI);
  CHECK_FALSE(r.rejected);
  CHECK_FALSE(r.dag.has_edge(1, 0));
}

TEST_CASE("max parents is respected") {
  const auto d = testsupport::collider_data(1000, 6);
  SearchOptions o;
  o.max_parents = 1;
  const auto r = hill_climb(d, ScoreKind::MI, std::nullopt, o);
  for (std::size_t v = 0; v < 3; ++v) CHECK(r.dag.parents(v).size() <= 1);
}

TEST_CASE("constraint kinds apply to discretized data") {
  const auto d = testsupport::independent_data(500, 7);
  const auto disc = equal_frequency_discretize(d, 5);
  SearchOptions o;
  o.constraint_kinds = d.kinds();
  const auto r = hill_climb(disc.data, ScoreKind::MI, std::nullopt, o);
  CHECK_FALSE(r.dag.has_edge(1, 0));
  CHECK_FALSE(r.dag.has_edge(2, 0));
}

TEST_CASE("evolutionary config validation") {
  EvoConfig c;
  CHECK_NOTHROW(c.validate());
  c.population_size = 1;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = EvoConfig{};
  c.tournament_size = 50;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = EvoConfig{};
  c.mutation_rate = 1.5;
  CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("evolution is reproducible and valid") {
  const auto d = testsupport::chain_data(500, 8);
  EvoConfig c;
  c.seed = 17;
  c.generations = 30;
  const auto a = evolve(d, ScoreKind::MI, c);
  const auto b = evolve(d, ScoreKind::MI, c);
  CHECK(a.dag == b.dag);
  CHECK(a.total == b.total);
  CHECK(a.dag.validation_error().empty());
  for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i] >= a.trace[i - 1]);
}

TEST_CASE("zero generations returns the best initial individual") {
  const auto d = testsupport::chain_data(300, 9);
  EvoConfig c;
  c.seed = 3;
  c.generations = 0;
  const auto r = evolve(d, ScoreKind::MI, c);
  CHECK(r.trace.size() == 1);
  CHECK(r.total == doctest::Approx(network_score(d, r.dag, ScoreKind::MI).total));
}

TEST_CASE("evolution matches hill climbing on a chain for most seeds") {
  const auto d = testsupport::chain_data(3000, 10);
  const double hc = hill_climb(d, ScoreKind::MI).total;
  int wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    EvoConfig c;
    c.seed = s;
    c.generations = 50;
    if (evolve(d, ScoreKind::MI, c).total >= hc - 1e-9) ++wins;
  }
  CHECK(wins >= 5);
}

TEST_CASE("operators keep graphs valid") {
  std::mt19937_64 rng(11);
  Dag empty({"a", "b", "c", "d", "e", "f"},
            {VariableKind::Discrete, VariableKind::Discrete, VariableKind::Continuous,
             VariableKind::Continuous, VariableKind::Continuous, VariableKind::Continuous});
  for (int t = 0; t < 100; ++t) {
    Dag x = random_dag(empty, rng, std::nullopt);
    Dag y = random_dag(empty, rng, 2);
    CHECK(x.validation_error().empty());
    CHECK(y.validation_error().empty());
    for (std::size_t v = 0; v < y.size(); ++v) CHECK(y.parents(v).size() <= 2);
    Dag child = crossover(x, y, rng, 2);
    CHECK(child.validation_error().empty());
    for (std::size_t v = 0; v < child.size(); ++v) CHECK(child.parents(v).size() <= 2);
    mutate(child, rng, 2);
    CHECK(child.validation_error().empty());
  }
}

TEST_CASE("repair breaks every cycle") {
  std::mt19937_64 rng(12);
  Dag g({"a", "b", "c"}, {VariableKind::Continuous, VariableKind::Continuous,
                          VariableKind::Continuous});
  g.set_parents_unchecked(0, {2});
  g.set_parents_unchecked(1, {0});
  g.set_parents_unchecked(2, {1});
  repair(g, rng, std::nullopt);
  CHECK(g.is_acyclic());
  CHECK(g.edge_count() == 2);
}
