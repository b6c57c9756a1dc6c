#include <atomic>
#include <thread>

#include "doctest.h"
#include "mixbn/error.hpp"
#include "mixbn/scoring.hpp"
#include "support.hpp"

using namespace mixbn;
using testsupport::kTwoPiE;

namespace {

double entropy_of(const std::vector<std::vector<int>>& cols) {
  std::vector<std::span<const int>> spans;
  for (const auto& c : cols) spans.emplace_back(c);
  return discrete_entropy(spans);
}

std::vector<std::size_t> idx(std::initializer_list<std::size_t> l) { return l; }

}  // namespace

TEST_CASE("discrete entropy examples") {
  std::vector<int> fair(1000);
  for (std::size_t i = 0; i < fair.size(); ++i) fair[i] = i < 500 ? 0 : 1;
  CHECK(entropy_of({fair}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(entropy_of({std::vector<int>(10, 3)}) == 0.0);
  CHECK(entropy_of({{0, 0, 0, 1}}) == doctest::Approx(0.562335).epsilon(1e-6));
  CHECK_THROWS(entropy_of({}));
  CHECK_THROWS(entropy_of({{0, 1}, {0}}));
}

TEST_CASE("discrete entropy matches the contingency-table oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cols = 1 + rng() % 3;
    const std::size_t n = 5 + rng() % 40;
    std::vector<std::vector<int>> data(cols, std::vector<int>(n));
    for (auto& c : data)
      for (auto& x : c) x = static_cast<int>(rng() % 4);
    CHECK(std::abs(entropy_of(data) - testsupport::brute_entropy(data)) < 1e-12);
  }
}

TEST_CASE("gaussian entropy closed forms") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  CHECK(gaussian_entropy(one).value == doctest::Approx(1.418939).epsilon(1e-6));
  CHECK(gaussian_entropy(Eigen::MatrixXd::Identity(2, 2)).value ==
        doctest::Approx(2.837877).epsilon(1e-6));
  Eigen::MatrixXd s(2, 2);
  s << 4, 0, 0, 1;
  CHECK(gaussian_entropy(s).value == doctest::Approx(3.531024).epsilon(1e-6));
  CHECK_FALSE(gaussian_entropy(s).jittered);
}

TEST_CASE("gaussian entropy agrees with an elimination log-determinant") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 4;
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = z(rng);
    Eigen::MatrixXd cov = a * a.transpose() + Eigen::MatrixXd::Identity(d, d);
    std::vector<std::vector<double>> c(d, std::vector<double>(d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) c[i][j] = cov(i, j);
    CHECK(std::abs(gaussian_entropy(cov).value - testsupport::gaussian_entropy_oracle(c)) < 1e-9);
  }
}

TEST_CASE("singular covariance is jittered, not fatal") {
  Eigen::MatrixXd s(2, 2);
  s << 1, 1, 1, 1;
  const auto e = gaussian_entropy(s);
  CHECK(e.jittered);
  CHECK(std::isfinite(e.value));
}

TEST_CASE("gaussian entropy input checks") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(gaussian_entropy(asym), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_entropy(Eigen::MatrixXd(2, 3)), std::invalid_argument);
  Eigen::MatrixXd bad(1, 1);
  bad << std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(gaussian_entropy(bad), NumericalError);
}

TEST_CASE("mixed MI: independent pair is near zero") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  std::vector<double> x(10000);
  std::vector<int> y(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = z(rng);
    y[i] = static_cast<int>(rng() % 2);
  }
  const auto d = DatasetBuilder().continuous("X", x).discrete("Y", y).build();
  CHECK(std::abs(mixed_mi(d, idx({0, 1})).value) < 0.02);
}

TEST_CASE("mixed MI: strongly dependent pair follows the per-group closed form") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> z(0.0, 0.1);
  const std::size_t n = 10000;
  std::vector<double> x(n);
  std::vector<int> y(n);
  std::vector<std::size_t> g0, g1, all(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    x[i] = 10.0 * y[i] + z(rng);
    (y[i] ? g1 : g0).push_back(i);
    all[i] = i;
  }
  const auto d = DatasetBuilder().continuous("X", x).discrete("Y", y).build();
  const double h_full = testsupport::gaussian_entropy_oracle(testsupport::mle_cov({x}, all));
  const double h0 = testsupport::gaussian_entropy_oracle(testsupport::mle_cov({x}, g0));
  const double h1 = testsupport::gaussian_entropy_oracle(testsupport::mle_cov({x}, g1));
  const double expected = h_full - 0.5 * h0 - 0.5 * h1;
  const auto mi = mixed_mi(d, idx({0, 1}));
  CHECK(mi.value == doctest::Approx(expected).epsilon(1e-10));
  CHECK(mi.value > 3.0);
  // The population value is close to H(X) - 1/2 ln(2 pi e 0.01).
  CHECK(mi.value == doctest::Approx(h_full - 0.5 * std::log(kTwoPiE * 0.01)).epsilon(0.01));
}

TEST_CASE("mixed MI: all-discrete copy is ln 2; single continuous column is its entropy") {
  std::vector<int> coin(1000);
  for (std::size_t i = 0; i < coin.size(); ++i) coin[i] = static_cast<int>(i % 2);
  const auto d = DatasetBuilder().discrete("X", coin).discrete("Y", coin).build();
  CHECK(mixed_mi(d, idx({0, 1})).value == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const auto c = testsupport::chain_data(500, 1);
  std::vector<std::size_t> all(500);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<double> a(c.values(0).begin(), c.values(0).end());
  CHECK(mixed_mi(c, idx({0})).value ==
        doctest::Approx(testsupport::gaussian_entropy_oracle(testsupport::mle_cov({a}, all)))
            .epsilon(1e-12));
  CHECK_THROWS(mixed_mi(c, std::span<const std::size_t>{}));
}

TEST_CASE("singleton groups are flagged") {
  const auto d = DatasetBuilder()
                     .continuous("X", {1.0, 2.0, 3.0, 4.0, 5.0})
                     .discrete("Y", {0, 0, 0, 0, 1})
                     .build();
  CHECK(mixed_mi(d, idx({0, 1})).pathological);
  const auto mi = local_score(d, ParentSet::make(0, {1}), ScoreKind::MI);
  CHECK(mi.rejected);
  const auto bic = local_score(d, ParentSet::make(0, {1}), ScoreKind::BIC);
  CHECK_FALSE(bic.rejected);
  CHECK(std::isfinite(bic.value));

  ScoreOptions strict;
  strict.min_group_size = 5;
  const auto d2 = DatasetBuilder()
                      .continuous("X", {1, 2, 3, 4, 5, 6, 7, 8})
                      .discrete("Y", {0, 0, 0, 0, 1, 1, 1, 1})
                      .build();
  CHECK_FALSE(local_score(d2, ParentSet::make(0, {1}), ScoreKind::MI).rejected);
  CHECK(local_score(d2, ParentSet::make(0, {1}), ScoreKind::MI, nullptr, strict).rejected);
}

TEST_CASE("local score conventions") {
  const auto d = testsupport::independent_data(3000, 3);
  for (std::size_t v = 0; v < 3; ++v) {
    const auto ps = ParentSet::make(v, {});
    CHECK(local_score(d, ps, ScoreKind::MI).value ==
          doctest::Approx(mixed_mi(d, idx({v})).value).epsilon(1e-12));
    CHECK(local_score(d, ps, ScoreKind::LL).value == 0.0);
  }
  CHECK(std::abs(local_score(d, ParentSet::make(1, {2}), ScoreKind::LL).value) < 0.01);
  CHECK(std::abs(local_score(d, ParentSet::make(1, {0}), ScoreKind::LL).value) < 0.01);
  CHECK(std::abs(local_score(d, ParentSet::make(0, {}), ScoreKind::LL).value) < 0.01);
  CHECK_THROWS(ParentSet::make(1, {1}));
}

TEST_CASE("all-discrete LL equals brute-force conditional MI") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 40 + rng() % 60;
    std::vector<std::vector<int>> cols(3, std::vector<int>(n));
    for (auto& c : cols)
      for (auto& x : c) x = static_cast<int>(rng() % 3);
    // Make sure every column uses all three codes.
    for (auto& c : cols) c[0] = 0, c[1] = 1, c[2] = 2;
    const auto d =
        DatasetBuilder().discrete("a", cols[0]).discrete("b", cols[1]).discrete("c", cols[2]).build();
    const auto ll = local_score(d, ParentSet::make(0, {1, 2}), ScoreKind::LL);
    CHECK(std::abs(ll.value - testsupport::brute_mi(cols[0], {cols[1], cols[2]})) < 1e-12);
  }
}

TEST_CASE("BIC and AIC penalties in per-observation units") {
  const auto d = testsupport::independent_data(2000, 4);
  const auto ps = ParentSet::make(1, {0, 2});  // continuous X, parents D (3 levels) and Y
  CHECK(parameter_count(d, ps) == 3 * (1 + 2));
  CHECK(parameter_count(d, ParentSet::make(0, {})) == 2);
  const double ll = local_score(d, ps, ScoreKind::LL).value;
  const double n = 2000.0;
  CHECK(local_score(d, ps, ScoreKind::BIC).value ==
        doctest::Approx(ll - 9.0 * std::log(n) / (2.0 * n)).epsilon(1e-12));
  CHECK(local_score(d, ps, ScoreKind::AIC).value ==
        doctest::Approx(ll - 9.0 / n).epsilon(1e-12));
}

TEST_CASE("network score sums locals") {
  const auto d = testsupport::chain_data(3000, 7);
  Dag empty = Dag::empty_for(d);
  CHECK(network_score(d, empty, ScoreKind::LL).total == 0.0);
  double sum_h = 0.0;
  for (std::size_t v = 0; v < 3; ++v) sum_h += mixed_mi(d, idx({v})).value;
  CHECK(network_score(d, empty, ScoreKind::MI).total == doctest::Approx(sum_h).epsilon(1e-12));

  Dag chain = empty;
  chain.add_edge(0, 1);
  chain.add_edge(1, 2);
  CHECK(network_score(d, chain, ScoreKind::MI).total > network_score(d, empty, ScoreKind::MI).total);

  Dag cyclic = chain;
  cyclic.set_parents_unchecked(0, {2});
  CHECK_THROWS_AS(network_score(d, cyclic, ScoreKind::MI), std::invalid_argument);
}

TEST_CASE("rejected locals are excluded and mark the network") {
  const auto d = DatasetBuilder()
                     .continuous("X", {1.0, 2.0, 3.0, 4.0, 5.0, 6.0})
                     .discrete("Y", {0, 0, 0, 0, 0, 1})
                     .build();
  Dag g = Dag::empty_for(d);
  g.add_edge(1, 0);
  const auto s = network_score(d, g, ScoreKind::MI);
  CHECK(s.rejected);
  CHECK(s.local[0].rejected);
  CHECK(s.total == doctest::Approx(s.local[1].value));
}

TEST_CASE("MI local score is monotone under parent supersets") {
  const auto d = testsupport::independent_data(2000, 8);
  const double base = local_score(d, ParentSet::make(1, {}), ScoreKind::MI).value;
  const double one = local_score(d, ParentSet::make(1, {2}), ScoreKind::MI).value;
  const double two = local_score(d, ParentSet::make(1, {0, 2}), ScoreKind::MI).value;
  CHECK(one >= base - 1e-9);
  CHECK(two >= one - 1e-9);
}

TEST_CASE("cache is transparent and safe to share") {
  const auto d = testsupport::independent_data(1000, 9);
  ScoreCache cache;
  const auto ps = ParentSet::make(1, {0, 2});
  const auto direct = local_score(d, ps, ScoreKind::BIC);
  const auto first = local_score(d, ps, ScoreKind::BIC, &cache);
  const auto second = local_score(d, ps, ScoreKind::BIC, &cache);
  CHECK(direct.value == first.value);
  CHECK(first.value == second.value);
  CHECK(cache.hits() == 1);
  CHECK(cache.size() == 1);
  // Different kinds never collide.
  CHECK(local_score(d, ps, ScoreKind::AIC, &cache).value != second.value);

  std::vector<std::thread> workers;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t)
    workers.emplace_back([&] {
      for (std::size_t v = 0; v < 3; ++v)
        for (std::size_t p = 0; p < 3; ++p) {
          if (p == v) continue;
          const auto q = ParentSet::make(v, {p});
          if (local_score(d, q, ScoreKind::LL, &cache).value != local_score(d, q, ScoreKind::LL).value)
            ++mismatches;
        }
    });
  for (auto& w : workers) w.join();
  CHECK(mismatches == 0);
}

TEST_CASE("score kinds parse") {
  CHECK(parse_score_kind("bic") == ScoreKind::BIC);
  CHECK(to_string(ScoreKind::AIC) == "aic");
  CHECK_THROWS_AS(parse_score_kind("bogus"), InputError);
}
