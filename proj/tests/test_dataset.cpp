#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mixbn/dataset.hpp"
#include "mixbn/error.hpp"
#include "support.hpp"

using namespace mixbn;

namespace {

Dataset parse(const std::string& text, const KindMap* schema = nullptr,
              LoadReport* report = nullptr) {
  std::istringstream in(text);
  return parse_csv(in, schema, report);
}

std::vector<int> codes_of(const Dataset& d, std::size_t col) {
  auto s = d.codes(col);
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("explicit schema fixes column kinds") {
  KindMap schema{{"a", VariableKind::Discrete},
                 {"b", VariableKind::Continuous},
                 {"c", VariableKind::Continuous}};
  const Dataset d = parse("a,b,c\n1,2.5,3\n2,0.5,1\n1,1,1\n", &schema);
  CHECK(d.kinds() == std::vector<VariableKind>{VariableKind::Discrete, VariableKind::Continuous,
                                               VariableKind::Continuous});
  CHECK(d.variable(0).labels == std::vector<std::string>{"1", "2"});
  CHECK(d.n_rows() == 3);
}

TEST_CASE("non-numeric column is inferred discrete") {
  const Dataset d = parse("v,w\nx,1\ny,2\nx,3\n");
  CHECK(d.kind(0) == VariableKind::Discrete);
  CHECK(d.variable(0).cardinality() == 2);
  CHECK(d.kind(1) == VariableKind::Continuous);
  CHECK(codes_of(d, 0) == std::vector<int>{0, 1, 0});
}

TEST_CASE("labels round-trip through codes") {
  const Dataset d = parse("v\nred\nblue\ngreen\nred\n");
  const std::vector<std::string> raw{"red", "blue", "green", "red"};
  for (std::size_t r = 0; r < raw.size(); ++r) CHECK(d.cell_text(0, r) == raw[r]);
}

TEST_CASE("rows with missing or bad cells are rejected and reported") {
  KindMap schema{{"a", VariableKind::Continuous}, {"b", VariableKind::Discrete}};
  LoadReport report;
  const Dataset d = parse("a,b\n1,x\n,y\nfoo,x\n2,\n3,y\n", &schema, &report);
  CHECK(d.n_rows() == 2);
  CHECK(report.rejected_rows == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("malformed input is an error") {
  CHECK_THROWS_AS(parse("a,b\n1,2,3\n"), InputError);
  CHECK_THROWS_AS(parse("a,b\n"), InputError);
  CHECK_THROWS_AS(parse(""), InputError);
  KindMap partial{{"a", VariableKind::Continuous}};
  CHECK_THROWS_AS(parse("a,b\n1,2\n", &partial), InputError);
  KindMap extra{{"a", VariableKind::Continuous}, {"b", VariableKind::Continuous},
                {"z", VariableKind::Continuous}};
  CHECK_THROWS_AS(parse("a,b\n1,2\n", &extra), InputError);
}

TEST_CASE("quoted fields") {
  CHECK(split_csv_record(R"(a,"b,c","d""e")") == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(quote_csv_field("plain") == "plain");
  CHECK(quote_csv_field("a,b") == "\"a,b\"");
}

TEST_CASE("equal-frequency bins on 1..10") {
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto d = DatasetBuilder().continuous("x", v).build();
  const auto disc = equal_frequency_discretize(d, 5);
  CHECK(codes_of(disc.data, 0) == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3, 4, 4});
  CHECK(disc.maps.at(0).cut_points == std::vector<double>{2, 4, 6, 8});
  CHECK(disc.maps.at(0).bin_means == std::vector<double>{1.5, 3.5, 5.5, 7.5, 9.5});
  CHECK(disc.warnings.empty());
  CHECK(disc.data.variable(0).labels.front() == "bin0");
}

TEST_CASE("constant column collapses to one bin with a warning") {
  const auto d = DatasetBuilder().continuous("x", {5, 5, 5, 5}).build();
  const auto disc = equal_frequency_discretize(d, 5);
  CHECK(codes_of(disc.data, 0) == std::vector<int>{0, 0, 0, 0});
  CHECK(disc.maps.at(0).bins() == 1);
  CHECK(disc.warnings.size() == 1);
}

TEST_CASE("normal sample splits into near-equal bins") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  std::vector<double> v(3000);
  for (auto& x : v) x = z(rng);
  const auto disc = equal_frequency_discretize(DatasetBuilder().continuous("x", v).build(), 5);
  std::vector<int> counts(5, 0);
  for (int c : disc.data.codes(0)) ++counts[static_cast<std::size_t>(c)];
  for (int c : counts) CHECK(c == 600);

  // Applying the fitted map to the training column reproduces the codes.
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(disc.maps[0].apply(v[i]) == disc.data.codes(0)[i]);
}

TEST_CASE("ties at a boundary only shift that boundary's count") {
  std::vector<double> v{1, 1, 1, 1, 1, 2, 3, 4, 5, 6};
  const auto disc = equal_frequency_discretize(DatasetBuilder().continuous("x", v).build(), 5);
  const auto& cuts = disc.maps[0].cut_points;
  CHECK(std::is_sorted(cuts.begin(), cuts.end()));
  CHECK(std::adjacent_find(cuts.begin(), cuts.end()) == cuts.end());
  CHECK(disc.data.codes(0)[0] == 0);
  CHECK(disc.data.codes(0)[4] == 0);
}

TEST_CASE("discretize rejects k < 2") {
  const auto d = DatasetBuilder().continuous("x", {1, 2, 3}).build();
  CHECK_THROWS_AS(equal_frequency_discretize(d, 1), InputError);
}

TEST_CASE("train/test split sizes, determinism and disjointness") {
  std::vector<double> v(3000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const auto d = DatasetBuilder().continuous("id", v).build();
  const auto [train, test] = train_test_split(d, 0.1, 42);
  CHECK(train.n_rows() == 2700);
  CHECK(test.n_rows() == 300);

  std::set<double> seen;
  for (double x : train.values(0)) seen.insert(x);
  for (double x : test.values(0)) CHECK(seen.insert(x).second);
  CHECK(seen.size() == 3000);

  const auto [train2, test2] = train_test_split(d, 0.1, 42);
  CHECK(std::equal(test.values(0).begin(), test.values(0).end(), test2.values(0).begin()));
  const auto [train3, test3] = train_test_split(d, 0.1, 43);
  CHECK_FALSE(std::equal(test.values(0).begin(), test.values(0).end(), test3.values(0).begin()));

  const auto small = DatasetBuilder().continuous("id", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}).build();
  const auto [a, b] = train_test_split(small, 0.5, 1);
  CHECK(a.n_rows() == 5);
  CHECK(b.n_rows() == 5);

  CHECK_THROWS_AS(train_test_split(d, 0.0, 1), InputError);
  CHECK_THROWS_AS(train_test_split(d, 1.0, 1), InputError);
}

TEST_CASE("align_to_schema remaps labels by text") {
  const auto src = DatasetBuilder().categorical("c", {"b", "a", "b"}).build();
  Schema target{{"c", VariableKind::Discrete, {"b", "a", "z"}}};
  const auto aligned = align_to_schema(src, target);
  CHECK(codes_of(aligned, 0) == std::vector<int>{0, 1, 0});
  Schema wrong{{"c", VariableKind::Discrete, {"q"}}};
  CHECK_THROWS_AS(align_to_schema(src, wrong), InputError);
}

TEST_CASE("dataset invariants are enforced") {
  Schema s{{"x", VariableKind::Continuous, {}}};
  CHECK_THROWS_AS(Dataset(s, {{}}, {{1.0, std::nan("")}}), InputError);
  Schema ds{{"d", VariableKind::Discrete, {"a", "b"}}};
  CHECK_THROWS_AS(Dataset(ds, {{0, 2}}, {{}}), InputError);
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}
