#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mixbn {

enum class VariableKind { Discrete, Continuous };

std::string_view to_string(VariableKind kind);
VariableKind parse_variable_kind(std::string_view text);

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::Continuous;
  /// Code -> label map for discrete variables; empty for continuous ones.
  std::vector<std::string> labels;

  std::size_t cardinality() const { return labels.size(); }
  bool is_discrete() const { return kind == VariableKind::Discrete; }
};

using Schema = std::vector<Variable>;

/// One observation, laid out per variable. Discrete entries live in
/// `codes`, continuous entries in `values`; the other slot is unused.
struct Row {
  std::vector<int> codes;
  std::vector<double> values;
};

/// Column-typed table of complete observations. Immutable after
/// construction; discrete columns hold dense codes 0..k-1.
class Dataset {
 public:
  Dataset() = default;

  /// `codes[c]` must be populated for discrete columns and `values[c]` for
  /// continuous ones. Throws InputError when any invariant is violated.
  Dataset(Schema schema, std::vector<std::vector<int>> codes,
          std::vector<std::vector<double>> values);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return schema_.size(); }

  const Schema& schema() const { return schema_; }
  const Variable& variable(std::size_t col) const { return schema_.at(col); }
  VariableKind kind(std::size_t col) const { return schema_.at(col).kind; }
  std::vector<std::string> names() const;
  std::vector<VariableKind> kinds() const;

  std::span<const int> codes(std::size_t col) const;
  std::span<const double> values(std::size_t col) const;

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  /// Text of a cell: the category label or the number with 17 significant
  /// digits.
  std::string cell_text(std::size_t col, std::size_t row) const;

  Row row(std::size_t r) const;
  Dataset select_rows(std::span<const std::size_t> rows) const;

  bool has_continuous() const;
  bool has_discrete() const;

 private:
  Schema schema_;
  std::vector<std::vector<int>> codes_;
  std::vector<std::vector<double>> values_;
  std::size_t n_rows_ = 0;
};

/// Incremental construction, mostly for programmatic data and tests.
class DatasetBuilder {
 public:
  /// Codes must be dense in 0..k-1; labels default to "0".."k-1".
  DatasetBuilder& discrete(std::string name, std::vector<int> codes,
                           std::vector<std::string> labels = {});
  /// Raw category strings, coded in sorted label order.
  DatasetBuilder& categorical(std::string name,
                              const std::vector<std::string>& raw);
  DatasetBuilder& continuous(std::string name, std::vector<double> values);

  Dataset build() const;

 private:
  Schema schema_;
  std::vector<std::vector<int>> codes_;
  std::vector<std::vector<double>> values_;
};

using KindMap = std::map<std::string, VariableKind, std::less<>>;

struct LoadReport {
  /// Zero-based data-row indices (header excluded) dropped on ingestion.
  std::vector<std::size_t> rejected_rows;
};

/// Parses a comma-separated table with a header row. Without `schema`, a
/// column is Continuous when every present cell parses as a finite
/// number. Rows with missing or unparseable cells are dropped and listed
/// in `report`.
Dataset parse_csv(std::istream& in, const KindMap* schema = nullptr,
                  LoadReport* report = nullptr);
Dataset load_csv(const std::filesystem::path& path,
                 const KindMap* schema = nullptr,
                 LoadReport* report = nullptr);

/// Two-column (name, kind) schema file. A header row is optional.
KindMap load_schema_csv(const std::filesystem::path& path);

/// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_csv_record(std::string_view line);
std::string quote_csv_field(std::string_view field);

/// Re-express `data` in the coding of `schema`: names must match,
/// discrete labels are remapped by text. Throws InputError on mismatch.
Dataset align_to_schema(const Dataset& data, const Schema& schema);

struct DiscretizationMap {
  std::string column;
  /// Strictly increasing. A value v falls in bin b = #{cuts < v}.
  std::vector<double> cut_points;
  /// Mean of the training values in each bin; used to decode bins.
  std::vector<double> bin_means;

  std::size_t bins() const { return cut_points.size() + 1; }
  int apply(double value) const;
  double decode(int bin) const;
};

std::string bin_label(int bin);

struct Discretization {
  Dataset data;
  std::vector<DiscretizationMap> maps;
  std::vector<std::string> warnings;
};

/// Equal-frequency binning of every continuous column into at most `k`
/// bins. Cut points are the order statistics at index ceil(i*n/k)-1;
/// duplicates and cuts at the column maximum are dropped.
Discretization equal_frequency_discretize(const Dataset& data, std::size_t k);

/// Applies previously fitted maps to the named continuous columns.
Dataset apply_discretization(const Dataset& data,
                             std::span<const DiscretizationMap> maps);

/// Deterministic disjoint row partition with |test| = round(f * n).
std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double test_fraction,
                                             std::uint64_t seed);

std::string format_double(double v);

/// Strict finite-number parse; surrounding blanks are ignored.
std::optional<double> parse_number(std::string_view text);

}  // namespace mixbn
