#include "mixbn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "mixbn/error.hpp"

namespace mixbn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> default_labels(std::size_t k) {
  std::vector<std::string> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = std::to_string(i);
  return out;
}

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::string_view to_string(VariableKind kind) {
  return kind == VariableKind::Discrete ? "discrete" : "continuous";
}

VariableKind parse_variable_kind(std::string_view text) {
  std::string lower(trim(text));
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "discrete" || lower == "d" || lower == "categorical") return VariableKind::Discrete;
  if (lower == "continuous" || lower == "c" || lower == "numeric") return VariableKind::Continuous;
  throw InputError("unknown variable kind '" + std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(Schema schema, std::vector<std::vector<int>> codes,
                 std::vector<std::vector<double>> values)
    : schema_(std::move(schema)), codes_(std::move(codes)), values_(std::move(values)) {
  const std::size_t n_cols = schema_.size();
  codes_.resize(n_cols);
  values_.resize(n_cols);
  if (n_cols == 0) return;

  std::set<std::string_view> seen;
  bool first = true;
  for (std::size_t c = 0; c < n_cols; ++c) {
    const Variable& var = schema_[c];
    if (!seen.insert(var.name).second)
      throw InputError("duplicate column name '" + var.name + "'");
    std::size_t len = 0;
    if (var.is_discrete()) {
      if (!values_[c].empty())
        throw InputError("discrete column '" + var.name + "' carries real values");
      if (var.labels.empty())
        throw InputError("discrete column '" + var.name + "' has no labels");
      const int k = static_cast<int>(var.labels.size());
      for (int code : codes_[c])
        if (code < 0 || code >= k)
          throw InputError("code out of range in column '" + var.name + "'");
      len = codes_[c].size();
    } else {
      if (!codes_[c].empty() || !var.labels.empty())
        throw InputError("continuous column '" + var.name + "' carries codes");
      for (double v : values_[c])
        if (!std::isfinite(v))
          throw InputError("non-finite value in column '" + var.name + "'");
      len = values_[c].size();
    }
    if (first) {
      n_rows_ = len;
      first = false;
    } else if (len != n_rows_) {
      throw InputError("column '" + var.name + "' has " + std::to_string(len) +
                       " rows, expected " + std::to_string(n_rows_));
    }
  }
}

std::vector<std::string> Dataset::names() const {
  std::vector<std::string> out;
  out.reserve(schema_.size());
  for (const auto& v : schema_) out.push_back(v.name);
  return out;
}

std::vector<VariableKind> Dataset::kinds() const {
  std::vector<VariableKind> out;
  out.reserve(schema_.size());
  for (const auto& v : schema_) out.push_back(v.kind);
  return out;
}

std::span<const int> Dataset::codes(std::size_t col) const {
  if (!variable(col).is_discrete())
    throw std::logic_error("codes() on continuous column '" + variable(col).name + "'");
  return codes_[col];
}

std::span<const double> Dataset::values(std::size_t col) const {
  if (variable(col).is_discrete())
    throw std::logic_error("values() on discrete column '" + variable(col).name + "'");
  return values_[col];
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
  for (std::size_t c = 0; c < schema_.size(); ++c)
    if (schema_[c].name == name) return c;
  return std::nullopt;
}

std::size_t Dataset::index_of(std::string_view name) const {
  if (auto c = find(name)) return *c;
  throw InputError("unknown variable '" + std::string(name) + "'");
}

std::string Dataset::cell_text(std::size_t col, std::size_t row) const {
  const Variable& var = variable(col);
  if (var.is_discrete()) return var.labels[static_cast<std::size_t>(codes_[col][row])];
  return format_double(values_[col][row]);
}

Row Dataset::row(std::size_t r) const {
  Row out;
  out.codes.assign(n_cols(), 0);
  out.values.assign(n_cols(), 0.0);
  for (std::size_t c = 0; c < n_cols(); ++c) {
    if (schema_[c].is_discrete())
      out.codes[c] = codes_[c][r];
    else
      out.values[c] = values_[c][r];
  }
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<int>> codes(n_cols());
  std::vector<std::vector<double>> values(n_cols());
  for (std::size_t c = 0; c < n_cols(); ++c) {
    if (schema_[c].is_discrete()) {
      codes[c].reserve(rows.size());
      for (std::size_t r : rows) codes[c].push_back(codes_[c].at(r));
    } else {
      values[c].reserve(rows.size());
      for (std::size_t r : rows) values[c].push_back(values_[c].at(r));
    }
  }
  return Dataset(schema_, std::move(codes), std::move(values));
}

bool Dataset::has_continuous() const {
  return std::any_of(schema_.begin(), schema_.end(),
                     [](const Variable& v) { return !v.is_discrete(); });
}

bool Dataset::has_discrete() const {
  return std::any_of(schema_.begin(), schema_.end(),
                     [](const Variable& v) { return v.is_discrete(); });
}

// ---------------------------------------------------------------------------
// DatasetBuilder

DatasetBuilder& DatasetBuilder::discrete(std::string name, std::vector<int> codes,
                                         std::vector<std::string> labels) {
  if (labels.empty()) {
    int max_code = -1;
    for (int c : codes) max_code = std::max(max_code, c);
    labels = default_labels(static_cast<std::size_t>(max_code + 1));
  }
  schema_.push_back({std::move(name), VariableKind::Discrete, std::move(labels)});
  codes_.push_back(std::move(codes));
  values_.emplace_back();
  return *this;
}

DatasetBuilder& DatasetBuilder::categorical(std::string name,
                                            const std::vector<std::string>& raw) {
  std::vector<std::string> labels(raw.begin(), raw.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::vector<int> codes;
  codes.reserve(raw.size());
  for (const auto& s : raw)
    codes.push_back(static_cast<int>(std::lower_bound(labels.begin(), labels.end(), s) -
                                     labels.begin()));
  return discrete(std::move(name), std::move(codes), std::move(labels));
}

DatasetBuilder& DatasetBuilder::continuous(std::string name, std::vector<double> values) {
  schema_.push_back({std::move(name), VariableKind::Continuous, {}});
  codes_.emplace_back();
  values_.push_back(std::move(values));
  return *this;
}

Dataset DatasetBuilder::build() const { return Dataset(schema_, codes_, values_); }

// ---------------------------------------------------------------------------
// CSV

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (quoted) throw InputError("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

Dataset parse_csv(std::istream& in, const KindMap* schema, LoadReport* report) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV: missing header row");
  std::vector<std::string> header = split_csv_record(line);
  for (auto& h : header) h = std::string(trim(h));
  const std::size_t n_cols = header.size();

  std::vector<std::vector<std::string>> cells(n_cols);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_record(line);
    if (fields.size() != n_cols)
      throw InputError("malformed CSV: line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(n_cols));
    for (std::size_t c = 0; c < n_cols; ++c) cells[c].push_back(std::string(trim(fields[c])));
  }
  const std::size_t n_raw = n_cols ? cells[0].size() : 0;
  if (n_raw == 0) throw InputError("empty dataset: no data rows");

  std::vector<VariableKind> kinds(n_cols);
  if (schema) {
    for (const auto& [name, kind] : *schema)
      if (std::find(header.begin(), header.end(), name) == header.end())
        throw InputError("schema names unknown column '" + name + "'");
    for (std::size_t c = 0; c < n_cols; ++c) {
      auto it = schema->find(header[c]);
      if (it == schema->end())
        throw InputError("schema does not cover column '" + header[c] + "'");
      kinds[c] = it->second;
    }
  } else {
    for (std::size_t c = 0; c < n_cols; ++c) {
      bool numeric = true;
      bool any = false;
      for (const auto& s : cells[c]) {
        if (s.empty()) continue;
        any = true;
        if (!parse_number(s)) {
          numeric = false;
          break;
        }
      }
      kinds[c] = (numeric && any) ? VariableKind::Continuous : VariableKind::Discrete;
    }
  }

  std::vector<char> keep(n_raw, 1);
  std::vector<std::vector<double>> parsed(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (kinds[c] == VariableKind::Continuous) parsed[c].assign(n_raw, 0.0);
    for (std::size_t r = 0; r < n_raw; ++r) {
      const auto& s = cells[c][r];
      if (s.empty()) {
        keep[r] = 0;
      } else if (kinds[c] == VariableKind::Continuous) {
        if (auto v = parse_number(s))
          parsed[c][r] = *v;
        else
          keep[r] = 0;
      }
    }
  }

  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < n_raw; ++r) {
    if (keep[r])
      kept.push_back(r);
    else if (report)
      report->rejected_rows.push_back(r);
  }
  if (kept.empty()) throw InputError("empty dataset: every row was rejected");

  DatasetBuilder builder;
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (kinds[c] == VariableKind::Continuous) {
      std::vector<double> vals;
      vals.reserve(kept.size());
      for (std::size_t r : kept) vals.push_back(parsed[c][r]);
      builder.continuous(header[c], std::move(vals));
    } else {
      std::vector<std::string> raw;
      raw.reserve(kept.size());
      for (std::size_t r : kept) raw.push_back(cells[c][r]);
      builder.categorical(header[c], raw);
    }
  }
  return builder.build();
}

Dataset load_csv(const std::filesystem::path& path, const KindMap* schema, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return parse_csv(in, schema, report);
}

KindMap load_schema_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema '" + path.string() + "'");
  KindMap out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_record(line);
    if (fields.size() != 2) throw InputError("schema rows must have two fields: name,kind");
    const std::string name(trim(fields[0]));
    const std::string kind(trim(fields[1]));
    if (first) {
      first = false;
      if (kind == "kind" || kind == "type") continue;
    }
    out[name] = parse_variable_kind(kind);
  }
  if (out.empty()) throw InputError("schema file is empty");
  return out;
}

Dataset align_to_schema(const Dataset& data, const Schema& schema) {
  std::vector<std::vector<int>> codes(schema.size());
  std::vector<std::vector<double>> values(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const Variable& target = schema[c];
    const auto src = data.find(target.name);
    if (!src) throw InputError("data lacks variable '" + target.name + "'");
    const Variable& have = data.variable(*src);
    if (target.is_discrete()) {
      std::vector<int> remap(have.labels.size(), -1);
      if (!have.is_discrete()) {
        // Numeric-looking categories are inferred as continuous; recover them by text.
        auto vals = data.values(*src);
        codes[c].reserve(vals.size());
        for (double v : vals) {
          std::string text = format_double(v);
          auto it = std::find_if(target.labels.begin(), target.labels.end(),
                                 [&](const std::string& l) {
                                   auto p = parse_number(l);
                                   return p && *p == v;
                                 });
          if (it == target.labels.end())
            throw InputError("value " + text + " is not a category of '" + target.name + "'");
          codes[c].push_back(static_cast<int>(it - target.labels.begin()));
        }
        continue;
      }
      for (std::size_t i = 0; i < have.labels.size(); ++i) {
        auto it = std::find(target.labels.begin(), target.labels.end(), have.labels[i]);
        if (it != target.labels.end()) remap[i] = static_cast<int>(it - target.labels.begin());
      }
      auto src_codes = data.codes(*src);
      codes[c].reserve(src_codes.size());
      for (int code : src_codes) {
        const int mapped = remap[static_cast<std::size_t>(code)];
        if (mapped < 0)
          throw InputError("category '" + have.labels[static_cast<std::size_t>(code)] +
                           "' unknown for variable '" + target.name + "'");
        codes[c].push_back(mapped);
      }
    } else {
      if (have.is_discrete())
        throw InputError("variable '" + target.name + "' must be continuous");
      auto v = data.values(*src);
      values[c].assign(v.begin(), v.end());
    }
  }
  return Dataset(schema, std::move(codes), std::move(values));
}

// ---------------------------------------------------------------------------
// Discretization

int DiscretizationMap::apply(double value) const {
  return static_cast<int>(std::lower_bound(cut_points.begin(), cut_points.end(), value) -
                          cut_points.begin());
}

double DiscretizationMap::decode(int bin) const {
  return bin_means.at(static_cast<std::size_t>(bin));
}

std::string bin_label(int bin) { return "bin" + std::to_string(bin); }

Discretization equal_frequency_discretize(const Dataset& data, std::size_t k) {
  if (k < 2) throw InputError("bin count must be at least 2");
  Discretization out;
  Schema schema = data.schema();
  std::vector<std::vector<int>> codes(data.n_cols());
  const std::size_t n = data.n_rows();

  for (std::size_t c = 0; c < data.n_cols(); ++c) {
    if (data.variable(c).is_discrete()) {
      auto src = data.codes(c);
      codes[c].assign(src.begin(), src.end());
      continue;
    }
    auto col = data.values(c);
    std::vector<double> sorted(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());

    DiscretizationMap map;
    map.column = schema[c].name;
    if (n > 0) {
      for (std::size_t i = 1; i < k; ++i) {
        const std::size_t idx = (i * n + k - 1) / k - 1;  // ceil(i*n/k) - 1
        const double cut = sorted[idx];
        if (cut >= sorted.back()) break;
        if (map.cut_points.empty() || cut > map.cut_points.back()) map.cut_points.push_back(cut);
      }
    }
    const std::size_t bins = map.bins();
    if (bins < k)
      out.warnings.push_back("column '" + map.column + "': " + std::to_string(bins) +
                             " bin(s) instead of " + std::to_string(k) +
                             " (too few distinct values)");

    std::vector<double> sums(bins, 0.0);
    std::vector<std::size_t> counts(bins, 0);
    codes[c].reserve(n);
    for (double v : col) {
      const int b = map.apply(v);
      codes[c].push_back(b);
      sums[static_cast<std::size_t>(b)] += v;
      ++counts[static_cast<std::size_t>(b)];
    }
    map.bin_means.resize(bins);
    for (std::size_t b = 0; b < bins; ++b)
      map.bin_means[b] = counts[b] ? sums[b] / static_cast<double>(counts[b]) : 0.0;

    schema[c].kind = VariableKind::Discrete;
    schema[c].labels.clear();
    for (std::size_t b = 0; b < bins; ++b) schema[c].labels.push_back(bin_label(static_cast<int>(b)));
    out.maps.push_back(std::move(map));
  }
  out.data = Dataset(std::move(schema), std::move(codes), {});
  return out;
}

Dataset apply_discretization(const Dataset& data, std::span<const DiscretizationMap> maps) {
  Schema schema = data.schema();
  std::vector<std::vector<int>> codes(data.n_cols());
  std::vector<std::vector<double>> values(data.n_cols());
  for (std::size_t c = 0; c < data.n_cols(); ++c) {
    const auto map = std::find_if(maps.begin(), maps.end(), [&](const DiscretizationMap& m) {
      return m.column == schema[c].name;
    });
    if (schema[c].is_discrete()) {
      if (map != maps.end())
        throw InputError("column '" + schema[c].name + "' is already discrete");
      auto src = data.codes(c);
      codes[c].assign(src.begin(), src.end());
      continue;
    }
    if (map == maps.end()) {
      auto src = data.values(c);
      values[c].assign(src.begin(), src.end());
      continue;
    }
    for (double v : data.values(c)) codes[c].push_back(map->apply(v));
    schema[c].kind = VariableKind::Discrete;
    schema[c].labels.clear();
    for (std::size_t b = 0; b < map->bins(); ++b)
      schema[c].labels.push_back(bin_label(static_cast<int>(b)));
  }
  return Dataset(std::move(schema), std::move(codes), std::move(values));
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InputError("test fraction must lie in (0, 1)");
  const std::size_t n = data.n_rows();
  if (n < 10) throw InputError("train/test split needs at least 10 rows");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(gen)]);
  }
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.select_rows(train), data.select_rows(test)};
}

}  // namespace mixbn
