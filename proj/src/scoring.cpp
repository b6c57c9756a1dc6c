#include "mixbn/scoring.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mixbn/error.hpp"

namespace mixbn {

namespace {

const double kLog2PiE = std::log(2.0 * std::numbers::pi * std::numbers::e);

/// Dense group id per row for the joint configuration of `columns`, plus
/// the configuration of every group in id order.
struct Grouping {
  std::vector<int> id_of_row;
  std::vector<std::vector<int>> configs;
  std::vector<std::size_t> counts;
};

Grouping group_rows(std::span<const std::span<const int>> columns, std::size_t n_rows) {
  Grouping g;
  g.id_of_row.assign(n_rows, 0);
  std::size_t n_groups = 1;
  for (const auto& col : columns) {
    std::unordered_map<std::uint64_t, int> dense;
    dense.reserve(n_groups * 4);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const std::uint64_t key =
          (static_cast<std::uint64_t>(g.id_of_row[r]) << 32) | static_cast<std::uint32_t>(col[r]);
      auto [it, inserted] = dense.try_emplace(key, static_cast<int>(dense.size()));
      g.id_of_row[r] = it->second;
    }
    n_groups = dense.size();
  }
  if (n_rows == 0) n_groups = 0;

  // Renumber groups by lexicographic configuration for a stable order.
  std::vector<std::vector<int>> configs(n_groups);
  std::vector<char> filled(n_groups, 0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto id = static_cast<std::size_t>(g.id_of_row[r]);
    if (filled[id]) continue;
    filled[id] = 1;
    configs[id].reserve(columns.size());
    for (const auto& col : columns) configs[id].push_back(col[r]);
  }
  std::vector<std::size_t> order(n_groups);
  for (std::size_t i = 0; i < n_groups; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return configs[a] < configs[b]; });
  std::vector<int> rank(n_groups);
  for (std::size_t i = 0; i < n_groups; ++i) rank[order[i]] = static_cast<int>(i);
  g.configs.resize(n_groups);
  for (std::size_t i = 0; i < n_groups; ++i) g.configs[i] = std::move(configs[order[i]]);
  g.counts.assign(n_groups, 0);
  for (auto& id : g.id_of_row) {
    id = rank[static_cast<std::size_t>(id)];
    ++g.counts[static_cast<std::size_t>(id)];
  }
  return g;
}

double entropy_of_counts(const std::vector<std::size_t>& counts, std::size_t n) {
  double h = 0.0;
  const double total = static_cast<double>(n);
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

struct SplitBlock {
  std::vector<std::size_t> continuous;
  std::vector<std::size_t> discrete;
};

SplitBlock split_block(const Dataset& data, std::span<const std::size_t> block) {
  SplitBlock s;
  for (std::size_t c : block) {
    if (c >= data.n_cols()) throw std::invalid_argument("block column out of range");
    (data.variable(c).is_discrete() ? s.discrete : s.continuous).push_back(c);
  }
  return s;
}

std::vector<std::span<const int>> code_spans(const Dataset& data,
                                             std::span<const std::size_t> cols) {
  std::vector<std::span<const int>> out;
  out.reserve(cols.size());
  for (std::size_t c : cols) out.push_back(data.codes(c));
  return out;
}

}  // namespace

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::MI: return "mi";
    case ScoreKind::LL: return "ll";
    case ScoreKind::BIC: return "bic";
    case ScoreKind::AIC: return "aic";
  }
  return "?";
}

ScoreKind parse_score_kind(std::string_view text) {
  if (text == "mi") return ScoreKind::MI;
  if (text == "ll") return ScoreKind::LL;
  if (text == "bic") return ScoreKind::BIC;
  if (text == "aic") return ScoreKind::AIC;
  throw InputError("unknown score kind '" + std::string(text) + "'");
}

ParentSet ParentSet::make(std::size_t node, std::vector<std::size_t> parents) {
  std::sort(parents.begin(), parents.end());
  parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
  if (std::binary_search(parents.begin(), parents.end(), node))
    throw std::invalid_argument("a node cannot be its own parent");
  return ParentSet{node, std::move(parents)};
}

double discrete_entropy(std::span<const std::span<const int>> columns) {
  if (columns.empty()) throw std::invalid_argument("discrete_entropy: no columns");
  const std::size_t n = columns.front().size();
  for (const auto& c : columns)
    if (c.size() != n) throw std::invalid_argument("discrete_entropy: columns differ in length");
  if (n == 0) throw std::invalid_argument("discrete_entropy: empty columns");
  const Grouping g = group_rows(columns, n);
  return entropy_of_counts(g.counts, n);
}

EntropyValue gaussian_entropy(const Eigen::MatrixXd& covariance) {
  const Eigen::Index d = covariance.rows();
  if (d < 1 || covariance.cols() != d)
    throw std::invalid_argument("gaussian_entropy: covariance must be square with d >= 1");
  const double scale = 1.0 + covariance.cwiseAbs().maxCoeff();
  if (!covariance.allFinite())
    throw NumericalError("gaussian_entropy: non-finite covariance");
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("gaussian_entropy: covariance is not symmetric");

  const double mean_diag = covariance.trace() / static_cast<double>(d);
  const double pivot_floor = 1e-12 * std::max(mean_diag, 1e-300);
  Eigen::MatrixXd work = covariance;
  double eps = std::max(1e-8 * mean_diag, 1e-12);
  bool jittered = false;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
      if (diag.minCoeff() > 0.0 && diag.minCoeff() * diag.minCoeff() >= pivot_floor) {
        const double log_det = 2.0 * diag.array().log().sum();
        return {0.5 * (static_cast<double>(d) * kLog2PiE + log_det), jittered};
      }
    }
    work = covariance;
    work.diagonal().array() += eps;
    eps *= 10.0;
    jittered = true;
  }
  throw NumericalError("gaussian_entropy: covariance not positive definite after jitter");
}

Eigen::MatrixXd mle_covariance(const Dataset& data, std::span<const std::size_t> columns) {
  const std::size_t n = data.n_rows();
  const auto d = static_cast<Eigen::Index>(columns.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index j = 0; j < d; ++j) {
    auto col = data.values(columns[static_cast<std::size_t>(j)]);
    for (std::size_t r = 0; r < n; ++r) x(static_cast<Eigen::Index>(r), j) = col[r];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  return (x.transpose() * x) / static_cast<double>(n);
}

std::vector<GroupStats> group_stats(const Dataset& data, std::span<const std::size_t> continuous,
                                    std::span<const std::size_t> discrete) {
  const std::size_t n = data.n_rows();
  const auto spans = code_spans(data, discrete);
  const Grouping g = group_rows(spans, n);
  const std::size_t n_groups = discrete.empty() ? (n ? 1 : 0) : g.configs.size();
  const auto d = static_cast<Eigen::Index>(continuous.size());

  std::vector<std::span<const double>> cols;
  for (std::size_t c : continuous) cols.push_back(data.values(c));

  std::vector<GroupStats> out(n_groups);
  std::vector<Eigen::VectorXd> means(n_groups, Eigen::VectorXd::Zero(d));
  for (std::size_t k = 0; k < n_groups; ++k) {
    out[k].config = discrete.empty() ? std::vector<int>{} : g.configs[k];
    out[k].count = discrete.empty() ? n : g.counts[k];
    out[k].probability = static_cast<double>(out[k].count) / static_cast<double>(n);
    out[k].covariance = Eigen::MatrixXd::Zero(d, d);
  }
  if (d == 0) return out;

  auto group_of = [&](std::size_t r) {
    return discrete.empty() ? std::size_t{0} : static_cast<std::size_t>(g.id_of_row[r]);
  };
  for (std::size_t r = 0; r < n; ++r) {
    auto& m = means[group_of(r)];
    for (Eigen::Index j = 0; j < d; ++j) m(j) += cols[static_cast<std::size_t>(j)][r];
  }
  for (std::size_t k = 0; k < n_groups; ++k) means[k] /= static_cast<double>(out[k].count);
  Eigen::VectorXd centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = group_of(r);
    for (Eigen::Index j = 0; j < d; ++j)
      centered(j) = cols[static_cast<std::size_t>(j)][r] - means[k](j);
    out[k].covariance.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  for (std::size_t k = 0; k < n_groups; ++k) {
    Eigen::MatrixXd full = out[k].covariance.selfadjointView<Eigen::Lower>();
    out[k].covariance = full / static_cast<double>(out[k].count);
  }
  return out;
}

BlockEntropy mixed_entropy(const Dataset& data, std::span<const std::size_t> block,
                           SmallGroupPolicy policy, const ScoreOptions& options) {
  std::vector<std::size_t> sorted(block.begin(), block.end());
  std::sort(sorted.begin(), sorted.end());
  const SplitBlock s = split_block(data, sorted);
  BlockEntropy out;
  if (sorted.empty()) return out;

  if (s.discrete.empty()) {
    const EntropyValue h = gaussian_entropy(mle_covariance(data, s.continuous));
    out.value = h.value;
    out.jitter_events = h.jittered ? 1 : 0;
    return out;
  }

  const std::vector<GroupStats> groups = group_stats(data, s.continuous, s.discrete);
  double h_discrete = 0.0;
  for (const auto& gs : groups)
    if (gs.count) h_discrete -= gs.probability * std::log(gs.probability);
  out.value = h_discrete;
  if (s.continuous.empty()) return out;

  const std::size_t bound = std::max(options.min_group_size, s.continuous.size() + 1);
  std::optional<double> full_sample;
  for (const auto& gs : groups) {
    double h = 0.0;
    if (gs.count < bound) {
      if (policy == SmallGroupPolicy::Flag) out.pathological = true;
      if (!full_sample) {
        const EntropyValue f = gaussian_entropy(mle_covariance(data, s.continuous));
        full_sample = f.value;
        out.jitter_events += f.jittered ? 1 : 0;
      }
      h = *full_sample;
    } else {
      const EntropyValue e = gaussian_entropy(gs.covariance);
      h = e.value;
      out.jitter_events += e.jittered ? 1 : 0;
    }
    out.value += gs.probability * h;
  }
  return out;
}

MiValue mixed_mi(const Dataset& data, std::span<const std::size_t> block,
                 const ScoreOptions& options) {
  if (block.empty()) throw std::invalid_argument("mixed_mi: empty block");
  const SplitBlock s = split_block(data, block);
  MiValue out;

  if (s.discrete.empty()) {
    const EntropyValue h = gaussian_entropy(mle_covariance(data, s.continuous));
    out.value = h.value;
    out.jitter_events = h.jittered ? 1 : 0;
    return out;
  }
  if (s.continuous.empty()) {
    const auto all = code_spans(data, s.discrete);
    const double h_first = discrete_entropy(std::span(all).first(1));
    if (all.size() == 1) {
      out.value = h_first;
      return out;
    }
    const double h_rest = discrete_entropy(std::span(all).subspan(1));
    out.value = h_first + h_rest - discrete_entropy(all);
    return out;
  }

  const EntropyValue h_x = gaussian_entropy(mle_covariance(data, s.continuous));
  out.jitter_events += h_x.jittered ? 1 : 0;
  const std::size_t bound = std::max(options.min_group_size, s.continuous.size() + 1);
  double h_cond = 0.0;
  for (const auto& gs : group_stats(data, s.continuous, s.discrete)) {
    if (gs.count < bound) {
      out.pathological = true;
      h_cond += gs.probability * h_x.value;
      continue;
    }
    const EntropyValue e = gaussian_entropy(gs.covariance);
    out.jitter_events += e.jittered ? 1 : 0;
    h_cond += gs.probability * e.value;
  }
  out.value = h_x.value - h_cond;
  return out;
}

MiValue mutual_information(const Dataset& data, const ParentSet& ps, SmallGroupPolicy policy,
                           const ScoreOptions& options) {
  MiValue out;
  if (ps.parents.empty()) return out;
  const std::size_t self[] = {ps.node};
  std::vector<std::size_t> joint = ps.parents;
  joint.push_back(ps.node);
  const BlockEntropy h_x = mixed_entropy(data, self, policy, options);
  const BlockEntropy h_p = mixed_entropy(data, ps.parents, policy, options);
  const BlockEntropy h_xp = mixed_entropy(data, joint, policy, options);
  out.value = h_x.value + h_p.value - h_xp.value;
  out.pathological = h_x.pathological || h_p.pathological || h_xp.pathological;
  out.jitter_events = h_x.jitter_events + h_p.jitter_events + h_xp.jitter_events;
  return out;
}

std::size_t parameter_count(const Dataset& data, const ParentSet& ps) {
  std::size_t configs = 1;
  std::size_t continuous_parents = 0;
  for (std::size_t p : ps.parents) {
    if (data.variable(p).is_discrete())
      configs *= std::max<std::size_t>(1, data.variable(p).cardinality());
    else
      ++continuous_parents;
  }
  const Variable& node = data.variable(ps.node);
  if (node.is_discrete()) return configs * (std::max<std::size_t>(1, node.cardinality()) - 1);
  return configs * (continuous_parents + 2);
}

std::string ScoreCache::key(ScoreKind kind, const ParentSet& ps) {
  std::string k = std::to_string(static_cast<int>(kind));
  k += '|';
  k += std::to_string(ps.node);
  k += '|';
  for (std::size_t p : ps.parents) {
    k += std::to_string(p);
    k += ',';
  }
  return k;
}

bool ScoreCache::lookup(ScoreKind kind, const ParentSet& ps, LocalScore& out) const {
  const std::string k = key(kind, ps);
  std::shared_lock lock(mutex_);
  auto it = entries_.find(k);
  if (it == entries_.end()) {
    ++misses_;
    return false;
  }
  ++hits_;
  out = it->second;
  return true;
}

void ScoreCache::insert(ScoreKind kind, const ParentSet& ps, const LocalScore& score) {
  std::string k = key(kind, ps);
  std::unique_lock lock(mutex_);
  entries_.try_emplace(std::move(k), score);
}

std::size_t ScoreCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

LocalScore local_score(const Dataset& data, const ParentSet& ps, ScoreKind kind,
                       ScoreCache* cache, const ScoreOptions& options) {
  if (ps.node >= data.n_cols()) throw std::invalid_argument("local_score: node out of range");
  for (std::size_t p : ps.parents)
    if (p >= data.n_cols() || p == ps.node)
      throw std::invalid_argument("local_score: invalid parent index");

  LocalScore out;
  if (cache && cache->lookup(kind, ps, out)) return out;

  out.kind = kind;
  const bool penalized = kind == ScoreKind::BIC || kind == ScoreKind::AIC;
  const MiValue mi = mutual_information(
      data, ps, penalized ? SmallGroupPolicy::FullSample : SmallGroupPolicy::Flag, options);
  out.jitter_events = mi.jitter_events;
  const double n = static_cast<double>(data.n_rows());

  switch (kind) {
    case ScoreKind::MI: {
      const std::size_t self[] = {ps.node};
      const BlockEntropy h = mixed_entropy(data, self, SmallGroupPolicy::Flag, options);
      out.value = h.value + mi.value;
      out.jitter_events += h.jitter_events;
      out.rejected = mi.pathological;
      break;
    }
    case ScoreKind::LL:
      out.value = mi.value;
      out.rejected = mi.pathological;
      break;
    case ScoreKind::BIC:
      out.value = mi.value -
                  static_cast<double>(parameter_count(data, ps)) * std::log(n) / (2.0 * n);
      break;
    case ScoreKind::AIC:
      out.value = mi.value - static_cast<double>(parameter_count(data, ps)) / n;
      break;
  }
  if (cache) cache->insert(kind, ps, out);
  return out;
}

ScoredNetwork network_score(const Dataset& data, const Dag& dag, ScoreKind kind,
                            ScoreCache* cache, const ScoreOptions& options) {
  if (dag.names() != data.names())
    throw std::invalid_argument("network_score: DAG variables do not match the data");
  if (!dag.is_acyclic()) throw std::invalid_argument("network_score: graph is cyclic");
  ScoredNetwork out;
  out.dag = dag;
  out.local.reserve(dag.size());
  for (std::size_t v = 0; v < dag.size(); ++v) {
    const LocalScore s = local_score(data, ParentSet{v, dag.parents(v)}, kind, cache, options);
    out.local.push_back(s);
    if (s.rejected)
      out.rejected = true;
    else
      out.total += s.value;
  }
  return out;
}

}  // namespace mixbn
