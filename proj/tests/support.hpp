#pragma once

// Test-side generators and independent oracles. Nothing here calls into the
// library's estimators, so the oracles can check them.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixbn/dataset.hpp"

namespace testsupport {

inline constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

/// A -> B -> C with B = 2A + 1 + e1, C = -1.5B + 0.5 + e2.
inline mixbn::Dataset chain_data(std::size_t n, std::uint64_t seed, double noise_sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = z(rng);
    b[i] = 2.0 * a[i] + 1.0 + noise_sd * z(rng);
    c[i] = -1.5 * b[i] + 0.5 + noise_sd * z(rng);
  }
  return mixbn::DatasetBuilder().continuous("A", a).continuous("B", b).continuous("C", c).build();
}

/// A -> C <- B, all continuous.
inline mixbn::Dataset collider_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = z(rng);
    b[i] = z(rng);
    c[i] = 1.5 * a[i] - 1.5 * b[i] + 0.5 * z(rng);
  }
  return mixbn::DatasetBuilder().continuous("A", a).continuous("B", b).continuous("C", c).build();
}

/// Mutually independent columns: two continuous, one ternary.
inline mixbn::Dataset independent_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> k(0, 2);
  std::vector<double> x(n), y(n);
  std::vector<int> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = z(rng);
    y[i] = 3.0 + 2.0 * z(rng);
    d[i] = k(rng);
  }
  return mixbn::DatasetBuilder().discrete("D", d).continuous("X", x).continuous("Y", y).build();
}

/// Plug-in entropy from an explicit contingency table.
inline double brute_entropy(const std::vector<std::vector<int>>& columns) {
  if (columns.empty()) throw std::invalid_argument("no columns");
  const std::size_t n = columns.front().size();
  std::map<std::vector<int>, std::size_t> table;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<int> key;
    for (const auto& c : columns) key.push_back(c[r]);
    ++table[key];
  }
  double h = 0.0;
  for (const auto& [key, count] : table) {
    const double p = static_cast<double>(count) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

/// I(first; rest) from three brute-force entropies.
inline double brute_mi(const std::vector<int>& x, const std::vector<std::vector<int>>& rest) {
  std::vector<std::vector<int>> joint{x};
  joint.insert(joint.end(), rest.begin(), rest.end());
  return brute_entropy({x}) + brute_entropy(rest) - brute_entropy(joint);
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Least squares of y on [1, X] through the normal equations.
/// Returns {intercept, slopes...}.
inline std::vector<double> normal_equations(const std::vector<std::vector<double>>& predictors,
                                            const std::vector<double>& y) {
  const std::size_t p = predictors.size() + 1;
  const std::size_t n = y.size();
  auto design = [&](std::size_t r, std::size_t j) { return j == 0 ? 1.0 : predictors[j - 1][r]; };
  std::vector<std::vector<double>> g(p, std::vector<double>(p, 0.0));
  std::vector<double> rhs(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < p; ++i) {
      rhs[i] += design(r, i) * y[r];
      for (std::size_t j = 0; j < p; ++j) g[i][j] += design(r, i) * design(r, j);
    }
  return gauss_solve(g, rhs);
}

/// ln det of a small symmetric matrix via the same elimination.
inline double log_det(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double ld = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    ld += std::log(std::abs(a[col][col]));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return ld;
}

/// Divide-by-n covariance of the given rows.
inline std::vector<std::vector<double>> mle_cov(const std::vector<std::vector<double>>& cols,
                                                const std::vector<std::size_t>& rows) {
  const std::size_t d = cols.size();
  const double n = static_cast<double>(rows.size());
  std::vector<double> mean(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t r : rows) mean[j] += cols[j][r];
    mean[j] /= n;
  }
  std::vector<std::vector<double>> s(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t r : rows) s[i][j] += (cols[i][r] - mean[i]) * (cols[j][r] - mean[j]);
      s[i][j] /= n;
    }
  return s;
}

inline double gaussian_entropy_oracle(const std::vector<std::vector<double>>& cov) {
  return 0.5 * (static_cast<double>(cov.size()) * std::log(kTwoPiE) + log_det(cov));
}

}  // namespace testsupport
