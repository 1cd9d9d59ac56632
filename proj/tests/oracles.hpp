#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  double normal(double mu = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mu, sd)(rng);
  }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }
  std::vector<double> normals(std::size_t n, double sd = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = normal(0.0, sd);
    return v;
  }
};

inline bool close(double a, double b, double rel, double abs = 0.0) {
  return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// E f(W), W ~ N(m, s^2), by Simpson on +-12 standard deviations.
inline double normal_expectation(const std::function<double(double)>& f, double m, double s,
                                 int panels = 200000) {
  const double c = 1.0 / std::sqrt(2.0 * M_PI);
  return simpson([&](double e) { return f(m + s * e) * c * std::exp(-0.5 * e * e); }, -12.0,
                 12.0, panels);
}

inline double act(int kind, double z) {  // 0 relu, 1 tanh, 2 identity
  if (kind == 0) return z > 0.0 ? z : 0.0;
  if (kind == 1) return std::tanh(z);
  return z;
}

// Straight-line evaluation of a dense network for one input row, walking the
// documented flat layout: per layer W[n_in x n_out] row-major, then biases.
inline std::vector<double> dense_forward(const std::vector<std::size_t>& sizes, int kind,
                                         const std::vector<double>& w,
                                         const std::vector<double>& x) {
  std::vector<double> a = x;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t ni = sizes[l], no = sizes[l + 1];
    std::vector<double> z(no);
    for (std::size_t j = 0; j < no; ++j) {
      long double acc = w[off + ni * no + j];
      for (std::size_t i = 0; i < ni; ++i) acc += (long double)a[i] * w[off + i * no + j];
      z[j] = static_cast<double>(acc);
    }
    off += ni * no + no;
    const bool last = l + 2 == sizes.size();
    if (!last)
      for (auto& v : z) v = act(kind, v);
    a = z;
  }
  return a;
}

// Explicit enumeration of input-to-output paths for the path-product importance.
inline std::vector<double> enumerate_psi(const std::vector<std::size_t>& sizes,
                                         const std::vector<double>& p) {
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    offsets.push_back(off);
    off += sizes[l] * sizes[l + 1] + sizes[l + 1];
  }
  double denom = 1.0;
  for (std::size_t l = 1; l + 1 < sizes.size(); ++l) denom *= double(sizes[l]);
  std::vector<double> psi(sizes[0], 0.0);
  std::function<void(std::size_t, std::size_t, std::size_t, double)> walk =
      [&](std::size_t feature, std::size_t layer, std::size_t unit, double prod) {
        if (layer + 1 == sizes.size()) {
          psi[feature] += prod;
          return;
        }
        const std::size_t no = sizes[layer + 1];
        for (std::size_t j = 0; j < no; ++j)
          walk(feature, layer + 1, j, prod * p[offsets[layer] + unit * no + j]);
      };
  for (std::size_t f = 0; f < sizes[0]; ++f) walk(f, 0, f, 1.0);
  for (auto& v : psi) v /= denom;
  return psi;
}

// Least squares by normal equations and Gaussian elimination with partial pivoting.
inline std::vector<double> ols(const std::vector<std::vector<double>>& rows,
                               const std::vector<double>& y) {
  const std::size_t k = rows.front().size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) a[i][j] += rows[r][i] * rows[r][j];
      a[i][k] += rows[r][i] * y[r];
    }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> beta(k);
  for (std::size_t i = 0; i < k; ++i) beta[i] = a[i][k] / a[i][i];
  return beta;
}

inline double mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  long double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return static_cast<double>(s / (v.size() - 1));
}

}  // namespace oracle
