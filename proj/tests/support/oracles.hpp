#pragma once

// Deliberately naive reference implementations used as test oracles. None
// of these call into the library's numerical paths.

#include "repsim/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace repsim::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(gen);
  return m;
}

/// Random orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
inline Matrix random_orthogonal(std::size_t p, std::uint64_t seed) {
  Matrix a = random_matrix(p, p, seed);
  Matrix q(a.rows(), a.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    Eigen::VectorXd v = a.col(c);
    for (Eigen::Index k = 0; k < c; ++k) v -= q.col(k).dot(v) * q.col(k);
    for (Eigen::Index k = 0; k < c; ++k) v -= q.col(k).dot(v) * q.col(k);
    q.col(c) = v / v.norm();
  }
  return q;
}

inline Matrix naive_gram_linear(const Matrix& z) {
  const auto n = z.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      long double s = 0;
      for (Eigen::Index c = 0; c < z.cols(); ++c) s += (long double)z(i, c) * z(j, c);
      k(i, j) = (double)s;
    }
  return k;
}

inline double naive_distance(const Matrix& z, Eigen::Index i, Eigen::Index j) {
  long double s = 0;
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    long double d = (long double)z(i, c) - z(j, c);
    s += d * d;
  }
  return (double)std::sqrt(s);
}

inline double naive_median_distance(const Matrix& z) {
  std::vector<double> d;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = i + 1; j < z.rows(); ++j) d.push_back(naive_distance(z, i, j));
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size();
  return m % 2 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
}

inline Matrix naive_gram_rbf(const Matrix& z, double sigma) {
  const auto n = z.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = naive_distance(z, i, j);
      k(i, j) = std::exp(-d * d / (2.0 * sigma * sigma));
    }
  return k;
}

/// Explicit H K H with H = I - 11^T / n.
inline Matrix naive_center(const Matrix& k) {
  const auto n = k.rows();
  Matrix h = Matrix::Identity(n, n);
  h.array() -= 1.0 / static_cast<double>(n);
  Matrix hk(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      long double s = 0;
      for (Eigen::Index t = 0; t < n; ++t) s += (long double)h(i, t) * k(t, j);
      hk(i, j) = (double)s;
    }
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      long double s = 0;
      for (Eigen::Index t = 0; t < n; ++t) s += (long double)hk(i, t) * h(t, j);
      out(i, j) = (double)s;
    }
  return out;
}

inline double naive_hsic(const Matrix& kc, const Matrix& lc) {
  long double s = 0;
  for (Eigen::Index i = 0; i < kc.rows(); ++i)
    for (Eigen::Index j = 0; j < kc.cols(); ++j) s += (long double)kc(i, j) * lc(i, j);
  const double d = static_cast<double>(kc.rows()) - 1.0;
  return (double)(s / (d * d));
}

inline double naive_cka(const Matrix& k, const Matrix& l) {
  const Matrix kc = naive_center(k);
  const Matrix lc = naive_center(l);
  return naive_hsic(kc, lc) / std::sqrt(naive_hsic(kc, kc) * naive_hsic(lc, lc));
}

inline double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return (double)(sxy / std::sqrt(sxx * syy));
}

/// O(n^2) average-rank oracle: rank = 1 + #less + (#equal - 1) / 2.
inline std::vector<double> brute_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) ++less;
      if (v == x[i]) ++equal;
    }
    r[i] = 1.0 + static_cast<double>(less) + (static_cast<double>(equal) - 1.0) / 2.0;
  }
  return r;
}

inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return naive_pearson(brute_ranks(x), brute_ranks(y));
}

/// Strict lower triangle (row-major) of the 1 - Pearson RDM, per-pair.
inline std::vector<double> naive_rdm_triangle(const Matrix& z) {
  std::vector<double> t;
  for (Eigen::Index i = 1; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      std::vector<double> a(z.cols()), b(z.cols());
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        a[c] = z(i, c);
        b[c] = z(j, c);
      }
      t.push_back(1.0 - naive_pearson(a, b));
    }
  return t;
}

inline double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace repsim::testing
