#include "repsim/core/kernel.hpp"

#include "repsim/error.hpp"
#include "repsim/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace repsim {

void KernelSpec::validate() const {
  if (kind == Kind::Rbf) {
    if (!(sigma_frac > 0.0) || !std::isfinite(sigma_frac)) {
      throw Error(Errc::InvalidArgument, "rbf kernel needs sigma_frac > 0");
    }
  } else if (sigma_frac != 0.0) {
    throw Error(Errc::InvalidArgument, "sigma_frac is only meaningful for rbf kernels");
  }
}

namespace detail {

Matrix column_centered(const Matrix& data) {
  Eigen::RowVectorXd means(data.cols());
  std::vector<double> column(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    for (Eigen::Index r = 0; r < data.rows(); ++r) column[static_cast<std::size_t>(r)] = data(r, c);
    means(c) = shifted_mean(column);
  }
  Matrix out = data.rowwise() - means;
  return out;
}

void rbf_kernel_rows(const Matrix& data, const Vector& sq_norms, double gamma, Eigen::Index r0,
                     Eigen::Index r1, Matrix& out) {
  const Eigen::Index n = data.rows();
  out.resize(r1 - r0, n);
  out.noalias() = -2.0 * data.middleRows(r0, r1 - r0) * data.transpose();
  for (Eigen::Index i = 0; i < r1 - r0; ++i) {
    const double sq_i = sq_norms(r0 + i);
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = std::max(0.0, out(i, j) + sq_i + sq_norms(j));
    }
    out(i, r0 + i) = 0.0;
  }
  out = (-gamma * out.array()).exp().matrix();
}

double kernel_row_mean(const double* row, Eigen::Index n) {
  return shifted_mean(std::span<const double>(row, static_cast<std::size_t>(n)));
}

}  // namespace detail

GramMatrix gram_linear(const EmbeddingMatrix& z) {
  const Matrix& x = z.data();
  const Eigen::Index n = x.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double dot = x.row(i).dot(x.row(j));
      k(i, j) = dot;
      k(j, i) = dot;
    }
  }
  return {std::move(k), false, KernelSpec::linear()};
}

namespace {

double pair_distance(const Matrix& x, Eigen::Index i, Eigen::Index j) {
  return (x.row(i) - x.row(j)).norm();
}

double median_of(std::vector<double>& values) {
  const std::size_t count = values.size();
  const auto mid = static_cast<std::ptrdiff_t>(count / 2);
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[static_cast<std::size_t>(mid)];
  if (count % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return lower + (upper - lower) / 2.0;
}

}  // namespace

double median_pairwise_distance(const EmbeddingMatrix& z, const MedianOptions& options) {
  const Matrix& x = z.data();
  const Eigen::Index n = x.rows();
  std::vector<double> distances;
  if (static_cast<std::size_t>(n) <= options.exact_max_n) {
    distances.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
    for (Eigen::Index i = 1; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) distances.push_back(pair_distance(x, i, j));
    }
  } else {
    Rng rng(options.seed);
    distances.reserve(options.sampled_pairs);
    const auto un = static_cast<std::uint64_t>(n);
    for (std::size_t s = 0; s < options.sampled_pairs; ++s) {
      const auto i = static_cast<Eigen::Index>(rng.below(un));
      auto j = static_cast<Eigen::Index>(rng.below(un - 1));
      if (j >= i) ++j;
      distances.push_back(pair_distance(x, i, j));
    }
  }
  const double median = median_of(distances);
  if (!(median >= kMinPairDistance)) {
    throw Error(Errc::DegenerateData,
                "median pairwise distance is below 1e-15 (duplicate-dominated data)");
  }
  return median;
}

GramMatrix gram_rbf(const EmbeddingMatrix& z, const KernelSpec& spec, const MedianOptions& options) {
  spec.validate();
  if (spec.kind != KernelSpec::Kind::Rbf) {
    throw Error(Errc::InvalidArgument, "gram_rbf requires an rbf kernel spec");
  }
  const double sigma = spec.sigma_frac * median_pairwise_distance(z, options);
  const double gamma = 1.0 / (2.0 * sigma * sigma);
  const Matrix centered = detail::column_centered(z.data());
  const Vector sq_norms = centered.rowwise().squaredNorm();
  Matrix k;
  detail::rbf_kernel_rows(centered, sq_norms, gamma, 0, centered.rows(), k);
  return {std::move(k), false, spec};
}

GramMatrix center_gram(const GramMatrix& k) {
  const Eigen::Index n = k.data.rows();
  if (k.data.cols() != n) {
    throw Error(Errc::DimensionMismatch, "gram matrix must be square");
  }
  std::vector<double> row_means(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    row_means[static_cast<std::size_t>(i)] = detail::kernel_row_mean(k.data.row(i).data(), n);
  }
  const double grand = shifted_mean(row_means);
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ri = row_means[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = detail::centered_entry(k.data(i, j), ri, row_means[static_cast<std::size_t>(j)],
                                         grand);
    }
  }
  return {std::move(out), true, k.kernel};
}

}  // namespace repsim
