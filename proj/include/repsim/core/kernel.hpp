#pragma once

#include "repsim/core/embedding.hpp"
#include "repsim/numeric.hpp"

#include <cstddef>
#include <cstdint>

namespace repsim {

struct KernelSpec {
  enum class Kind { Linear, Rbf };

  Kind kind = Kind::Linear;
  /// RBF bandwidth as a fraction of the median pairwise distance.
  double sigma_frac = 0.0;

  static KernelSpec linear() { return {Kind::Linear, 0.0}; }
  static KernelSpec rbf(double sigma_frac) { return {Kind::Rbf, sigma_frac}; }

  /// Throws InvalidArgument unless sigma_frac > 0 exactly when kind is Rbf.
  void validate() const;
};

struct GramMatrix {
  Matrix data;
  bool centered = false;
  KernelSpec kernel;

  std::size_t n() const noexcept { return static_cast<std::size_t>(data.rows()); }
};

/// Controls the median-heuristic bandwidth. Up to `exact_max_n` rows the
/// median is exact over all n(n-1)/2 pairs; above it, `sampled_pairs`
/// uniformly drawn pairs (seeded) are used.
struct MedianOptions {
  std::size_t exact_max_n = 4096;
  std::size_t sampled_pairs = std::size_t{1} << 22;
  std::uint64_t seed = 0;
};

GramMatrix gram_linear(const EmbeddingMatrix& z);

double median_pairwise_distance(const EmbeddingMatrix& z, const MedianOptions& options = {});

/// K[i,j] = exp(-|z_i - z_j|^2 / (2 (sigma_frac * median)^2)), unit diagonal.
GramMatrix gram_rbf(const EmbeddingMatrix& z, const KernelSpec& spec,
                    const MedianOptions& options = {});

/// Double centering H K H. Entries are (K[i,j] - (r_i + r_j)) + g with r the
/// row means and g the grand mean, which is exactly symmetric and exactly
/// zero for a constant kernel.
GramMatrix center_gram(const GramMatrix& k);

namespace detail {

/// Row statistics of a symmetric kernel: means computed relative to the
/// row's first entry, grand mean relative to the first row mean.
struct KernelRowStats {
  Vector row_means;
  double grand_mean = 0.0;
};

/// Evaluates rows [r0, r1) of an RBF kernel against all n rows. `data` must
/// be the column-centered representation and `sq_norms` its squared row
/// norms. `out` is resized to (r1 - r0) x n.
void rbf_kernel_rows(const Matrix& data, const Vector& sq_norms, double gamma, Eigen::Index r0,
                     Eigen::Index r1, Matrix& out);

/// Mean of one kernel row relative to its first entry.
double kernel_row_mean(const double* row, Eigen::Index n);

/// Centered kernel entry; symmetric in (i, j) bit for bit.
inline double centered_entry(double k, double row_mean_i, double row_mean_j,
                             double grand_mean) noexcept {
  return (k - (row_mean_i + row_mean_j)) + grand_mean;
}

Matrix column_centered(const Matrix& data);

}  // namespace detail

}  // namespace repsim
