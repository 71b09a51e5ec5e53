#include "repsim/core/rsa.hpp"

#include "repsim/core/correlation.hpp"
#include "repsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace repsim {

namespace detail {

Matrix standardized_rows(const Matrix& data) {
  if (data.cols() < 2) {
    throw Error(Errc::RepresentationTooNarrow, "RDM construction needs p >= 2");
  }
  const Eigen::Index p = data.cols();
  Matrix out(data.rows(), p);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    const double mean = shifted_mean(std::span<const double>(data.row(r).data(),
                                                             static_cast<std::size_t>(p)));
    CompensatedSum ss;
    for (Eigen::Index c = 0; c < p; ++c) {
      const double d = data(r, c) - mean;
      out(r, c) = d;
      ss.add(d * d);
    }
    if (ss.value() / static_cast<double>(p) <= kMinVariance) {
      throw Error(Errc::ConstantRow,
                  "row " + std::to_string(r) + " has variance <= 1e-30 across its entries",
                  {static_cast<std::size_t>(r)});
    }
    out.row(r) /= std::sqrt(ss.value());
  }
  return out;
}

void require_nonconstant_triangle(const std::vector<double>& triangle) {
  const auto first = triangle.begin();
  if (triangle.empty() ||
      std::all_of(first, triangle.end(), [&](double v) { return v == *first; })) {
    throw Error(Errc::ConstantRdm, "RDM triangle has fewer than two distinct values");
  }
}

}  // namespace detail

namespace {

double dissimilarity(double correlation) { return std::clamp(1.0 - correlation, 0.0, 2.0); }

}  // namespace

std::vector<double> rdm_lower_triangle(const EmbeddingMatrix& z) {
  const Matrix u = detail::standardized_rows(z.data());
  const Eigen::Index n = u.rows();
  std::vector<double> tri;
  tri.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  Vector dots;
  for (Eigen::Index i = 1; i < n; ++i) {
    dots.noalias() = u.topRows(i) * u.row(i).transpose();
    for (Eigen::Index j = 0; j < i; ++j) tri.push_back(dissimilarity(dots(j)));
  }
  return tri;
}

Matrix rdm_pearson(const EmbeddingMatrix& z) {
  const auto tri = rdm_lower_triangle(z);
  const auto n = static_cast<Eigen::Index>(z.n());
  Matrix d = Matrix::Zero(n, n);
  std::size_t k = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      d(i, j) = tri[k];
      d(j, i) = tri[k];
      ++k;
    }
  }
  return d;
}

double rsa_spearman(const EmbeddingMatrix& zx, const EmbeddingMatrix& zy) {
  if (zx.n() != zy.n()) {
    throw Error(Errc::DimensionMismatch, "RSA inputs have different stimulus counts");
  }
  if (zx.n() < 3) {
    throw Error(Errc::InvalidArgument, "RSA needs n >= 3 stimuli");
  }
  const auto tx = rdm_lower_triangle(zx);
  const auto ty = rdm_lower_triangle(zy);
  detail::require_nonconstant_triangle(tx);
  detail::require_nonconstant_triangle(ty);
  return spearman(tx, ty);
}

}  // namespace repsim
