#include "repsim/core/embedding.hpp"

#include "repsim/error.hpp"

#include <cmath>
#include <string>

namespace repsim {

namespace {

double row_norm(const Matrix& m, Eigen::Index row) {
  CompensatedSum acc;
  for (Eigen::Index c = 0; c < m.cols(); ++c) acc.add(m(row, c) * m(row, c));
  return std::sqrt(acc.value());
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::string model_id, std::string dataset_id, Matrix data,
                                 bool normalized)
    : model_id_(std::move(model_id)),
      dataset_id_(std::move(dataset_id)),
      data_(std::move(data)),
      normalized_(normalized) {
  if (data_.rows() < 2) {
    throw Error(Errc::ShapeMismatch,
                "embedding needs n >= 2 rows, got " + std::to_string(data_.rows()));
  }
  if (data_.cols() < 1) {
    throw Error(Errc::ShapeMismatch, "embedding needs p >= 1 columns");
  }
  for (Eigen::Index r = 0; r < data_.rows(); ++r) {
    for (Eigen::Index c = 0; c < data_.cols(); ++c) {
      if (!std::isfinite(data_(r, c))) {
        throw Error(Errc::NonFiniteValue,
                    "non-finite entry at (" + std::to_string(r) + ", " + std::to_string(c) + ")",
                    {static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
      }
    }
  }
  if (normalized_) {
    for (Eigen::Index r = 0; r < data_.rows(); ++r) {
      if (std::abs(row_norm(data_, r) - 1.0) > 1e-6) {
        throw Error(Errc::InvalidArgument,
                    "row " + std::to_string(r) + " is flagged normalized but is not unit length",
                    {static_cast<std::size_t>(r)});
      }
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(static_cast<Eigen::Index>(indices.size()), data_.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= n()) {
      throw Error(Errc::InvalidArgument, "row index " + std::to_string(indices[i]) +
                                             " out of range for n=" + std::to_string(n()));
    }
    out.row(static_cast<Eigen::Index>(i)) = data_.row(static_cast<Eigen::Index>(indices[i]));
  }
  return EmbeddingMatrix(model_id_, dataset_id_, std::move(out), normalized_);
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& z) {
  Matrix out = z.data();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double norm = row_norm(out, r);
    if (norm < kMinRowNorm) {
      throw Error(Errc::ZeroRow,
                  "row " + std::to_string(r) + " has norm below 1e-12 and cannot be normalized",
                  {static_cast<std::size_t>(r)});
    }
    out.row(r) /= norm;
  }
  return EmbeddingMatrix(z.model_id(), z.dataset_id(), std::move(out), true);
}

}  // namespace repsim
