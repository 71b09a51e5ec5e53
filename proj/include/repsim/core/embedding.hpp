#pragma once

#include "repsim/numeric.hpp"

#include <cstddef>
#include <span>
#include <string>

namespace repsim {

/// n x p representation of one (model, dataset) pair. Rows are stimuli.
///
/// Construction validates the invariants: n >= 2, p >= 1, every entry
/// finite, and unit-length rows when `normalized` is set.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::string model_id, std::string dataset_id, Matrix data,
                  bool normalized = false);
  /// Anonymous matrix, mostly for tests and in-memory use.
  explicit EmbeddingMatrix(Matrix data) : EmbeddingMatrix("", "", std::move(data)) {}

  const std::string& model_id() const noexcept { return model_id_; }
  const std::string& dataset_id() const noexcept { return dataset_id_; }
  const Matrix& data() const noexcept { return data_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  bool normalized() const noexcept { return normalized_; }

  /// Row gather; indices may repeat (bootstrap resamples).
  EmbeddingMatrix select_rows(std::span<const std::size_t> indices) const;

 private:
  std::string model_id_;
  std::string dataset_id_;
  Matrix data_;
  bool normalized_;
};

/// Scales every row to unit Euclidean norm. Throws ZeroRow(index) when a row
/// norm falls below kMinRowNorm.
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& z);

}  // namespace repsim
