#pragma once

#include "repsim/analysis/model_set.hpp"
#include "repsim/core/embedding.hpp"
#include "repsim/core/measure.hpp"
#include "repsim/error.hpp"
#include "repsim/store/sampling.hpp"
#include "repsim/store/store.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace repsim {

/// Raw (unnormalized) embeddings of several models on one dataset, all with
/// the same row count, plus the dataset's labels when known.
struct DatasetView {
  std::string dataset_id;
  std::vector<std::string> models;
  std::vector<std::shared_ptr<const EmbeddingMatrix>> features;  // parallel to models
  std::shared_ptr<const LabelVector> labels;                      // may be null

  std::size_t n() const;
  /// Throws MissingEmbedding when the model is not part of the view.
  const EmbeddingMatrix& features_of(std::string_view model) const;
};

/// Loads every listed model on a dataset. Labels are attached when at least
/// one model has them; `require_labels` turns their absence into
/// MissingLabels. Row counts must agree (DimensionMismatch).
DatasetView load_dataset(const EmbeddingStore& store, std::string_view dataset,
                         std::span<const std::string> models, bool require_labels = false,
                         Split split = Split::Train);

/// The one row sample shared by every model of the dataset: stratified when
/// labels are present, uniform otherwise, capped at n rows.
SampleIndexSet dataset_sample(const DatasetView& view, std::size_t target_n, std::uint64_t seed);

struct PairFailure {
  ModelPair pair;
  Errc code;
  std::string message;
};

struct SimilarityOptions {
  MeasureOptions measure;
  std::size_t jobs = 1;
  /// Record failing pairs (value NaN) instead of throwing.
  bool allow_partial = false;
};

struct SimilarityMatrix {
  std::string dataset_id;
  std::vector<std::string> models;
  Matrix values;  // symmetric, unit diagonal
  Measure measure;
  std::vector<PairFailure> failures;
};

struct SimilarityVector {
  std::string dataset_id;
  std::string theta_set;
  std::string phi_set;
  std::vector<ModelPair> pairs;  // canonical order from enumerate_pairs
  std::vector<double> values;
  Measure measure;
  std::vector<PairFailure> failures;
};

/// Similarity of every pair of `models`: rows `rows` of each embedding are
/// L2-normalized and prepared once per model, then each pair is compared.
/// Core errors are rethrown with the pair (or model) and dataset named; the
/// first failure in canonical pair order wins unless allow_partial is set.
SimilarityMatrix similarity_matrix(const DatasetView& view, const ModelSet& models, const Measure& measure,
                                   const SampleIndexSet& rows, const SimilarityOptions& options = {});

SimilarityVector similarity_vector(const DatasetView& view, const ModelSet& theta, const ModelSet& phi,
                                   const Measure& measure, const SampleIndexSet& rows,
                                   const SimilarityOptions& options = {});

/// Reads the canonical pair list of (theta, phi) out of a matrix that covers
/// both sets. Throws MissingEmbedding for a member the matrix lacks.
SimilarityVector similarity_vector(const SimilarityMatrix& matrix, const ModelSet& theta, const ModelSet& phi);

}  // namespace repsim
