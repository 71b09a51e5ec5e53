#pragma once

#include "repsim/core/embedding.hpp"
#include "repsim/store/registry.hpp"
#include "repsim/store/sampling.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>

namespace repsim {

enum class Split { Train, Test };

/// One loaded (model, dataset, split). Labels are absent when no labels.npy
/// exists next to the features.
struct LoadedEmbedding {
  std::shared_ptr<const EmbeddingMatrix> features;
  std::shared_ptr<const LabelVector> labels;
};

/// Reads features/<dataset>/<model>/[test/]{features,labels}.npy under a
/// root directory and validates them against a registry.
///
/// Loads are safe to call from several threads. A process-wide cache keyed
/// by (dataset, model, split) holds every loaded file until evicted.
class EmbeddingStore {
 public:
  EmbeddingStore(std::filesystem::path root, Registry registry);

  const Registry& registry() const noexcept { return registry_; }
  const std::filesystem::path& root() const noexcept { return root_; }

  std::filesystem::path directory(std::string_view dataset, std::string_view model,
                                  Split split = Split::Train) const;
  bool has(std::string_view dataset, std::string_view model, Split split = Split::Train) const;

  /// Throws UnknownModel/UnknownDataset, MissingEmbedding, FormatError,
  /// ShapeMismatch (label length), OutOfDomain (label value) or
  /// NonFiniteValue(row, col).
  LoadedEmbedding load(std::string_view dataset, std::string_view model,
                       Split split = Split::Train) const;

  /// Labels shared by every listed model on a dataset. Throws MissingLabels
  /// when none of them has a label file and LabelMismatch when two disagree.
  std::shared_ptr<const LabelVector> dataset_labels(std::string_view dataset,
                                                    std::span<const std::string> models,
                                                    Split split = Split::Train) const;

  /// Number of rows of a dataset, taken from the first listed model.
  std::size_t rows(std::string_view dataset, std::span<const std::string> models,
                   Split split = Split::Train) const;

  void evict(std::string_view dataset);
  void clear();

 private:
  using Key = std::tuple<std::string, std::string, Split>;

  std::filesystem::path root_;
  Registry registry_;
  mutable std::shared_mutex mutex_;
  mutable std::map<Key, LoadedEmbedding> cache_;
};

/// Writes features (and labels, if given) in the store layout. Used by the
/// synthetic-data tool and tests.
void write_embedding(const std::filesystem::path& root, std::string_view dataset,
                     std::string_view model, const Matrix& features,
                     std::span<const std::int64_t> labels, Split split = Split::Train,
                     bool float32 = false);

}  // namespace repsim
