#pragma once

#include "repsim/analysis/similarity.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace repsim {

struct ConvergenceTable {
  std::string dataset_id;
  Measure measure;
  std::vector<std::size_t> ks;    // samples per class
  std::vector<ModelPair> pairs;   // canonical pairs of the model set
  Matrix similarity;              // pairs x ks
  Matrix differences;             // pairs x (ks - 1): |sim(k_i) - sim(k_{i+1})|
};

/// For each k, a stratified subsample of k * num_classes rows (seeded with
/// `seed`), then the similarity of every model pair. Needs labels
/// (MissingLabels), strictly increasing positive ks (InvalidArgument) and
/// k * num_classes <= n (KTooLarge).
ConvergenceTable subsample_convergence(const DatasetView& view, const ModelSet& models, const Measure& measure,
                                       std::span<const std::size_t> ks, std::uint64_t seed,
                                       const SimilarityOptions& options = {});

struct BootstrapPairStats {
  ModelPair pair;
  std::vector<double> values;  // one per iteration
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

struct BootstrapResult {
  std::string dataset_id;
  Measure measure;
  std::size_t iterations = 0;
  std::size_t size = 0;
  std::uint64_t seed = 0;
  std::vector<BootstrapPairStats> pairs;
};

/// Iteration i resamples `size` rows with replacement using
/// bootstrap_indices(n, size, seed ^ i) and recomputes every pair.
/// Requires iterations >= 1 and 1 <= size <= n (InvalidArgument).
BootstrapResult bootstrap_stability(const DatasetView& view, const ModelSet& models, const Measure& measure,
                                    std::size_t iterations, std::size_t size, std::uint64_t seed,
                                    const SimilarityOptions& options = {});

}  // namespace repsim
