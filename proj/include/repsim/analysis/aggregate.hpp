#pragma once

#include "repsim/analysis/similarity.hpp"

#include <span>
#include <string>
#include <vector>

namespace repsim {

struct AggregateSimilarity {
  std::vector<std::string> models;
  Matrix mean;
  Matrix std;  // population standard deviation across datasets
  std::size_t per_dataset_count = 0;
  Measure measure;
};

/// Entrywise mean and population std over >= 2 per-dataset matrices that
/// share one model ordering (OrderMismatch otherwise). Entries that are NaN
/// in any input (failed pairs of a partial run) stay NaN.
AggregateSimilarity aggregate_mean_std(std::span<const SimilarityMatrix> matrices);

/// Largest s - sqrt(mu (1 - mu)) over all finite entries. For values in
/// [0, 1] the population variance never exceeds mu (1 - mu), so a CKA
/// aggregate should return at most rounding noise.
double std_bound_excess(const AggregateSimilarity& aggregate);

enum class CkaTransform { Arccos, Tan };

/// Elementwise arccos (radians) or tan. Throws OutOfDomain(index) for any
/// value outside [0, 1].
std::vector<double> transform_cka(std::span<const double> values, CkaTransform kind);

/// Leaf order of an average-linkage agglomerative clustering on distance
/// 1 - mean. The closest pair of clusters merges first; ties go to the pair
/// whose smallest member indices are smallest. The subtree containing the
/// smaller original index is placed on the left.
std::vector<std::size_t> hierarchical_order(const Matrix& mean);

struct Merge {
  std::vector<std::size_t> left;   // leaf order of the left subtree
  std::vector<std::size_t> right;
  double height;                   // average-linkage distance at the merge
};

/// Same clustering, returning the merge sequence.
std::vector<Merge> average_linkage(const Matrix& mean);

}  // namespace repsim
