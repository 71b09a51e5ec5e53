#pragma once

#include "repsim/analysis/similarity.hpp"

#include <span>
#include <string>
#include <vector>

namespace repsim {

/// Pearson correlation of two datasets' similarity vectors over the same
/// canonical pair list. Throws PairListMismatch when the lists differ and
/// ConstantVector when either vector has fewer than two distinct values.
double consistency(const SimilarityVector& a, const SimilarityVector& b);

struct ConsistencyFailure {
  std::string dataset_a;
  std::string dataset_b;
  Errc code;
  std::string message;
};

struct ConsistencyMatrix {
  std::vector<std::string> datasets;
  Matrix rho;  // symmetric, unit diagonal; NaN where a partial run failed
  std::string theta_set;
  std::string phi_set;
  Measure measure;
  std::vector<ConsistencyFailure> failures;
};

/// All unordered dataset pairs of the given vectors (one per dataset, same
/// theta/phi/measure). Needs at least two datasets (InvalidArgument).
ConsistencyMatrix consistency_matrix(std::span<const SimilarityVector> vectors, bool allow_partial = false);

struct DistributionSummary {
  double median = 0.0;
  double q1 = 0.0;  // quartiles by linear interpolation between order statistics
  double q3 = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;

  bool operator==(const DistributionSummary&) const = default;
};

/// Throws EmptyResultSet for an empty sample.
DistributionSummary summarize(std::span<const double> samples);

struct ConsistencyDistribution {
  std::string theta_set;
  std::string phi_set;
  Measure measure;
  std::vector<std::pair<std::string, std::string>> dataset_pairs;
  std::vector<double> samples;  // strict upper triangle, row-major
  DistributionSummary summary;
};

/// Samples are the finite strict-upper-triangle entries of the matrix.
ConsistencyDistribution consistency_distribution(const ConsistencyMatrix& matrix);

}  // namespace repsim
