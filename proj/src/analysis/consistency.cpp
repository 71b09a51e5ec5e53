#include "repsim/analysis/consistency.hpp"

#include "repsim/core/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace repsim {
namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return frac == 0.0 ? s[lo] : s[lo] + frac * (s[hi] - s[lo]);
}

}  // namespace

double consistency(const SimilarityVector& a, const SimilarityVector& b) {
  if (a.pairs != b.pairs)
    throw Error(Errc::PairListMismatch,
                "datasets '" + a.dataset_id + "' and '" + b.dataset_id + "' use different pair lists");
  for (const auto* v : {&a, &b}) {
    for (double x : v->values)
      if (!std::isfinite(x))
        throw Error(Errc::NonFiniteValue, "similarity vector of dataset '" + v->dataset_id + "' has failed pairs");
    const std::set<double> distinct(v->values.begin(), v->values.end());
    if (distinct.size() < 2)
      throw Error(Errc::ConstantVector,
                  "similarity vector of dataset '" + v->dataset_id + "' has fewer than two distinct values");
  }
  return pearson(a.values, b.values);
}

ConsistencyMatrix consistency_matrix(std::span<const SimilarityVector> vectors, bool allow_partial) {
  if (vectors.size() < 2) throw Error(Errc::InvalidArgument, "consistency needs at least two datasets");
  ConsistencyMatrix out;
  out.theta_set = vectors.front().theta_set;
  out.phi_set = vectors.front().phi_set;
  out.measure = vectors.front().measure;
  std::set<std::string> seen;
  for (const auto& v : vectors) {
    if (v.theta_set != out.theta_set || v.phi_set != out.phi_set || !(v.measure == out.measure))
      throw Error(Errc::InvalidArgument, "similarity vectors mix model sets or measures");
    if (!seen.insert(v.dataset_id).second)
      throw Error(Errc::InvalidArgument, "dataset '" + v.dataset_id + "' appears twice");
    out.datasets.push_back(v.dataset_id);
  }
  const auto d = static_cast<Eigen::Index>(vectors.size());
  out.rho = Matrix::Identity(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      double r = std::numeric_limits<double>::quiet_NaN();
      try {
        r = consistency(vectors[static_cast<std::size_t>(i)], vectors[static_cast<std::size_t>(j)]);
      } catch (const Error& e) {
        if (!allow_partial) throw;
        out.failures.push_back({out.datasets[static_cast<std::size_t>(i)],
                                out.datasets[static_cast<std::size_t>(j)], e.code(), e.message()});
      }
      out.rho(i, j) = r;
      out.rho(j, i) = r;
    }
  }
  return out;
}

DistributionSummary summarize(std::span<const double> samples) {
  if (samples.empty()) throw Error(Errc::EmptyResultSet, "cannot summarize an empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  DistributionSummary out;
  out.count = s.size();
  out.median = quantile_sorted(s, 0.5);
  out.q1 = quantile_sorted(s, 0.25);
  out.q3 = quantile_sorted(s, 0.75);
  out.mean = shifted_mean(samples);
  CompensatedSum sq;
  for (double x : samples) sq.add((x - out.mean) * (x - out.mean));
  out.std = std::sqrt(sq.value() / static_cast<double>(samples.size()));
  return out;
}

ConsistencyDistribution consistency_distribution(const ConsistencyMatrix& matrix) {
  ConsistencyDistribution out;
  out.theta_set = matrix.theta_set;
  out.phi_set = matrix.phi_set;
  out.measure = matrix.measure;
  for (Eigen::Index i = 0; i < matrix.rho.rows(); ++i)
    for (Eigen::Index j = i + 1; j < matrix.rho.cols(); ++j) {
      if (!std::isfinite(matrix.rho(i, j))) continue;
      out.dataset_pairs.emplace_back(matrix.datasets[static_cast<std::size_t>(i)],
                                     matrix.datasets[static_cast<std::size_t>(j)]);
      out.samples.push_back(matrix.rho(i, j));
    }
  out.summary = summarize(out.samples);
  return out;
}

}  // namespace repsim
