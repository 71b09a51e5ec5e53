#include "repsim/analysis/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace repsim {

AggregateSimilarity aggregate_mean_std(std::span<const SimilarityMatrix> matrices) {
  if (matrices.size() < 2) throw Error(Errc::InvalidArgument, "aggregation needs at least two datasets");
  const auto& first = matrices.front();
  for (const auto& m : matrices) {
    if (m.models != first.models)
      throw Error(Errc::OrderMismatch, "dataset '" + m.dataset_id + "' orders its models differently from '" +
                                           first.dataset_id + "'");
    if (!(m.measure == first.measure)) throw Error(Errc::InvalidArgument, "matrices use different measures");
  }
  const auto k = static_cast<Eigen::Index>(first.models.size());
  AggregateSimilarity out;
  out.models = first.models;
  out.measure = first.measure;
  out.per_dataset_count = matrices.size();
  out.mean.resize(k, k);
  out.std.resize(k, k);
  std::vector<double> column(matrices.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      for (std::size_t d = 0; d < matrices.size(); ++d) column[d] = matrices[d].values(i, j);
      const double mu = shifted_mean(column);
      CompensatedSum sq;
      for (double x : column) sq.add((x - mu) * (x - mu));
      out.mean(i, j) = mu;
      out.std(i, j) = std::sqrt(sq.value() / static_cast<double>(column.size()));
    }
  }
  return out;
}

double std_bound_excess(const AggregateSimilarity& aggregate) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < aggregate.mean.size(); ++i) {
    const double mu = aggregate.mean.data()[i];
    const double s = aggregate.std.data()[i];
    if (!std::isfinite(mu) || !std::isfinite(s)) continue;
    worst = std::max(worst, s - std::sqrt(std::max(0.0, mu * (1.0 - mu))));
  }
  return worst;
}

std::vector<double> transform_cka(std::span<const double> values, CkaTransform kind) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(Errc::OutOfDomain, "CKA value " + std::to_string(v) + " at index " + std::to_string(i) +
                                         " is outside [0, 1]",
                  {i});
    out[i] = kind == CkaTransform::Arccos ? std::acos(v) : std::tan(v);
  }
  return out;
}

std::vector<Merge> average_linkage(const Matrix& mean) {
  const auto m = static_cast<std::size_t>(mean.rows());
  if (m < 2 || mean.cols() != mean.rows())
    throw Error(Errc::InvalidArgument, "clustering needs a square matrix with at least two models");

  // Each cluster keeps its leaves in display order; min index decides ties
  // and left/right placement.
  struct Cluster {
    std::vector<std::size_t> leaves;
    std::size_t min_index;
  };
  std::vector<Cluster> active;
  for (std::size_t i = 0; i < m; ++i) active.push_back({{i}, i});

  auto linkage = [&](const Cluster& a, const Cluster& b) {
    CompensatedSum s;
    for (std::size_t x : a.leaves)
      for (std::size_t y : b.leaves)
        s.add(1.0 - mean(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
    return s.value() / static_cast<double>(a.leaves.size() * b.leaves.size());
  };

  std::vector<Merge> merges;
  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_key{m, m};
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double d = linkage(active[i], active[j]);
        const std::pair<std::size_t, std::size_t> key = std::minmax(active[i].min_index, active[j].min_index);
        if (d < best || (d == best && key < best_key)) {
          best = d;
          best_key = key;
          bi = i;
          bj = j;
        }
      }
    }
    Cluster& a = active[bi];
    Cluster& b = active[bj];
    Cluster& left = a.min_index < b.min_index ? a : b;
    Cluster& right = a.min_index < b.min_index ? b : a;
    merges.push_back({left.leaves, right.leaves, best});
    Cluster merged{left.leaves, left.min_index};
    merged.leaves.insert(merged.leaves.end(), right.leaves.begin(), right.leaves.end());
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active[bi] = std::move(merged);
  }
  return merges;
}

std::vector<std::size_t> hierarchical_order(const Matrix& mean) {
  const auto merges = average_linkage(mean);
  std::vector<std::size_t> order = merges.back().left;
  order.insert(order.end(), merges.back().right.begin(), merges.back().right.end());
  return order;
}

}  // namespace repsim
