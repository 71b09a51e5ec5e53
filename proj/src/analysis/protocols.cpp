#include "repsim/analysis/protocols.hpp"

#include <algorithm>
#include <cmath>

namespace repsim {
namespace {

double pair_value(const SimilarityMatrix& m, const ModelPair& p) {
  const auto at = [&](const std::string& id) {
    return static_cast<Eigen::Index>(std::find(m.models.begin(), m.models.end(), id) - m.models.begin());
  };
  return m.values(at(p.first), at(p.second));
}

}  // namespace

ConvergenceTable subsample_convergence(const DatasetView& view, const ModelSet& models, const Measure& measure,
                                       std::span<const std::size_t> ks, std::uint64_t seed,
                                       const SimilarityOptions& options) {
  if (!view.labels)
    throw Error(Errc::MissingLabels, "convergence on dataset '" + view.dataset_id + "' needs labels");
  if (ks.empty()) throw Error(Errc::InvalidArgument, "no per-class sample sizes given");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == 0 || (i > 0 && ks[i] <= ks[i - 1]))
      throw Error(Errc::InvalidArgument, "per-class sample sizes must be positive and strictly increasing");
  }
  const std::size_t classes = view.labels->num_classes();
  if (ks.back() * classes > view.n())
    throw Error(Errc::KTooLarge, "k = " + std::to_string(ks.back()) + " needs " +
                                     std::to_string(ks.back() * classes) + " rows, dataset '" + view.dataset_id +
                                     "' has " + std::to_string(view.n()));

  ConvergenceTable out;
  out.dataset_id = view.dataset_id;
  out.measure = measure;
  out.ks.assign(ks.begin(), ks.end());
  out.pairs = enumerate_pairs(models, models);
  const auto np = static_cast<Eigen::Index>(out.pairs.size());
  out.similarity.resize(np, static_cast<Eigen::Index>(ks.size()));
  for (std::size_t c = 0; c < ks.size(); ++c) {
    const SampleIndexSet rows = stratified_subsample(*view.labels, ks[c] * classes, seed);
    const SimilarityMatrix m = similarity_matrix(view, models, measure, rows, options);
    for (Eigen::Index p = 0; p < np; ++p)
      out.similarity(p, static_cast<Eigen::Index>(c)) = pair_value(m, out.pairs[static_cast<std::size_t>(p)]);
  }
  out.differences.resize(np, static_cast<Eigen::Index>(ks.size() - 1));
  for (Eigen::Index c = 0; c + 1 < static_cast<Eigen::Index>(ks.size()); ++c)
    out.differences.col(c) = (out.similarity.col(c) - out.similarity.col(c + 1)).cwiseAbs();
  return out;
}

BootstrapResult bootstrap_stability(const DatasetView& view, const ModelSet& models, const Measure& measure,
                                    std::size_t iterations, std::size_t size, std::uint64_t seed,
                                    const SimilarityOptions& options) {
  if (iterations == 0) throw Error(Errc::InvalidArgument, "bootstrap needs at least one iteration");
  if (size == 0 || size > view.n())
    throw Error(Errc::InvalidArgument, "bootstrap size " + std::to_string(size) + " must lie in [1, " +
                                           std::to_string(view.n()) + "]");
  BootstrapResult out;
  out.dataset_id = view.dataset_id;
  out.measure = measure;
  out.iterations = iterations;
  out.size = size;
  out.seed = seed;
  for (auto& pair : enumerate_pairs(models, models)) out.pairs.push_back({std::move(pair), {}, 0, 0, 0, 0});

  for (std::size_t it = 0; it < iterations; ++it) {
    const SampleIndexSet rows = bootstrap_indices(view.n(), size, seed ^ static_cast<std::uint64_t>(it));
    const SimilarityMatrix m = similarity_matrix(view, models, measure, rows, options);
    for (auto& p : out.pairs) p.values.push_back(pair_value(m, p.pair));
  }
  for (auto& p : out.pairs) {
    p.mean = shifted_mean(p.values);
    CompensatedSum sq;
    for (double v : p.values) sq.add((v - p.mean) * (v - p.mean));
    p.std = std::sqrt(sq.value() / static_cast<double>(p.values.size()));
    const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
    p.min = *lo;
    p.max = *hi;
  }
  return out;
}

}  // namespace repsim
