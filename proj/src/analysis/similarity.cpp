#include "repsim/analysis/similarity.hpp"

#include "repsim/parallel.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>

namespace repsim {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Outcome {
  double value = kNaN;
  std::optional<PairFailure> failure;
};

// Prepares each member once, then compares the requested index pairs.
std::vector<Outcome> compute_pairs(const DatasetView& view, const std::vector<std::string>& members,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                   const Measure& measure, std::span<const std::size_t> rows,
                                   const SimilarityOptions& options) {
  std::vector<std::optional<PreparedRepresentation>> prepared(members.size());
  std::vector<std::optional<Error>> prep_errors(members.size());
  parallel_for(members.size(), options.jobs, [&](std::size_t i) {
    try {
      const EmbeddingMatrix& z = view.features_of(members[i]);
      prepared[i].emplace(prepare(measure, l2_normalize(z.select_rows(rows)), options.measure));
    } catch (const Error& e) {
      prep_errors[i].emplace(e.code(),
                             "model '" + members[i] + "' on dataset '" + view.dataset_id + "': " + e.message(),
                             e.location());
    }
  });

  std::vector<Outcome> out(pairs.size());
  parallel_for(pairs.size(), options.jobs, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const ModelPair names = members[i] < members[j] ? ModelPair{members[i], members[j]}
                                                    : ModelPair{members[j], members[i]};
    for (std::size_t side : {i, j}) {
      if (prep_errors[side]) {
        out[k].failure = PairFailure{names, prep_errors[side]->code(), prep_errors[side]->message()};
        return;
      }
    }
    try {
      out[k].value = compare(*prepared[i], *prepared[j]).value;
    } catch (const Error& e) {
      out[k].failure = PairFailure{names, e.code(),
                                   "pair (" + names.first + ", " + names.second + ") on dataset '" +
                                       view.dataset_id + "': " + e.message()};
    }
  });

  if (!options.allow_partial) {
    for (const auto& o : out)
      if (o.failure) throw Error(o.failure->code, o.failure->message);
  }
  return out;
}

std::size_t index_of(const std::vector<std::string>& v, const std::string& id) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), id) - v.begin());
}

}  // namespace

std::size_t DatasetView::n() const {
  if (features.empty()) throw Error(Errc::EmptyDataset, "dataset view '" + dataset_id + "' has no models");
  return features.front()->n();
}

const EmbeddingMatrix& DatasetView::features_of(std::string_view model) const {
  for (std::size_t i = 0; i < models.size(); ++i)
    if (models[i] == model) return *features[i];
  throw Error(Errc::MissingEmbedding,
              "no embedding for model '" + std::string(model) + "' on dataset '" + dataset_id + "'");
}

DatasetView load_dataset(const EmbeddingStore& store, std::string_view dataset, std::span<const std::string> models,
                         bool require_labels, Split split) {
  DatasetView view;
  view.dataset_id = std::string(dataset);
  for (const auto& m : models) {
    LoadedEmbedding e = store.load(dataset, m, split);
    if (!view.features.empty() && e.features->n() != view.features.front()->n())
      throw Error(Errc::DimensionMismatch, "model '" + m + "' has " + std::to_string(e.features->n()) +
                                               " rows on dataset '" + view.dataset_id + "', '" + view.models.front() +
                                               "' has " + std::to_string(view.features.front()->n()));
    view.models.push_back(m);
    view.features.push_back(e.features);
  }
  try {
    view.labels = store.dataset_labels(dataset, models, split);
  } catch (const Error& e) {
    if (e.code() != Errc::MissingLabels || require_labels) throw;
  }
  return view;
}

SampleIndexSet dataset_sample(const DatasetView& view, std::size_t target_n, std::uint64_t seed) {
  if (view.labels) return stratified_subsample(*view.labels, target_n, seed);
  return uniform_subsample(view.n(), target_n, seed);
}

SimilarityMatrix similarity_matrix(const DatasetView& view, const ModelSet& models, const Measure& measure,
                                   const SampleIndexSet& rows, const SimilarityOptions& options) {
  const std::size_t m = models.members.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  const auto outcomes = compute_pairs(view, models.members, pairs, measure, rows.indices, options);

  SimilarityMatrix out;
  out.dataset_id = view.dataset_id;
  out.models = models.members;
  out.measure = measure;
  out.values = Matrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = outcomes[k].value;
    out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = outcomes[k].value;
    if (outcomes[k].failure) out.failures.push_back(*outcomes[k].failure);
  }
  return out;
}

SimilarityVector similarity_vector(const DatasetView& view, const ModelSet& theta, const ModelSet& phi,
                                   const Measure& measure, const SampleIndexSet& rows,
                                   const SimilarityOptions& options) {
  SimilarityVector out;
  out.dataset_id = view.dataset_id;
  out.theta_set = theta.set_id;
  out.phi_set = phi.set_id;
  out.measure = measure;
  out.pairs = enumerate_pairs(theta, phi);

  std::vector<std::string> members;
  for (const auto& [a, b] : out.pairs) {
    members.push_back(a);
    members.push_back(b);
  }
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [a, b] : out.pairs) pairs.emplace_back(index_of(members, a), index_of(members, b));
  const auto outcomes = compute_pairs(view, members, pairs, measure, rows.indices, options);
  for (const auto& o : outcomes) {
    out.values.push_back(o.value);
    if (o.failure) out.failures.push_back(*o.failure);
  }
  return out;
}

SimilarityVector similarity_vector(const SimilarityMatrix& matrix, const ModelSet& theta, const ModelSet& phi) {
  SimilarityVector out;
  out.dataset_id = matrix.dataset_id;
  out.theta_set = theta.set_id;
  out.phi_set = phi.set_id;
  out.measure = matrix.measure;
  out.pairs = enumerate_pairs(theta, phi);
  for (const auto& pair : out.pairs) {
    const std::size_t i = index_of(matrix.models, pair.first);
    const std::size_t j = index_of(matrix.models, pair.second);
    for (const auto& [id, idx] : {std::pair{&pair.first, i}, std::pair{&pair.second, j}})
      if (idx == matrix.models.size())
        throw Error(Errc::MissingEmbedding,
                    "model '" + *id + "' is not in the similarity matrix of dataset '" + matrix.dataset_id + "'");
    out.values.push_back(matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  for (const auto& f : matrix.failures)
    if (std::binary_search(out.pairs.begin(), out.pairs.end(), f.pair)) out.failures.push_back(f);
  return out;
}

}  // namespace repsim
