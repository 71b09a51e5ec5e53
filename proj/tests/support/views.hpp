#pragma once

#include "repsim/analysis/similarity.hpp"
#include "repsim/synthetic.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace repsim::testing {

inline DatasetView make_view(std::string dataset, const std::vector<std::pair<std::string, Matrix>>& models,
                             std::shared_ptr<const LabelVector> labels = nullptr) {
  DatasetView v;
  v.dataset_id = std::move(dataset);
  for (const auto& [id, m] : models) {
    v.models.push_back(id);
    v.features.push_back(std::make_shared<const EmbeddingMatrix>(id, v.dataset_id, m));
  }
  v.labels = std::move(labels);
  return v;
}

/// Synthetic view with models sharing one latent at different noise levels.
inline DatasetView synthetic_view(std::string dataset, const std::vector<synthetic::ModelSpec>& specs,
                                  const synthetic::DatasetSpec& spec, std::uint64_t seed) {
  auto data = synthetic::generate(spec, specs, seed);
  std::vector<std::pair<std::string, Matrix>> models;
  for (std::size_t i = 0; i < specs.size(); ++i) models.emplace_back(specs[i].id, data.features[i]);
  return make_view(std::move(dataset), models, std::make_shared<const LabelVector>(data.labels));
}

inline SampleIndexSet all_rows(std::size_t n) {
  SampleIndexSet s;
  for (std::size_t i = 0; i < n; ++i) s.indices.push_back(i);
  return s;
}

}  // namespace repsim::testing
