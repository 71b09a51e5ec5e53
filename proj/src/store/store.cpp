#include "repsim/store/store.hpp"

#include "repsim/error.hpp"
#include "repsim/store/npy.hpp"

#include <mutex>

namespace repsim {

EmbeddingStore::EmbeddingStore(std::filesystem::path root, Registry registry)
    : root_(std::move(root)), registry_(std::move(registry)) {}

std::filesystem::path EmbeddingStore::directory(std::string_view dataset, std::string_view model,
                                                Split split) const {
  auto dir = root_ / "features" / std::string(dataset) / std::string(model);
  if (split == Split::Test) dir /= "test";
  return dir;
}

bool EmbeddingStore::has(std::string_view dataset, std::string_view model, Split split) const {
  return std::filesystem::exists(directory(dataset, model, split) / "features.npy");
}

LoadedEmbedding EmbeddingStore::load(std::string_view dataset, std::string_view model, Split split) const {
  const DatasetMeta& dmeta = registry_.dataset(dataset);
  registry_.model(model);

  Key key{std::string(dataset), std::string(model), split};
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }

  const auto dir = directory(dataset, model, split);
  const auto fpath = dir / "features.npy";
  if (!std::filesystem::exists(fpath))
    throw Error(Errc::MissingEmbedding, "no embedding for model '" + std::string(model) + "' on dataset '" +
                                            std::string(dataset) + "' (" + fpath.string() + ")");

  LoadedEmbedding out;
  Matrix data = npy::read_matrix(fpath);
  out.features = std::make_shared<const EmbeddingMatrix>(std::string(model), std::string(dataset), std::move(data));

  const auto lpath = dir / "labels.npy";
  if (std::filesystem::exists(lpath)) {
    auto labels = npy::read_int64(lpath);
    if (labels.size() != out.features->n())
      throw Error(Errc::ShapeMismatch, lpath.string() + ": " + std::to_string(labels.size()) +
                                           " labels for " + std::to_string(out.features->n()) + " rows");
    out.labels = std::make_shared<const LabelVector>(std::move(labels), dmeta.num_classes);
  }

  std::unique_lock lock(mutex_);
  // A concurrent loader may have won the race; keep the first entry.
  return cache_.try_emplace(std::move(key), std::move(out)).first->second;
}

std::shared_ptr<const LabelVector> EmbeddingStore::dataset_labels(std::string_view dataset,
                                                                  std::span<const std::string> models,
                                                                  Split split) const {
  std::shared_ptr<const LabelVector> first;
  std::string first_model;
  for (const auto& m : models) {
    const LoadedEmbedding e = load(dataset, m, split);
    if (!e.labels) continue;
    if (!first) {
      first = e.labels;
      first_model = m;
    } else if (!(*first == *e.labels)) {
      throw Error(Errc::LabelMismatch, "labels of '" + m + "' and '" + first_model + "' differ on dataset '" +
                                           std::string(dataset) + "'");
    }
  }
  if (!first) throw Error(Errc::MissingLabels, "no labels.npy for dataset '" + std::string(dataset) + "'");
  return first;
}

std::size_t EmbeddingStore::rows(std::string_view dataset, std::span<const std::string> models,
                                 Split split) const {
  if (models.empty()) throw Error(Errc::InvalidArgument, "no models given");
  return load(dataset, models.front(), split).features->n();
}

void EmbeddingStore::evict(std::string_view dataset) {
  std::unique_lock lock(mutex_);
  std::erase_if(cache_, [&](const auto& kv) { return std::get<0>(kv.first) == dataset; });
}

void EmbeddingStore::clear() {
  std::unique_lock lock(mutex_);
  cache_.clear();
}

void write_embedding(const std::filesystem::path& root, std::string_view dataset, std::string_view model,
                     const Matrix& features, std::span<const std::int64_t> labels, Split split, bool float32) {
  auto dir = root / "features" / std::string(dataset) / std::string(model);
  if (split == Split::Test) dir /= "test";
  std::filesystem::create_directories(dir);
  npy::write_matrix(dir / "features.npy", features, float32 ? npy::DType::Float32 : npy::DType::Float64);
  if (!labels.empty()) npy::write_int64(dir / "labels.npy", labels);
}

}  // namespace repsim
