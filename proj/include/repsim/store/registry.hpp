#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace repsim {

enum class Objective { ImgTxt, SSL, Sup };
enum class TrainingData { IN1k, IN21k, Large, XLarge };
enum class ArchitectureClass { CNN, TX };
enum class SizeClass { Small, Medium, Large, XLarge };
enum class DatasetCategory { NaturalMulti, NaturalSingle, Specialized, Structured };

// JSON spellings: "Img-Txt", "IN21k", "xlarge", "natural-multi", ...
std::string_view to_string(Objective v) noexcept;
std::string_view to_string(TrainingData v) noexcept;
std::string_view to_string(ArchitectureClass v) noexcept;
std::string_view to_string(SizeClass v) noexcept;
std::string_view to_string(DatasetCategory v) noexcept;

struct ModelMeta {
  std::string model_id;
  Objective objective;
  TrainingData training_data_class;
  ArchitectureClass architecture_class;
  SizeClass size_class;
  std::uint64_t param_count;
  std::string rep_layer;

  bool operator==(const ModelMeta&) const = default;
};

struct DatasetMeta {
  std::string dataset_id;
  DatasetCategory category;
  std::size_t num_classes;

  bool operator==(const DatasetMeta&) const = default;
};

/// Model and dataset metadata. Ids are unique; insertion order is kept.
class Registry {
 public:
  Registry() = default;
  Registry(std::vector<ModelMeta> models, std::vector<DatasetMeta> datasets);

  /// Parses models.json / datasets.json. Any schema violation (missing or
  /// extra field, unknown enum spelling, non-positive count, duplicate id)
  /// is a FormatError naming the offending entry.
  static Registry load(const std::filesystem::path& models_json,
                       const std::filesystem::path& datasets_json);
  static std::vector<ModelMeta> parse_models(std::string_view json_text);
  static std::vector<DatasetMeta> parse_datasets(std::string_view json_text);
  static std::string dump_models(const std::vector<ModelMeta>& models);
  static std::string dump_datasets(const std::vector<DatasetMeta>& datasets);

  const std::vector<ModelMeta>& models() const noexcept { return models_; }
  const std::vector<DatasetMeta>& datasets() const noexcept { return datasets_; }

  /// Throw UnknownModel / UnknownDataset.
  const ModelMeta& model(std::string_view id) const;
  const DatasetMeta& dataset(std::string_view id) const;
  bool has_model(std::string_view id) const noexcept;
  bool has_dataset(std::string_view id) const noexcept;

 private:
  std::vector<ModelMeta> models_;
  std::vector<DatasetMeta> datasets_;
};

}  // namespace repsim
