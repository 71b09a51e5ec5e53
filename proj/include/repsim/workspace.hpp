#pragma once

#include "repsim/synthetic.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace repsim::synthetic {

struct WorkspaceSpec {
  std::size_t models = 6;
  std::size_t datasets = 3;
  DatasetSpec dataset;     // shape shared by every dataset
  std::size_t test_n = 0;  // rows of the test split; 0 writes none
  std::size_t copies = 0;  // extra datasets that repeat the first one byte for byte
  bool labels = true;
  bool float32 = false;
  std::uint64_t seed = 0;
  /// Appended verbatim to the generated config after the top-level keys.
  std::string config_extra;
};

struct Workspace {
  std::filesystem::path root;
  std::filesystem::path config;
  std::vector<std::string> models;
  std::vector<std::string> datasets;
};

/// Writes models.json, datasets.json, features/ and config.toml under
/// `root`. Model metadata cycles through the attribute values so that every
/// attribute yields several sets; model k has 8 + 4 (k mod 4) dimensions.
/// Datasets are "synth_ds_00", ...; copies are "synth_ds_00_copy1", ...
Workspace write_workspace(const std::filesystem::path& root, const WorkspaceSpec& spec);

}  // namespace repsim::synthetic
