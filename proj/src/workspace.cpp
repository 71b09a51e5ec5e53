#include "repsim/workspace.hpp"

#include "repsim/cli/report.hpp"
#include "repsim/error.hpp"
#include "repsim/store/registry.hpp"
#include "repsim/store/store.hpp"

#include <cstdio>

namespace repsim::synthetic {
namespace fs = std::filesystem;

namespace {

std::string numbered(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%02zu", prefix, i);
  return buf;
}

Matrix rows(const Matrix& m, std::size_t begin, std::size_t count) {
  return m.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
}

std::vector<std::int64_t> slice(const LabelVector& labels, std::size_t begin, std::size_t count) {
  const auto& v = labels.values();
  return {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(begin + count)};
}

}  // namespace

Workspace write_workspace(const fs::path& root, const WorkspaceSpec& spec) {
  if (spec.models < 2 || spec.datasets < 1) throw Error(Errc::InvalidArgument, "a workspace needs >= 2 models and >= 1 dataset");
  Workspace ws{root, root / "config.toml", {}, {}};

  std::vector<ModelMeta> models;
  std::vector<ModelSpec> model_specs;
  for (std::size_t k = 0; k < spec.models; ++k) {
    const std::string id = numbered("synth_model_", k);
    models.push_back({id, static_cast<Objective>(k % 3), static_cast<TrainingData>(k % 4),
                      static_cast<ArchitectureClass>((k / 3) % 2), static_cast<SizeClass>((k / 2) % 4),
                      1000000 * (k + 1), "pool"});
    model_specs.push_back({id, 8 + 4 * (k % 4), 0.1 + 0.15 * static_cast<double>(k % 5), k % 3 == 2});
    ws.models.push_back(id);
  }

  std::vector<DatasetMeta> datasets;
  for (std::size_t d = 0; d < spec.datasets + spec.copies; ++d) {
    const std::string id = d < spec.datasets ? numbered("synth_ds_", d)
                                             : "synth_ds_00_copy" + std::to_string(d - spec.datasets + 1);
    datasets.push_back({id, static_cast<DatasetCategory>(d % 4), spec.dataset.classes});
    ws.datasets.push_back(id);
  }

  report::write_file(root / "models.json", Registry::dump_models(models));
  report::write_file(root / "datasets.json", Registry::dump_datasets(datasets));

  const std::vector<std::int64_t> none;
  for (std::size_t d = 0; d < ws.datasets.size(); ++d) {
    const std::uint64_t seed = derive_seed(spec.seed, d < spec.datasets ? d : 0);
    DatasetSpec shape = spec.dataset;
    shape.n += spec.test_n;
    const SyntheticData data = generate(shape, model_specs, seed);
    const auto train_labels = slice(data.labels, 0, spec.dataset.n);
    const auto test_labels = slice(data.labels, spec.dataset.n, spec.test_n);
    for (std::size_t k = 0; k < spec.models; ++k) {
      write_embedding(root, ws.datasets[d], ws.models[k], rows(data.features[k], 0, spec.dataset.n),
                      spec.labels ? train_labels : none, Split::Train, spec.float32);
      if (spec.test_n > 0)
        write_embedding(root, ws.datasets[d], ws.models[k], rows(data.features[k], spec.dataset.n, spec.test_n),
                        spec.labels ? test_labels : none, Split::Test, spec.float32);
    }
  }

  std::string config =
      "feature_root = \".\"\n"
      "models_registry = \"models.json\"\n"
      "datasets_registry = \"datasets.json\"\n"
      "output_dir = \"out\"\n"
      "datasets = \"all\"\n"
      "seed = " + std::to_string(spec.seed) + "\n";
  config += spec.config_extra;
  report::write_file(ws.config, config);
  return ws;
}

}  // namespace repsim::synthetic
