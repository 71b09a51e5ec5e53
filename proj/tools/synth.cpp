#include "repsim/cli/app.hpp"
#include "repsim/workspace.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Writes a synthetic embedding workspace with registries and a config", "repsim-synth"};
  std::string root;
  repsim::synthetic::WorkspaceSpec spec;
  bool no_labels = false;
  bool probe = false;
  app.add_option("root", root, "output directory")->required();
  app.add_option("--models", spec.models, "number of models")->capture_default_str();
  app.add_option("--datasets", spec.datasets, "number of distinct datasets")->capture_default_str();
  app.add_option("--copies", spec.copies, "extra datasets duplicating the first")->capture_default_str();
  app.add_option("--rows", spec.dataset.n, "training rows per dataset")->capture_default_str();
  app.add_option("--test-rows", spec.test_n, "test rows per dataset (0: no test split)")->capture_default_str();
  app.add_option("--classes", spec.dataset.classes, "classes per dataset")->capture_default_str();
  app.add_option("--latent", spec.dataset.latent_dim, "latent dimension")->capture_default_str();
  app.add_option("--seed", spec.seed, "generator seed")->capture_default_str();
  app.add_flag("--float32", spec.float32, "store features as float32");
  app.add_flag("--no-labels", no_labels, "omit label files");
  app.add_flag("--probe", probe, "enable the probe section in the config");
  CLI11_PARSE(app, argc, argv);
  spec.labels = !no_labels;
  if (probe) spec.config_extra = "\n[probe]\nenabled = true\n";

  try {
    const auto ws = repsim::synthetic::write_workspace(root, spec);
    std::cout << "wrote " << ws.models.size() << " models x " << ws.datasets.size() << " datasets; config "
              << ws.config.string() << "\n";
  } catch (const repsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return repsim::exit_code(e.category());
  }
  return 0;
}
