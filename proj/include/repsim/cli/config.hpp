#pragma once

#include "repsim/analysis/model_set.hpp"
#include "repsim/core/measure.hpp"
#include "repsim/probe/protocol.hpp"
#include "repsim/store/registry.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace repsim {

struct SubsampleSettings {
  std::size_t default_size = 10000;
  std::map<std::string, std::size_t> per_measure{{"cka_rbf(0.2)", 30000}};  // keyed by Measure::name()
  std::size_t rbf_block = 256;

  std::size_t size_for(const Measure& m) const;
};

struct ConvergenceSettings {
  std::vector<std::size_t> per_class{1, 5, 10, 20, 30, 40};
  std::vector<std::string> datasets;  // empty: every configured dataset
};

struct BootstrapSettings {
  std::size_t iterations = 500;
  std::size_t size = 0;  // 0: the measure's subsample size
  std::vector<std::string> models;    // empty: every configured model
  std::vector<std::string> datasets;  // empty: every configured dataset
};

struct ProbeSettings {
  bool enabled = false;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  SearchOptions search;
  std::vector<std::string> models;
  std::vector<std::string> datasets;
};

/// One (theta, phi) comparison of model sets.
struct Comparison {
  ModelSet theta;
  ModelSet phi;
  std::vector<ModelPair> pairs;

  std::string id() const { return theta.set_id + "|" + phi.set_id; }
};

struct RunConfig {
  std::filesystem::path config_path;
  std::filesystem::path feature_root;
  std::filesystem::path models_registry;
  std::filesystem::path datasets_registry;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool allow_partial = false;

  std::vector<std::string> datasets;
  std::vector<std::string> models;  // the model universe; defaults to the registry
  std::vector<Measure> measures{Measure::cka_linear(), Measure::cka_rbf(0.2), Measure::cka_rbf(0.4),
                                Measure::rsa_spearman()};
  std::vector<Attribute> attributes{Attribute::All, Attribute::Objective, Attribute::TrainingData,
                                    Attribute::Architecture, Attribute::Size};
  std::vector<ModelSet> custom_sets;

  SubsampleSettings subsample;
  ConvergenceSettings convergence;
  BootstrapSettings bootstrap;
  ProbeSettings probe;
};

/// Parses TOML text. Relative paths resolve against `base_dir`. Unknown
/// keys and malformed values raise ConfigError naming the field path.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);

/// Reads and parses a config file (IoError if unreadable).
RunConfig load_config(const std::filesystem::path& path);

/// Checks every referenced id against the registry and fills defaulted
/// lists. Raises ConfigError with the offending field path.
void resolve_config(RunConfig& config, const Registry& registry);

/// Model-set comparisons: for each attribute, every unordered pair of its
/// sets (including a set with itself), then the same over custom sets.
/// Comparisons with fewer than three model pairs are dropped.
std::vector<Comparison> build_comparisons(const RunConfig& config, const Registry& registry);

}  // namespace repsim
