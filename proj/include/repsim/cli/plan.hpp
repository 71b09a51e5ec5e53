#pragma once

#include "repsim/cli/config.hpp"

#include <string>
#include <vector>

namespace repsim {

enum class Command { Validate, Sim, Consistency, Convergence, Bootstrap, Probe, GapCorr, Report };

Command parse_command(std::string_view name);
std::string_view to_string(Command command);

enum class TaskKind { Load, Similarity, Aggregate, Consistency, Distribution, Convergence, Bootstrap, Probe,
                      GapCorrelation, Report };

std::string_view to_string(TaskKind kind);

struct Task {
  TaskKind kind;
  std::string id;  // unique, e.g. "similarity:cka_linear:cifar10"
  std::string dataset;
  std::string dataset_b;  // second dataset of a consistency task
  std::string model;
  std::size_t measure = 0;     // index into config.measures
  std::size_t comparison = 0;  // index into the comparison list
  std::vector<std::size_t> deps;  // indices of earlier tasks
};

/// Ordered task list for a command; every dependency precedes its user.
/// Datasets are processed one at a time so that embeddings can be released
/// after their last use.
std::vector<Task> plan(Command command, const RunConfig& config, const std::vector<Comparison>& comparisons);

}  // namespace repsim
