#pragma once

#include "repsim/cli/config.hpp"
#include "repsim/cli/plan.hpp"
#include "repsim/error.hpp"
#include "repsim/store/registry.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace repsim {

struct TaskStatus {
  enum class State { Ok, Failed, Skipped };

  std::string id;
  State state = State::Ok;
  Errc code = Errc::InvalidArgument;  // meaningful unless Ok
  std::string message;
};

struct RunReport {
  Command command = Command::Validate;
  std::vector<TaskStatus> statuses;
  std::vector<std::filesystem::path> files;  // relative to the output directory, sorted
  /// Pair-level failures recorded inside otherwise successful tasks.
  std::vector<std::string> pair_failures;

  std::size_t failed() const;
  /// First failed status, if any.
  const TaskStatus* first_failure() const;
};

/// One line per task: "id" followed by its dependency ids.
std::string format_plan(const std::vector<Task>& tasks);

struct PreparedRun {
  Command command = Command::Validate;
  RunConfig config;  // resolved against the registry
  Registry registry;
  std::vector<Comparison> comparisons;  // only for commands that need them
  std::vector<Task> tasks;
};

/// Loads the registries named in the config, resolves it and plans the
/// command. Nothing is written.
PreparedRun prepare_run(Command command, RunConfig config);

/// Executes the plan in order and writes every output under
/// config.output_dir. Without allow_partial the first task error is
/// rethrown; with it, failures are recorded and dependents are skipped.
/// Progress lines go to `log`.
RunReport execute(const PreparedRun& run, std::ostream& log);

}  // namespace repsim
