#include "repsim/cli/app.hpp"

#include "repsim/cli/config.hpp"
#include "repsim/cli/pipeline.hpp"
#include "repsim/cli/plan.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace repsim {

int exit_code(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Io: return 3;
    case ErrorCategory::Numerical: return 4;
  }
  return 1;
}

namespace {

struct Flags {
  std::string config;
  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  std::string output;
  bool dry_run = false;
  bool allow_partial = false;
  bool exhaustive = false;
};

int run_command(Command command, const Flags& flags, const CLI::App& app, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(flags.config);
  if (app.count("--jobs")) {
    if (flags.jobs == 0) throw Error(Errc::ConfigError, "--jobs: must be at least 1");
    cfg.jobs = flags.jobs;
  }
  if (app.count("--seed")) cfg.seed = flags.seed;
  if (app.count("--output")) cfg.output_dir = flags.output;
  if (flags.allow_partial) cfg.allow_partial = true;
  if (flags.exhaustive) cfg.probe.search.exhaustive = true;

  const PreparedRun run = prepare_run(command, std::move(cfg));
  if (flags.dry_run) {
    out << format_plan(run.tasks);
    return 0;
  }

  const RunReport report = execute(run, err);
  if (command == Command::Validate) {
    if (const TaskStatus* f = report.first_failure()) {
      out << report.failed() << " of " << report.statuses.size() << " checks failed\n";
      return exit_code(errc_category(f->code));
    }
    out << "all " << report.statuses.size() << " checks passed\n";
    return 0;
  }
  out << report.files.size() << " files written to " << run.config.output_dir.string() << "\n";
  if (report.failed() > 0 || !report.pair_failures.empty())
    out << report.failed() << " tasks and " << report.pair_failures.size()
        << " model pairs failed; see status-" << to_string(command) << ".json\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Representational similarity of vision models across datasets", "repsim"};
  app.fallthrough();
  app.require_subcommand(1);

  Flags flags;
  app.add_option("-c,--config", flags.config, "TOML run configuration")->required();
  app.add_option("-j,--jobs", flags.jobs, "worker threads (overrides the config)");
  app.add_option("--seed", flags.seed, "subsampling and probe seed (overrides the config)");
  app.add_option("-o,--output", flags.output, "output directory (overrides the config)");
  app.add_flag("--dry-run", flags.dry_run, "print the task plan and exit");
  app.add_flag("--allow-partial", flags.allow_partial, "record failing tasks and continue");

  const std::pair<Command, const char*> commands[] = {
      {Command::Validate, "check every embedding and label file"},
      {Command::Sim, "similarity matrices per dataset and their aggregate"},
      {Command::Consistency, "similarity consistency across dataset pairs"},
      {Command::Convergence, "similarity against per-class subsample size"},
      {Command::Bootstrap, "bootstrap stability of pairwise similarities"},
      {Command::Probe, "linear probe accuracy per model and dataset"},
      {Command::GapCorr, "correlation of similarity with probe accuracy gaps"},
      {Command::Report, "similarities, consistency and (if enabled) probes in one run"}};
  std::vector<std::pair<Command, CLI::App*>> subs;
  for (const auto& [command, help] : commands) subs.emplace_back(command, app.add_subcommand(std::string(to_string(command)), help));
  for (const auto& [command, sub] : subs)
    if (command == Command::Probe || command == Command::Report)
      sub->add_flag("--exhaustive", flags.exhaustive, "evaluate all weight-decay grid points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [command, sub] : subs)
      if (sub->parsed()) return run_command(command, flags, app, out, err);
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace repsim
