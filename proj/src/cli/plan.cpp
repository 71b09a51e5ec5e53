#include "repsim/cli/plan.hpp"

#include "repsim/error.hpp"

#include <map>

namespace repsim {
namespace {

class Builder {
 public:
  Builder(const RunConfig& cfg, const std::vector<Comparison>& comparisons) : cfg_(cfg), comparisons_(comparisons) {}

  std::size_t add(Task t) {
    const auto it = index_.find(t.id);
    if (it != index_.end()) return it->second;
    index_.emplace(t.id, tasks_.size());
    tasks_.push_back(std::move(t));
    return tasks_.size() - 1;
  }

  std::size_t load(const std::string& ds) { return add({TaskKind::Load, "load:" + ds, ds, {}, {}, 0, 0, {}}); }

  std::size_t similarity(std::size_t m, const std::string& ds) {
    const std::size_t dep = load(ds);
    return add({TaskKind::Similarity, "similarity:" + name(m) + ":" + ds, ds, {}, {}, m, 0, {dep}});
  }

  void similarities() {
    for (const auto& ds : cfg_.datasets)
      for (std::size_t m = 0; m < cfg_.measures.size(); ++m) similarity(m, ds);
    if (cfg_.datasets.size() < 2) return;
    for (std::size_t m = 0; m < cfg_.measures.size(); ++m) {
      std::vector<std::size_t> deps;
      for (const auto& ds : cfg_.datasets) deps.push_back(similarity(m, ds));
      add({TaskKind::Aggregate, "aggregate:" + name(m), {}, {}, {}, m, 0, deps});
    }
  }

  void consistency() {
    if (cfg_.datasets.size() < 2)
      throw Error(Errc::ConfigError, "datasets: consistency needs at least two datasets");
    const auto& ds = cfg_.datasets;
    for (std::size_t m = 0; m < cfg_.measures.size(); ++m) {
      for (std::size_t c = 0; c < comparisons_.size(); ++c) {
        std::vector<std::size_t> cells;
        for (std::size_t a = 0; a < ds.size(); ++a) {
          for (std::size_t b = a + 1; b < ds.size(); ++b) {
            cells.push_back(add({TaskKind::Consistency,
                                 "consistency:" + name(m) + ":" + comparisons_[c].id() + ":" + ds[a] + "|" + ds[b],
                                 ds[a], ds[b], {}, m, c, {similarity(m, ds[a]), similarity(m, ds[b])}}));
          }
        }
        add({TaskKind::Distribution, "distribution:" + name(m) + ":" + comparisons_[c].id(), {}, {}, {}, m, c, cells});
      }
    }
  }

  std::vector<std::size_t> probes() {
    std::vector<std::size_t> out;
    for (const auto& ds : cfg_.probe.datasets)
      for (const auto& model : cfg_.probe.models)
        out.push_back(add({TaskKind::Probe, "probe:" + ds + ":" + model, ds, {}, model, 0, 0, {}}));
    return out;
  }

  void gap_correlations(bool with_probes) {
    for (const auto& ds : cfg_.probe.datasets) {
      for (std::size_t m = 0; m < cfg_.measures.size(); ++m) {
        std::vector<std::size_t> deps{similarity(m, ds)};
        if (with_probes)
          for (const auto& model : cfg_.probe.models) deps.push_back(index_.at("probe:" + ds + ":" + model));
        add({TaskKind::GapCorrelation, "gap-corr:" + name(m) + ":" + ds, ds, {}, {}, m, 0, deps});
      }
    }
  }

  void per_dataset(TaskKind kind, const char* prefix, const std::vector<std::string>& datasets) {
    for (const auto& ds : datasets) {
      const std::size_t dep = load(ds);
      for (std::size_t m = 0; m < cfg_.measures.size(); ++m)
        add({kind, std::string(prefix) + ":" + name(m) + ":" + ds, ds, {}, {}, m, 0, {dep}});
    }
  }

  std::vector<Task> finish() {
    std::vector<std::size_t> all(tasks_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    add({TaskKind::Report, "report", {}, {}, {}, 0, 0, all});
    return std::move(tasks_);
  }

 private:
  std::string name(std::size_t m) const { return cfg_.measures[m].name(); }

  const RunConfig& cfg_;
  const std::vector<Comparison>& comparisons_;
  std::vector<Task> tasks_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace

Command parse_command(std::string_view name) {
  static const std::pair<std::string_view, Command> table[] = {
      {"validate", Command::Validate}, {"sim", Command::Sim},         {"consistency", Command::Consistency},
      {"convergence", Command::Convergence}, {"bootstrap", Command::Bootstrap}, {"probe", Command::Probe},
      {"gap-corr", Command::GapCorr},  {"report", Command::Report}};
  for (const auto& [n, c] : table)
    if (n == name) return c;
  throw Error(Errc::ConfigError, "unknown command '" + std::string(name) + "'");
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Validate: return "validate";
    case Command::Sim: return "sim";
    case Command::Consistency: return "consistency";
    case Command::Convergence: return "convergence";
    case Command::Bootstrap: return "bootstrap";
    case Command::Probe: return "probe";
    case Command::GapCorr: return "gap-corr";
    case Command::Report: return "report";
  }
  return "?";
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Load: return "load";
    case TaskKind::Similarity: return "similarity";
    case TaskKind::Aggregate: return "aggregate";
    case TaskKind::Consistency: return "consistency";
    case TaskKind::Distribution: return "distribution";
    case TaskKind::Convergence: return "convergence";
    case TaskKind::Bootstrap: return "bootstrap";
    case TaskKind::Probe: return "probe";
    case TaskKind::GapCorrelation: return "gap-corr";
    case TaskKind::Report: return "report";
  }
  return "?";
}

std::vector<Task> plan(Command command, const RunConfig& config, const std::vector<Comparison>& comparisons) {
  Builder b(config, comparisons);
  switch (command) {
    case Command::Validate: return {};
    case Command::Sim: b.similarities(); break;
    case Command::Consistency:
      b.similarities();
      b.consistency();
      break;
    case Command::Convergence: b.per_dataset(TaskKind::Convergence, "convergence", config.convergence.datasets); break;
    case Command::Bootstrap: b.per_dataset(TaskKind::Bootstrap, "bootstrap", config.bootstrap.datasets); break;
    case Command::Probe: b.probes(); break;
    case Command::GapCorr: b.gap_correlations(false); break;
    case Command::Report:
      b.similarities();
      if (config.datasets.size() >= 2) b.consistency();
      if (config.probe.enabled) {
        b.probes();
        b.gap_correlations(true);
      }
      break;
  }
  return b.finish();
}

}  // namespace repsim
