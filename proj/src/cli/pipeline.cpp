#include "repsim/cli/pipeline.hpp"

#include "repsim/analysis/aggregate.hpp"
#include "repsim/analysis/consistency.hpp"
#include "repsim/analysis/protocols.hpp"
#include "repsim/analysis/similarity.hpp"
#include "repsim/cli/report.hpp"
#include "repsim/probe/protocol.hpp"
#include "repsim/store/store.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace repsim {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using State = TaskStatus::State;

std::size_t RunReport::failed() const {
  return static_cast<std::size_t>(
      std::count_if(statuses.begin(), statuses.end(), [](const TaskStatus& s) { return s.state != State::Ok; }));
}

const TaskStatus* RunReport::first_failure() const {
  for (const auto& s : statuses)
    if (s.state == State::Failed) return &s;
  return nullptr;
}

std::string format_plan(const std::vector<Task>& tasks) {
  std::ostringstream out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    out << i << " " << t.id;
    if (t.kind == TaskKind::Report) {
      out << " <- all " << t.deps.size() << " tasks";
    } else if (!t.deps.empty()) {
      out << " <-";
      for (std::size_t d : t.deps) out << " " << tasks[d].id;
    }
    out << "\n";
  }
  return out.str();
}

PreparedRun prepare_run(Command command, RunConfig config) {
  PreparedRun run;
  run.command = command;
  run.registry = Registry::load(config.models_registry, config.datasets_registry);
  resolve_config(config, run.registry);
  const bool needs_comparisons =
      command == Command::Consistency || (command == Command::Report && config.datasets.size() >= 2);
  if (needs_comparisons) run.comparisons = build_comparisons(config, run.registry);
  run.tasks = plan(command, config, run.comparisons);
  run.config = std::move(config);
  return run;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string_view state_name(State s) {
  switch (s) {
    case State::Ok: return "ok";
    case State::Failed: return "failed";
    case State::Skipped: return "skipped";
  }
  return "?";
}

Matrix permuted(const Matrix& m, const std::vector<std::size_t>& order) {
  const auto k = static_cast<Eigen::Index>(order.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      out(i, j) = m(static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)]));
  return out;
}

class Executor {
 public:
  Executor(const PreparedRun& run, std::ostream& log)
      : run_(run),
        cfg_(run.config),
        tasks_(run.tasks),
        log_(log),
        store_(cfg_.feature_root, run.registry),
        universe_{"models", cfg_.models, std::nullopt} {
    options_.measure.rbf_block = cfg_.subsample.rbf_block;
    options_.jobs = cfg_.jobs;
    options_.allow_partial = cfg_.allow_partial;
  }

  RunReport run() {
    RunReport report;
    report.command = run_.command;
    if (run_.command == Command::Validate) {
      validate(report);
      return report;
    }
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();

    std::map<std::string, std::size_t> last_use;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const TaskKind k = tasks_[i].kind;
      if (k == TaskKind::Load || k == TaskKind::Similarity || k == TaskKind::Convergence ||
          k == TaskKind::Bootstrap || k == TaskKind::Probe)
        last_use[tasks_[i].dataset] = i;
    }

    statuses_.resize(tasks_.size());
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const Task& t = tasks_[i];
      statuses_[i].id = t.id;
      log_ << "[" << (i + 1) << "/" << tasks_.size() << "] " << t.id << "\n";
      if (const TaskStatus* blocker = blocking_dependency(t)) {
        statuses_[i] = {t.id, State::Skipped, blocker->code, "skipped because " + blocker->id + " did not complete"};
        log_ << "  skipped\n";
      } else {
        try {
          run_task(t);
        } catch (const Error& e) {
          if (!cfg_.allow_partial) throw Error(e.code(), t.id + ": " + e.message(), e.location());
          statuses_[i] = {t.id, State::Failed, e.code(), e.message()};
          log_ << "  failed: " << e.what() << "\n";
        }
      }
      for (auto it = last_use.begin(); it != last_use.end();) {
        if (it->second == i) {
          views_.erase(it->first);
          store_.evict(it->first);
          it = last_use.erase(it);
        } else {
          ++it;
        }
      }
    }

    report.statuses = statuses_;
    report.pair_failures = pair_failures_;
    report.files.assign(files_.begin(), files_.end());

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest{{"command", to_string(run_.command)},
                  {"config", cfg_.config_path.string()},
                  {"started_utc", started},
                  {"finished_utc", utc_now()},
                  {"elapsed_seconds", elapsed},
                  {"jobs", cfg_.jobs},
                  {"files", json::array()}};
    for (const auto& f : report.files) manifest["files"].push_back(f.generic_string());
    report::write_file(cfg_.output_dir / ("manifest-" + std::string(to_string(run_.command)) + ".json"),
                       manifest.dump(2) + "\n");
    return report;
  }

 private:
  const TaskStatus* blocking_dependency(const Task& t) const {
    // A distribution summarizes whatever cells succeeded; the report lists every status.
    if (t.kind == TaskKind::Report || t.kind == TaskKind::Distribution) return nullptr;
    for (std::size_t d : t.deps)
      if (statuses_[d].state != State::Ok) return &statuses_[d];
    return nullptr;
  }

  void write(const fs::path& relative, const std::string& content) {
    report::write_file(cfg_.output_dir / relative, content);
    files_.insert(relative);
  }

  const Measure& measure(const Task& t) const { return cfg_.measures[t.measure]; }

  static std::string stem(std::string_view id) { return report::file_stem(id); }

  void record_pair_failures(const std::vector<PairFailure>& failures, const std::string& where) {
    for (const auto& f : failures)
      pair_failures_.push_back(where + ": (" + f.pair.first + ", " + f.pair.second + ") " +
                               std::string(errc_name(f.code)) + ": " + f.message);
  }

  void run_task(const Task& t) {
    switch (t.kind) {
      case TaskKind::Load: views_[t.dataset] = load_dataset(store_, t.dataset, cfg_.models); break;
      case TaskKind::Similarity: similarity(t); break;
      case TaskKind::Aggregate: aggregate(t); break;
      case TaskKind::Consistency: consistency_cell(t); break;
      case TaskKind::Distribution: distribution(t); break;
      case TaskKind::Convergence: convergence(t); break;
      case TaskKind::Bootstrap: bootstrap(t); break;
      case TaskKind::Probe: probe(t); break;
      case TaskKind::GapCorrelation: gap_correlation(t); break;
      case TaskKind::Report: final_report(); break;
    }
  }

  void similarity(const Task& t) {
    const DatasetView& view = views_.at(t.dataset);
    const Measure& m = measure(t);
    const SampleIndexSet rows = dataset_sample(view, cfg_.subsample.size_for(m), cfg_.seed);
    SimilarityMatrix sim = similarity_matrix(view, universe_, m, rows, options_);
    record_pair_failures(sim.failures, t.id);
    const fs::path dir = fs::path("similarity") / m.slug();
    write(dir / (stem(t.dataset) + ".csv"), report::matrix_csv("model", sim.models, sim.models, sim.values));
    write(dir / (stem(t.dataset) + ".svg"),
          report::heatmap_svg(m.name() + " on " + t.dataset, sim.models, sim.values, m.lower_bound(), 1.0));
    sims_[{t.measure, t.dataset}] = std::move(sim);
  }

  void aggregate(const Task& t) {
    const Measure& m = measure(t);
    std::vector<SimilarityMatrix> matrices;
    for (const auto& ds : cfg_.datasets) matrices.push_back(sims_.at({t.measure, ds}));
    const AggregateSimilarity agg = aggregate_mean_std(matrices);
    const fs::path dir = fs::path("similarity") / m.slug();
    write(dir / "aggregate_mean.csv", report::matrix_csv("model", agg.models, agg.models, agg.mean));
    write(dir / "aggregate_std.csv", report::matrix_csv("model", agg.models, agg.models, agg.std));

    const std::vector<std::size_t> order = hierarchical_order(agg.mean);
    std::vector<std::string> ordered;
    for (std::size_t i : order) ordered.push_back(agg.models[i]);
    json meta{{"measure", m.name()},
              {"datasets", cfg_.datasets},
              {"models", agg.models},
              {"cluster_order", ordered},
              {"std_bound_excess", m.is_cka() ? number(std_bound_excess(agg)) : json(nullptr)}};
    write(dir / "aggregate.json", meta.dump(2) + "\n");
    write(dir / "aggregate_mean.svg", report::heatmap_svg(m.name() + " mean over datasets", ordered,
                                                          permuted(agg.mean, order), m.lower_bound(), 1.0));
  }

  const SimilarityVector& vector_for(std::size_t m, std::size_t c, const std::string& ds) {
    const auto key = std::make_tuple(m, c, ds);
    auto it = vectors_.find(key);
    if (it == vectors_.end()) {
      const Comparison& cmp = run_.comparisons[c];
      it = vectors_.emplace(key, similarity_vector(sims_.at({m, ds}), cmp.theta, cmp.phi)).first;
    }
    return it->second;
  }

  void consistency_cell(const Task& t) {
    const double rho = consistency(vector_for(t.measure, t.comparison, t.dataset),
                                   vector_for(t.measure, t.comparison, t.dataset_b));
    cells_[{t.measure, t.comparison}][{t.dataset, t.dataset_b}] = rho;
  }

  void distribution(const Task& t) {
    const Comparison& cmp = run_.comparisons[t.comparison];
    const auto n = static_cast<Eigen::Index>(cfg_.datasets.size());
    ConsistencyMatrix cm;
    cm.datasets = cfg_.datasets;
    cm.theta_set = cmp.theta.set_id;
    cm.phi_set = cmp.phi.set_id;
    cm.measure = measure(t);
    cm.rho = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    const auto& cells = cells_[{t.measure, t.comparison}];
    for (Eigen::Index a = 0; a < n; ++a) {
      cm.rho(a, a) = 1.0;
      for (Eigen::Index b = a + 1; b < n; ++b) {
        const auto it = cells.find({cfg_.datasets[static_cast<std::size_t>(a)], cfg_.datasets[static_cast<std::size_t>(b)]});
        if (it != cells.end()) cm.rho(a, b) = cm.rho(b, a) = it->second;
      }
    }
    for (auto it = vectors_.begin(); it != vectors_.end();) {
      if (std::get<0>(it->first) == t.measure && std::get<1>(it->first) == t.comparison)
        it = vectors_.erase(it);
      else
        ++it;
    }
    cells_.erase({t.measure, t.comparison});

    const fs::path dir = fs::path("consistency") / cm.measure.slug();
    const std::string name = stem(cm.theta_set) + "__" + stem(cm.phi_set);
    write(dir / (name + ".csv"), report::matrix_csv("dataset", cm.datasets, cm.datasets, cm.rho));
    write(dir / (name + ".svg"),
          report::heatmap_svg(cm.measure.name() + " consistency " + cmp.id(), cm.datasets, cm.rho, -1.0, 1.0));
    distributions_[t.measure].push_back(consistency_distribution(cm));
  }

  void convergence(const Task& t) {
    const Measure& m = measure(t);
    const ConvergenceTable table =
        subsample_convergence(views_.at(t.dataset), universe_, m, cfg_.convergence.per_class, cfg_.seed, options_);
    std::string csv = "model_a,model_b";
    for (std::size_t k : table.ks) csv += ",sim_k" + std::to_string(k);
    for (std::size_t i = 0; i + 1 < table.ks.size(); ++i)
      csv += ",diff_k" + std::to_string(table.ks[i]) + "_k" + std::to_string(table.ks[i + 1]);
    csv += "\n";
    for (std::size_t p = 0; p < table.pairs.size(); ++p) {
      const auto r = static_cast<Eigen::Index>(p);
      csv += table.pairs[p].first + "," + table.pairs[p].second;
      for (Eigen::Index j = 0; j < table.similarity.cols(); ++j) csv += "," + report::csv_number(table.similarity(r, j));
      for (Eigen::Index j = 0; j < table.differences.cols(); ++j)
        csv += "," + report::csv_number(table.differences(r, j));
      csv += "\n";
    }
    write(fs::path("convergence") / m.slug() / (stem(t.dataset) + ".csv"), csv);
  }

  void bootstrap(const Task& t) {
    const Measure& m = measure(t);
    const DatasetView& view = views_.at(t.dataset);
    std::size_t size = cfg_.bootstrap.size ? cfg_.bootstrap.size : cfg_.subsample.size_for(m);
    size = std::min(size, view.n());
    const ModelSet models{"bootstrap", cfg_.bootstrap.models, std::nullopt};
    const BootstrapResult r = bootstrap_stability(view, models, m, cfg_.bootstrap.iterations, size, cfg_.seed, options_);
    json pairs = json::array();
    for (const auto& p : r.pairs) {
      json values = json::array();
      for (double v : p.values) values.push_back(number(v));
      pairs.push_back({{"model_a", p.pair.first},
                       {"model_b", p.pair.second},
                       {"mean", number(p.mean)},
                       {"std", number(p.std)},
                       {"min", number(p.min)},
                       {"max", number(p.max)},
                       {"values", std::move(values)}});
    }
    json out{{"dataset", r.dataset_id}, {"measure", m.name()}, {"iterations", r.iterations},
             {"size", r.size},          {"seed", r.seed},        {"pairs", std::move(pairs)}};
    write(fs::path("bootstrap") / m.slug() / (stem(t.dataset) + ".json"), out.dump(2) + "\n");
  }

  fs::path probe_file(const std::string& ds, const std::string& model) const {
    return fs::path("probe") / stem(ds) / (stem(model) + ".json");
  }

  void probe(const Task& t) {
    SearchOptions search = cfg_.probe.search;
    search.jobs = cfg_.jobs;
    ProbeResult result = run_probe_protocol(store_, t.model, t.dataset, cfg_.probe.seeds, search);
    write(probe_file(t.dataset, t.model), nlohmann::json(result).dump(2) + "\n");
    probes_[{t.dataset, t.model}] = std::move(result);
  }

  ProbeResult probe_result(const std::string& ds, const std::string& model) {
    const auto it = probes_.find({ds, model});
    if (it != probes_.end()) return it->second;
    const fs::path path = cfg_.output_dir / probe_file(ds, model);
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "no probe result at " + path.string() + "; run the probe command first");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::FormatError, path.string() + ": " + e.what());
    }
    ProbeResult r = j.get<ProbeResult>();
    if (r.dataset_id != ds || r.model_id != model)
      throw Error(Errc::FormatError, path.string() + " holds the result of " + r.model_id + " on " + r.dataset_id);
    return r;
  }

  void gap_correlation(const Task& t) {
    std::vector<ProbeResult> results;
    for (const auto& model : cfg_.probe.models) results.push_back(probe_result(t.dataset, model));
    const ModelSet set{"probe", cfg_.probe.models, std::nullopt};
    const SimilarityVector sims = similarity_vector(sims_.at({t.measure, t.dataset}), set, set);
    gaps_[{t.measure, t.dataset}] = performance_gap_correlation(results, sims);
  }

  void final_report() {
    bool any_gap = false;
    std::string gap_csv = "dataset,measure,correlation\n";
    for (const Task& t : tasks_) {
      if (t.kind != TaskKind::GapCorrelation) continue;
      any_gap = true;
      const auto it = gaps_.find({t.measure, t.dataset});
      gap_csv += t.dataset + "," + measure(t).name() + "," +
                 report::csv_number(it == gaps_.end() ? std::nan("") : it->second) + "\n";
    }
    if (any_gap) write(fs::path("probe") / "gap_correlation.csv", gap_csv);

    std::string summary;
    for (const auto& [m, dists] : distributions_) {
      const Measure& measure = cfg_.measures[m];
      const json j = report::distributions_json(dists);
      write(fs::path("consistency") / measure.slug() / "distributions.json", j.dump(2) + "\n");
      summary += "## " + measure.name() + "\n\n| theta | phi | median | q1 | q3 | count |\n|---|---|---|---|---|---|\n";
      for (const auto& d : j)
        summary += "| " + d["theta"].get<std::string>() + " | " + d["phi"].get<std::string>() + " | " +
                   d["median"].dump() + " | " + d["q1"].dump() + " | " + d["q3"].dump() + " | " + d["count"].dump() +
                   " |\n";
      summary += "\n";
    }
    if (run_.command == Command::Report && !summary.empty())
      write("summary.md", "# Similarity consistency\n\nDistributions sorted by decreasing median.\n\n" + summary);

    json status{{"command", to_string(run_.command)}, {"tasks", json::array()}, {"pair_failures", pair_failures_}};
    for (const auto& s : statuses_) {
      if (s.id == "report") continue;
      json entry{{"id", s.id}, {"status", state_name(s.state)}};
      if (s.state != State::Ok) {
        entry["code"] = errc_name(s.code);
        entry["message"] = s.message;
      }
      status["tasks"].push_back(std::move(entry));
    }
    write("status-" + std::string(to_string(run_.command)) + ".json", status.dump(2) + "\n");
  }

  void check(RunReport& report, const std::string& id, const std::function<void()>& body) {
    TaskStatus s{id, State::Ok, Errc::InvalidArgument, {}};
    try {
      body();
      log_ << "ok      " << id << "\n";
    } catch (const Error& e) {
      s.state = State::Failed;
      s.code = e.code();
      s.message = e.message();
      log_ << "FAILED  " << id << ": " << e.what() << "\n";
    }
    report.statuses.push_back(std::move(s));
  }

  void validate(RunReport& report) {
    const auto& probe_ds = cfg_.probe.datasets;
    for (const auto& ds : cfg_.datasets) {
      for (const auto& model : cfg_.models)
        check(report, "validate:" + ds + ":" + model, [&] { store_.load(ds, model); });
      check(report, "validate:" + ds + ":rows", [&] { load_dataset(store_, ds, cfg_.models); });
      const bool probed = cfg_.probe.enabled && std::find(probe_ds.begin(), probe_ds.end(), ds) != probe_ds.end();
      check(report, "validate:" + ds + ":labels", [&] {
        try {
          store_.dataset_labels(ds, cfg_.models);
        } catch (const Error& e) {
          if (e.code() != Errc::MissingLabels || probed) throw;
          log_ << "note    " << ds << " has no labels; sampling will be uniform\n";
        }
      });
      if (probed) {
        for (const auto& model : cfg_.probe.models)
          check(report, "validate:" + ds + ":" + model + ":test", [&] { store_.load(ds, model, Split::Test); });
        check(report, "validate:" + ds + ":test-labels",
              [&] { store_.dataset_labels(ds, cfg_.probe.models, Split::Test); });
      }
      store_.evict(ds);
    }
  }

  const PreparedRun& run_;
  const RunConfig& cfg_;
  const std::vector<Task>& tasks_;
  std::ostream& log_;
  EmbeddingStore store_;
  ModelSet universe_;
  SimilarityOptions options_;

  std::vector<TaskStatus> statuses_;
  std::set<fs::path> files_;
  std::vector<std::string> pair_failures_;
  std::map<std::string, DatasetView> views_;
  std::map<std::pair<std::size_t, std::string>, SimilarityMatrix> sims_;
  std::map<std::tuple<std::size_t, std::size_t, std::string>, SimilarityVector> vectors_;
  std::map<std::pair<std::size_t, std::size_t>, std::map<std::pair<std::string, std::string>, double>> cells_;
  std::map<std::size_t, std::vector<ConsistencyDistribution>> distributions_;
  std::map<std::pair<std::string, std::string>, ProbeResult> probes_;
  std::map<std::pair<std::size_t, std::string>, double> gaps_;
};

}  // namespace

RunReport execute(const PreparedRun& run, std::ostream& log) { return Executor(run, log).run(); }

}  // namespace repsim
