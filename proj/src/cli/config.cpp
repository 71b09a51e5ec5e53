#include "repsim/cli/config.hpp"

#include "repsim/error.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace repsim {
namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(Errc::ConfigError, field + ": " + what);
}

// Reads keys of one TOML table and rejects any key that was never asked for.
class Section {
 public:
  Section(const toml::table& table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  std::string field(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

  const toml::node* find(std::string_view key) {
    used_.insert(std::string(key));
    return table_.get(key);
  }

  std::size_t positive(std::string_view key, std::size_t fallback, bool allow_zero = false) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    const auto v = n->value_exact<std::int64_t>();
    if (!v || *v < 0 || (*v == 0 && !allow_zero))
      config_error(field(key), allow_zero ? "expected a non-negative integer" : "expected a positive integer");
    return static_cast<std::size_t>(*v);
  }

  std::uint64_t seed(std::string_view key, std::uint64_t fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    const auto v = n->value_exact<std::int64_t>();
    if (!v || *v < 0) config_error(field(key), "expected a non-negative integer");
    return static_cast<std::uint64_t>(*v);
  }

  double real(std::string_view key, double fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    const auto v = n->value<double>();  // integers are accepted too
    if (!v || !std::isfinite(*v)) config_error(field(key), "expected a number");
    return *v;
  }

  bool boolean(std::string_view key, bool fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    const auto v = n->value_exact<bool>();
    if (!v) config_error(field(key), "expected true or false");
    return *v;
  }

  std::optional<std::string> string(std::string_view key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    const auto v = n->value_exact<std::string>();
    if (!v) config_error(field(key), "expected a string");
    return *v;
  }

  const toml::array* array(std::string_view key) {
    const toml::node* n = find(key);
    if (!n) return nullptr;
    if (!n->is_array()) config_error(field(key), "expected an array");
    return n->as_array();
  }

  std::optional<std::vector<std::string>> strings(std::string_view key) {
    const toml::array* a = array(key);
    if (!a) return std::nullopt;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const auto v = (*a)[i].value_exact<std::string>();
      if (!v) config_error(field(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(*v);
    }
    return out;
  }

  // A list of ids, or the string "all" meaning the registry default (empty).
  std::optional<std::vector<std::string>> ids(std::string_view key) {
    const toml::node* n = table_.get(key);
    if (n && n->is_string()) {
      used_.insert(std::string(key));
      if (n->value_exact<std::string>() != "all") config_error(field(key), "expected a list of ids or \"all\"");
      return std::vector<std::string>{};
    }
    return strings(key);
  }

  std::optional<std::vector<std::size_t>> sizes(std::string_view key) {
    const toml::array* a = array(key);
    if (!a) return std::nullopt;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const auto v = (*a)[i].value_exact<std::int64_t>();
      if (!v || *v <= 0) config_error(field(key) + "[" + std::to_string(i) + "]", "expected a positive integer");
      out.push_back(static_cast<std::size_t>(*v));
    }
    return out;
  }

  std::optional<Section> table(std::string_view key) {
    const toml::node* n = find(key);
    if (!n) return std::nullopt;
    if (!n->is_table()) config_error(field(key), "expected a table");
    return Section(*n->as_table(), field(key));
  }

  void finish() const {
    for (const auto& [key, node] : table_) {
      if (!used_.count(std::string(key.str()))) config_error(field(key.str()), "unknown key");
    }
  }

  const toml::table& raw() const { return table_; }

 private:
  const toml::table& table_;
  std::string prefix_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  auto out = path.is_absolute() ? path : (base / path).lexically_normal();
  if (!out.has_filename() && out.has_parent_path() && out != out.root_path()) out = out.parent_path();
  return out;
}

void check_unique(const std::vector<std::string>& ids, const std::string& field) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!seen.insert(ids[i]).second)
      config_error(field + "[" + std::to_string(i) + "]", "duplicate id '" + ids[i] + "'");
}

void check_ids(const std::vector<std::string>& ids, const std::vector<std::string>& allowed,
               const std::string& field, const char* what) {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (std::find(allowed.begin(), allowed.end(), ids[i]) == allowed.end())
      config_error(field + "[" + std::to_string(i) + "]", std::string(what) + " '" + ids[i] + "' is not configured");
}

}  // namespace

std::size_t SubsampleSettings::size_for(const Measure& m) const {
  const auto it = per_measure.find(m.name());
  return it == per_measure.end() ? default_size : it->second;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << e.source().begin.line << ": " << e.description();
    throw Error(Errc::ConfigError, "config: " + msg.str());
  }
  RunConfig cfg;
  Section top(root, "");

  auto path_or = [&](std::string_view key, const char* fallback) {
    return resolve(base_dir, top.string(key).value_or(fallback));
  };
  cfg.feature_root = path_or("feature_root", ".");
  cfg.models_registry = path_or("models_registry", "models.json");
  cfg.datasets_registry = path_or("datasets_registry", "datasets.json");
  cfg.output_dir = path_or("output_dir", "out");
  cfg.seed = top.seed("seed", 0);
  cfg.jobs = top.positive("jobs", 1);
  cfg.allow_partial = top.boolean("allow_partial", false);

  const auto datasets = top.ids("datasets");
  if (!datasets) config_error("datasets", "missing; list the dataset ids to analyse or use \"all\"");
  if (datasets->empty() && root["datasets"].is_array()) config_error("datasets", "the dataset list is empty");
  cfg.datasets = *datasets;
  check_unique(cfg.datasets, "datasets");
  if (auto models = top.ids("models")) cfg.models = *models;
  check_unique(cfg.models, "models");

  if (auto names = top.strings("measures")) {
    cfg.measures.clear();
    for (std::size_t i = 0; i < names->size(); ++i) {
      try {
        cfg.measures.push_back(Measure::parse((*names)[i]));
      } catch (const Error& e) {
        config_error("measures[" + std::to_string(i) + "]", e.message());
      }
    }
    if (cfg.measures.empty()) config_error("measures", "at least one measure is required");
  }

  if (auto sets = top.table("model_sets")) {
    if (auto attrs = sets->strings("attributes")) {
      cfg.attributes.clear();
      for (std::size_t i = 0; i < attrs->size(); ++i) {
        try {
          cfg.attributes.push_back(parse_attribute((*attrs)[i]));
        } catch (const Error& e) {
          config_error(sets->field("attributes") + "[" + std::to_string(i) + "]", e.message());
        }
      }
    }
    if (const toml::array* custom = sets->array("custom")) {
      for (std::size_t i = 0; i < custom->size(); ++i) {
        const std::string where = sets->field("custom") + "[" + std::to_string(i) + "]";
        if (!(*custom)[i].is_table()) config_error(where, "expected a table with id and members");
        Section s(*(*custom)[i].as_table(), where);
        const auto id = s.string("id");
        const auto members = s.strings("members");
        if (!id || !members) config_error(where, "custom sets need 'id' and 'members'");
        s.finish();
        try {
          cfg.custom_sets.push_back(make_model_set(*id, *members));
        } catch (const Error& e) {
          config_error(where, e.message());
        }
      }
    }
    sets->finish();
  }

  if (auto sub = top.table("subsample")) {
    cfg.subsample.default_size = sub->positive("default", cfg.subsample.default_size);
    cfg.subsample.rbf_block = sub->positive("rbf_block", cfg.subsample.rbf_block);
    if (auto per = sub->table("per_measure")) {
      cfg.subsample.per_measure.clear();
      for (const auto& [key, node] : per->raw()) {
        const std::string name(key.str());
        std::string canonical;
        try {
          canonical = Measure::parse(name).name();
        } catch (const Error& e) {
          config_error(per->field(name), e.message());
        }
        cfg.subsample.per_measure[canonical] = per->positive(name, 0);
      }
      per->finish();
    }
    sub->finish();
  }

  if (auto conv = top.table("convergence")) {
    if (auto ks = conv->sizes("per_class")) {
      if (ks->empty()) config_error(conv->field("per_class"), "at least one size is required");
      for (std::size_t i = 1; i < ks->size(); ++i)
        if ((*ks)[i] <= (*ks)[i - 1]) config_error(conv->field("per_class"), "sizes must be strictly increasing");
      cfg.convergence.per_class = *ks;
    }
    if (auto ds = conv->ids("datasets")) cfg.convergence.datasets = *ds;
    conv->finish();
  }

  if (auto boot = top.table("bootstrap")) {
    cfg.bootstrap.iterations = boot->positive("iterations", cfg.bootstrap.iterations);
    cfg.bootstrap.size = boot->positive("size", cfg.bootstrap.size, true);
    if (auto m = boot->ids("models")) cfg.bootstrap.models = *m;
    if (auto ds = boot->ids("datasets")) cfg.bootstrap.datasets = *ds;
    boot->finish();
  }

  if (auto probe = top.table("probe")) {
    ProbeSettings& p = cfg.probe;
    p.enabled = probe->boolean("enabled", p.enabled);
    if (const toml::array* seeds = probe->array("seeds")) {
      p.seeds.clear();
      for (std::size_t i = 0; i < seeds->size(); ++i) {
        const auto v = (*seeds)[i].value_exact<std::int64_t>();
        if (!v || *v < 0) config_error(probe->field("seeds") + "[" + std::to_string(i) + "]", "expected a seed");
        p.seeds.push_back(static_cast<std::uint64_t>(*v));
      }
      if (p.seeds.empty()) config_error(probe->field("seeds"), "at least one seed is required");
    }
    p.search.epochs = probe->positive("epochs", p.search.epochs);
    p.search.batch_size = probe->positive("batch_size", p.search.batch_size);
    if (const toml::array* lrs = probe->array("learning_rates")) {
      p.search.learning_rates.clear();
      for (std::size_t i = 0; i < lrs->size(); ++i) {
        const auto v = (*lrs)[i].value<double>();
        if (!v || !(*v > 0.0))
          config_error(probe->field("learning_rates") + "[" + std::to_string(i) + "]", "expected a positive number");
        p.search.learning_rates.push_back(*v);
      }
      if (p.search.learning_rates.empty()) config_error(probe->field("learning_rates"), "at least one rate is required");
    }
    p.search.lambda_min = probe->real("lambda_min", p.search.lambda_min);
    p.search.lambda_max = probe->real("lambda_max", p.search.lambda_max);
    if (!(p.search.lambda_min > 0.0 && p.search.lambda_max > p.search.lambda_min))
      config_error(probe->field("lambda_min"), "need 0 < lambda_min < lambda_max");
    p.search.grid_points = probe->positive("lambda_steps", p.search.grid_points);
    if (p.search.grid_points < 2) config_error(probe->field("lambda_steps"), "need at least two grid points");
    p.search.coarse_stride = probe->positive("coarse_stride", p.search.coarse_stride);
    p.search.validation_fraction = probe->real("validation_fraction", p.search.validation_fraction);
    if (!(p.search.validation_fraction > 0.0 && p.search.validation_fraction < 1.0))
      config_error(probe->field("validation_fraction"), "expected a fraction in (0, 1)");
    p.search.exhaustive = probe->boolean("exhaustive", p.search.exhaustive);
    if (auto m = probe->ids("models")) p.models = *m;
    if (auto ds = probe->ids("datasets")) p.datasets = *ds;
    probe->finish();
  }

  top.finish();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  RunConfig cfg = parse_config(text.str(), std::filesystem::absolute(path).parent_path());
  cfg.config_path = path;
  return cfg;
}

void resolve_config(RunConfig& cfg, const Registry& registry) {
  if (cfg.datasets.empty())
    for (const auto& d : registry.datasets()) cfg.datasets.push_back(d.dataset_id);
  if (cfg.datasets.empty()) config_error("datasets", "the dataset list is empty");
  for (std::size_t i = 0; i < cfg.datasets.size(); ++i)
    if (!registry.has_dataset(cfg.datasets[i]))
      config_error("datasets[" + std::to_string(i) + "]", "unknown dataset '" + cfg.datasets[i] + "'");

  if (cfg.models.empty())
    for (const auto& m : registry.models()) cfg.models.push_back(m.model_id);
  for (std::size_t i = 0; i < cfg.models.size(); ++i)
    if (!registry.has_model(cfg.models[i]))
      config_error("models[" + std::to_string(i) + "]", "unknown model '" + cfg.models[i] + "'");
  if (cfg.models.size() < 2) config_error("models", "at least two models are required");

  for (std::size_t s = 0; s < cfg.custom_sets.size(); ++s)
    check_ids(cfg.custom_sets[s].members, cfg.models, "model_sets.custom[" + std::to_string(s) + "].members", "model");

  auto fill = [](std::vector<std::string>& list, const std::vector<std::string>& all) {
    if (list.empty()) list = all;
  };
  fill(cfg.convergence.datasets, cfg.datasets);
  check_ids(cfg.convergence.datasets, cfg.datasets, "convergence.datasets", "dataset");
  fill(cfg.bootstrap.datasets, cfg.datasets);
  check_ids(cfg.bootstrap.datasets, cfg.datasets, "bootstrap.datasets", "dataset");
  fill(cfg.bootstrap.models, cfg.models);
  check_ids(cfg.bootstrap.models, cfg.models, "bootstrap.models", "model");
  fill(cfg.probe.datasets, cfg.datasets);
  check_ids(cfg.probe.datasets, cfg.datasets, "probe.datasets", "dataset");
  fill(cfg.probe.models, cfg.models);
  check_ids(cfg.probe.models, cfg.models, "probe.models", "model");
}

std::vector<Comparison> build_comparisons(const RunConfig& cfg, const Registry& registry) {
  std::vector<ModelMeta> universe;
  for (const auto& id : cfg.models) universe.push_back(registry.model(id));

  std::vector<std::vector<ModelSet>> groups;
  for (Attribute a : cfg.attributes) groups.push_back(build_model_sets(universe, a));
  if (!cfg.custom_sets.empty()) groups.push_back(cfg.custom_sets);

  std::vector<Comparison> out;
  std::set<std::string> seen;
  for (const auto& sets : groups) {
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (std::size_t j = i; j < sets.size(); ++j) {
        Comparison c{sets[i], sets[j], {}};
        if (!seen.insert(c.id()).second) continue;
        try {
          c.pairs = enumerate_pairs(c.theta, c.phi);
        } catch (const Error& e) {
          if (e.code() != Errc::NoValidPairs) throw;
          continue;
        }
        // Pearson over one pair is undefined and over two is always +-1
        if (c.pairs.size() >= 3) out.push_back(std::move(c));
      }
    }
  }
  if (out.empty()) throw Error(Errc::ConfigError, "model_sets: no comparison has at least three model pairs");
  return out;
}

}  // namespace repsim
