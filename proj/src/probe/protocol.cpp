#include "repsim/probe/protocol.hpp"

#include "repsim/core/correlation.hpp"
#include "repsim/error.hpp"
#include "repsim/parallel.hpp"

#include <cmath>
#include <map>

namespace repsim {
namespace {

std::vector<Eigen::Index> as_rows(const std::vector<std::size_t>& idx) {
  return {idx.begin(), idx.end()};
}

std::vector<std::int64_t> pick(const LabelVector& y, const std::vector<std::size_t>& idx) {
  std::vector<std::int64_t> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
  return out;
}

Matrix normalized(const Matrix& x) { return l2_normalize(EmbeddingMatrix(x)).data(); }

}  // namespace

std::vector<double> lambda_grid(std::size_t points, double lo, double hi) {
  if (points < 2 || !(lo > 0.0) || !(hi > lo))
    throw Error(Errc::InvalidArgument, "lambda grid needs at least two points and 0 < lo < hi");
  const double a = std::log10(lo), b = std::log10(hi);
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k)
    grid[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(points - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

GridPoint search_grid(std::size_t size, std::size_t stride, bool exhaustive,
                      const std::function<double(std::size_t)>& score, std::vector<GridPoint>* trace) {
  if (size == 0 || stride == 0) throw Error(Errc::InvalidArgument, "grid search needs a non-empty grid and stride");
  std::vector<double> value(size);
  std::vector<bool> tested(size, false);
  auto eval = [&](std::size_t i) {
    if (tested[i]) return;
    value[i] = score(i);
    tested[i] = true;
    if (trace) trace->push_back({i, value[i]});
  };
  auto best = [&] {
    std::size_t b = size;
    for (std::size_t i = 0; i < size; ++i)
      if (tested[i] && (b == size || value[i] > value[b])) b = i;
    return b;
  };

  for (std::size_t i = 0; i < size; i += exhaustive ? 1 : stride) eval(i);
  while (true) {
    const auto b = static_cast<std::ptrdiff_t>(best());
    const auto n = static_cast<std::ptrdiff_t>(size);
    std::ptrdiff_t left = b - 1, right = b + 1;
    while (left >= 0 && !tested[static_cast<std::size_t>(left)]) --left;
    while (right < n && !tested[static_cast<std::size_t>(right)]) ++right;
    if (b - left <= 1 && right - b <= 1) break;
    if (b - left > 1) eval(static_cast<std::size_t>((left + b) / 2));
    if (right - b > 1) eval(static_cast<std::size_t>((b + right) / 2));
  }
  const std::size_t b = best();
  return {b, value[b]};
}

SearchResult hyperparameter_search(const Matrix& x, const LabelVector& y, std::uint64_t seed,
                                   const SearchOptions& options) {
  const std::size_t classes = y.num_classes();
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw Error(Errc::DimensionMismatch, std::to_string(x.rows()) + " feature rows but " + std::to_string(y.size()) +
                                             " labels");
  if (y.size() < 5 * classes)
    throw Error(Errc::TooFewSamples, "hyperparameter search needs at least " + std::to_string(5 * classes) +
                                         " training rows, got " + std::to_string(y.size()));
  if (options.learning_rates.empty()) throw Error(Errc::InvalidArgument, "no learning rates to search");

  const TrainValidationSplit split = stratified_split(y, options.validation_fraction, seed);
  if (split.validation.empty() || split.train.empty())
    throw Error(Errc::TooFewSamples, "validation split leaves an empty side");
  const Matrix x_train = x(as_rows(split.train), Eigen::all);
  const Matrix x_val = x(as_rows(split.validation), Eigen::all);
  const auto y_train = pick(y, split.train);
  const auto y_val = pick(y, split.validation);
  const auto grid = lambda_grid(options.grid_points, options.lambda_min, options.lambda_max);

  const std::size_t lrs = options.learning_rates.size();
  std::vector<GridPoint> best(lrs);
  std::vector<std::vector<GridPoint>> traces(lrs);
  parallel_for(lrs, options.jobs, [&](std::size_t r) {
    const double eta = options.learning_rates[r];
    best[r] = search_grid(
        grid.size(), options.coarse_stride, options.exhaustive,
        [&](std::size_t k) {
          const ProbeHyperparams hp{eta, grid[k], options.epochs, options.batch_size, seed};
          try {
            return evaluate_top1(train_probe(x_train, y_train, hp, classes), x_val, y_val);
          } catch (const Error& e) {
            if (e.code() != Errc::NonFiniteLoss) throw;
            return kDiverged;
          }
        },
        &traces[r]);
  });

  std::size_t pick_r = 0;
  for (std::size_t r = 1; r < lrs; ++r) {
    const auto& a = best[r];
    const auto& b = best[pick_r];
    const double eta_a = options.learning_rates[r], eta_b = options.learning_rates[pick_r];
    if (a.score > b.score || (a.score == b.score && (a.index < b.index || (a.index == b.index && eta_a < eta_b))))
      pick_r = r;
  }

  SearchResult out;
  out.chosen = {options.learning_rates[pick_r], grid[best[pick_r].index], options.epochs, options.batch_size, seed};
  out.validation_top1 = best[pick_r].score;
  for (std::size_t r = 0; r < lrs; ++r)
    for (const auto& g : traces[r])
      out.trace.push_back({options.learning_rates[r], g.index, grid[g.index], g.score});
  return out;
}

ProbeResult run_probe_protocol(const Matrix& x_train, const LabelVector& y_train, const Matrix& x_test,
                               const LabelVector& y_test, std::span<const std::uint64_t> seeds,
                               const SearchOptions& options) {
  if (seeds.empty()) throw Error(Errc::InvalidArgument, "probe protocol needs at least one seed");
  if (y_train.num_classes() != y_test.num_classes())
    throw Error(Errc::LabelMismatch, "train and test labels declare different class counts");
  const Matrix train = normalized(x_train);
  const Matrix test = normalized(x_test);
  ProbeResult out;
  double sum = 0.0;
  for (std::uint64_t seed : seeds) {
    SeedOutcome s;
    s.seed = seed;
    s.search = hyperparameter_search(train, y_train, seed, options);
    const ProbeModel model = train_probe(train, y_train.values(), s.search.chosen, y_train.num_classes());
    s.top1 = evaluate_top1(model, test, y_test.values());
    sum += s.top1;
    out.per_seed.push_back(std::move(s));
  }
  out.top1 = sum / static_cast<double>(seeds.size());
  out.chosen = out.per_seed.front().search.chosen;
  return out;
}

ProbeResult run_probe_protocol(const EmbeddingStore& store, const std::string& model_id,
                               const std::string& dataset_id, std::span<const std::uint64_t> seeds,
                               const SearchOptions& options) {
  const LoadedEmbedding train = store.load(dataset_id, model_id, Split::Train);
  const LoadedEmbedding test = store.load(dataset_id, model_id, Split::Test);
  if (!train.labels || !test.labels)
    throw Error(Errc::MissingLabels, "probing '" + model_id + "' on '" + dataset_id + "' needs train and test labels");
  try {
    ProbeResult out =
        run_probe_protocol(train.features->data(), *train.labels, test.features->data(), *test.labels, seeds, options);
    out.model_id = model_id;
    out.dataset_id = dataset_id;
    return out;
  } catch (const Error& e) {
    throw Error(e.code(), e.message() + " [model '" + model_id + "', dataset '" + dataset_id + "']", e.location());
  }
}

double performance_gap_correlation(std::span<const ProbeResult> results, const SimilarityVector& sims) {
  std::map<std::string, double, std::less<>> top1;
  for (const auto& r : results) {
    if (r.dataset_id != sims.dataset_id)
      throw Error(Errc::InvalidArgument, "probe result for dataset '" + r.dataset_id + "' given with similarities of '" +
                                             sims.dataset_id + "'");
    top1[r.model_id] = r.top1;
  }
  auto accuracy = [&](const std::string& id) {
    const auto it = top1.find(id);
    if (it == top1.end())
      throw Error(Errc::InvalidArgument, "no probe result for model '" + id + "' on '" + sims.dataset_id + "'");
    return it->second;
  };
  std::vector<double> gaps;
  for (std::size_t i = 0; i < sims.pairs.size(); ++i) {
    if (!std::isfinite(sims.values[i]))
      throw Error(Errc::NonFiniteValue, "similarity of (" + sims.pairs[i].first + ", " + sims.pairs[i].second +
                                            ") is not finite");
    gaps.push_back(std::abs(accuracy(sims.pairs[i].first) - accuracy(sims.pairs[i].second)));
  }
  return pearson(gaps, sims.values);
}

void to_json(nlohmann::json& j, const ProbeHyperparams& hp) {
  j = nlohmann::json{{"learning_rate", hp.learning_rate},
                     {"weight_decay", hp.weight_decay},
                     {"epochs", hp.epochs},
                     {"batch_size", hp.batch_size},
                     {"seed", hp.seed}};
}

void from_json(const nlohmann::json& j, ProbeHyperparams& hp) {
  j.at("learning_rate").get_to(hp.learning_rate);
  j.at("weight_decay").get_to(hp.weight_decay);
  j.at("epochs").get_to(hp.epochs);
  j.at("batch_size").get_to(hp.batch_size);
  j.at("seed").get_to(hp.seed);
}

void to_json(nlohmann::json& j, const ProbeResult& result) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : result.per_seed) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& t : s.search.trace)
      trace.push_back({{"learning_rate", t.learning_rate},
                       {"lambda_index", t.lambda_index},
                       {"weight_decay", t.weight_decay},
                       {"validation_top1", t.validation_top1}});
    seeds.push_back({{"seed", s.seed},
                     {"top1", s.top1},
                     {"chosen", s.search.chosen},
                     {"validation_top1", s.search.validation_top1},
                     {"trace", std::move(trace)}});
  }
  j = nlohmann::json{{"model_id", result.model_id},
                     {"dataset_id", result.dataset_id},
                     {"top1", result.top1},
                     {"chosen", result.chosen},
                     {"per_seed", std::move(seeds)}};
}

void from_json(const nlohmann::json& j, ProbeResult& result) {
  try {
    j.at("model_id").get_to(result.model_id);
    j.at("dataset_id").get_to(result.dataset_id);
    j.at("top1").get_to(result.top1);
    j.at("chosen").get_to(result.chosen);
    result.per_seed.clear();
    for (const auto& s : j.at("per_seed")) {
      SeedOutcome o;
      s.at("seed").get_to(o.seed);
      s.at("top1").get_to(o.top1);
      s.at("chosen").get_to(o.search.chosen);
      s.at("validation_top1").get_to(o.search.validation_top1);
      for (const auto& t : s.at("trace"))
        o.search.trace.push_back({t.at("learning_rate").get<double>(), t.at("lambda_index").get<std::size_t>(),
                                  t.at("weight_decay").get<double>(), t.at("validation_top1").get<double>()});
      result.per_seed.push_back(std::move(o));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::FormatError, std::string("malformed probe result: ") + e.what());
  }
}

}  // namespace repsim
