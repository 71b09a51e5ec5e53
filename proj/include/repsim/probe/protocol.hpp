#pragma once

#include "repsim/analysis/similarity.hpp"
#include "repsim/probe/linear_probe.hpp"
#include "repsim/store/store.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace repsim {

/// `points` log-spaced values from lo to hi, both included.
std::vector<double> lambda_grid(std::size_t points = 96, double lo = 1e-6, double hi = 1e2);

struct GridPoint {
  std::size_t index = 0;
  double score = 0.0;
};

/// Maximizes `score` over grid indices [0, size). Evaluates every
/// `stride`-th index, then repeatedly evaluates the untested midpoints
/// between the current best and its nearest tested neighbours until both
/// adjacent grid points are tested (positions -1 and size count as tested).
/// With `exhaustive` every index is evaluated. Ties go to the smaller index.
/// Evaluations are appended to `trace` in call order.
GridPoint search_grid(std::size_t size, std::size_t stride, bool exhaustive,
                      const std::function<double(std::size_t)>& score, std::vector<GridPoint>* trace = nullptr);

/// Validation score recorded for a run that diverged (NonFiniteLoss); below
/// every attainable accuracy.
inline constexpr double kDiverged = -1.0;

struct SearchOptions {
  std::vector<double> learning_rates{1e-1, 1e-2, 1e-3, 1e-4};
  std::size_t grid_points = 96;
  double lambda_min = 1e-6;
  double lambda_max = 1e2;
  std::size_t coarse_stride = 8;
  double validation_fraction = 0.2;
  std::size_t epochs = 20;
  std::size_t batch_size = 1024;
  bool exhaustive = false;
  std::size_t jobs = 1;
};

struct GridEvaluation {
  double learning_rate = 0.0;
  std::size_t lambda_index = 0;
  double weight_decay = 0.0;
  double validation_top1 = 0.0;
};

struct SearchResult {
  ProbeHyperparams chosen;
  double validation_top1 = 0.0;
  std::vector<GridEvaluation> trace;  // grouped by learning rate, in search order
};

/// Holds out a stratified validation split, searches lambda per learning
/// rate and returns the best (eta, lambda); ties prefer smaller lambda, then
/// smaller eta. Needs n >= 5 C (TooFewSamples).
SearchResult hyperparameter_search(const Matrix& x, const LabelVector& y, std::uint64_t seed,
                                   const SearchOptions& options = {});

struct SeedOutcome {
  std::uint64_t seed = 0;
  double top1 = 0.0;
  SearchResult search;
};

struct ProbeResult {
  std::string model_id;
  std::string dataset_id;
  double top1 = 0.0;  // mean over seeds
  std::vector<SeedOutcome> per_seed;
  ProbeHyperparams chosen;  // choice of the first seed
};

/// Per seed: search, retrain on the full training set, evaluate on the test
/// set. Features are L2-normalized here.
ProbeResult run_probe_protocol(const Matrix& x_train, const LabelVector& y_train, const Matrix& x_test,
                               const LabelVector& y_test, std::span<const std::uint64_t> seeds,
                               const SearchOptions& options = {});

/// Same, reading the train and test splits from the store.
ProbeResult run_probe_protocol(const EmbeddingStore& store, const std::string& model_id,
                               const std::string& dataset_id, std::span<const std::uint64_t> seeds,
                               const SearchOptions& options = {});

/// Pearson correlation between |top1_a - top1_b| and the similarity of each
/// pair in `sims`.
double performance_gap_correlation(std::span<const ProbeResult> results, const SimilarityVector& sims);

void to_json(nlohmann::json& j, const ProbeHyperparams& hp);
void from_json(const nlohmann::json& j, ProbeHyperparams& hp);
void to_json(nlohmann::json& j, const ProbeResult& result);
void from_json(const nlohmann::json& j, ProbeResult& result);

}  // namespace repsim
