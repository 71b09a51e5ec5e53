#include "repsim/probe/linear_probe.hpp"
#include "repsim/probe/protocol.hpp"
#include "repsim/synthetic.hpp"

#include "../support/check.hpp"
#include "../support/oracles.hpp"
#include "../support/tempdir.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

using namespace repsim;
using repsim::testing::random_matrix;

namespace {

// Independent mean cross-entropy in long double.
long double oracle_loss(const ProbeModel& m, const Matrix& x, const std::vector<std::int64_t>& y) {
  long double total = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<long double> logits(m.classes());
    long double top = -INFINITY;
    for (std::size_t c = 0; c < m.classes(); ++c) {
      long double v = m.bias(static_cast<Eigen::Index>(c));
      for (Eigen::Index j = 0; j < x.cols(); ++j) v += static_cast<long double>(m.weights(static_cast<Eigen::Index>(c), j)) * x(i, j);
      logits[c] = v;
      top = std::max(top, v);
    }
    long double z = 0;
    for (auto v : logits) z += std::exp(v - top);
    total += top + std::log(z) - logits[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
  }
  return total / static_cast<long double>(x.rows());
}

std::vector<std::int64_t> random_labels(std::size_t n, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::int64_t> y(n);
  for (auto& v : y) v = static_cast<std::int64_t>(rng.below(classes));
  return y;
}

double max_relative_fd_error(std::size_t classes, std::size_t p, std::size_t n, std::uint64_t seed) {
  ProbeModel m{random_matrix(classes, p, seed), random_matrix(classes, 1, seed + 1).col(0)};
  const Matrix x = random_matrix(n, p, seed + 2);
  const auto y = random_labels(n, classes, seed + 3);
  const auto g = probe_loss_and_grad(m, x, y);
  const double h = 1e-6;
  double worst = 0.0;
  auto compare = [&](double analytic, double& param) {
    const double saved = param;
    param = saved + h;
    const long double up = oracle_loss(m, x, y);
    param = saved - h;
    const long double down = oracle_loss(m, x, y);
    param = saved;
    const double fd = static_cast<double>((up - down) / (2 * h));
    worst = std::max(worst, std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6}));
  };
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) compare(g.grad_weights.data()[i], m.weights.data()[i]);
  for (Eigen::Index i = 0; i < m.bias.size(); ++i) compare(g.grad_bias(i), m.bias(i));
  return worst;
}

Matrix row_normalized(const Matrix& x) { return x.rowwise().normalized(); }

// Train and test halves drawn around the same class centers.
std::pair<synthetic::Blobs, synthetic::Blobs> blob_split(std::size_t n, std::size_t dim, std::size_t classes,
                                                         double separation, std::uint64_t seed) {
  const auto all = synthetic::gaussian_blobs(2 * n, dim, classes, separation, seed);
  auto half = [&](std::size_t from) {
    std::vector<std::int64_t> y(all.labels.values().begin() + static_cast<std::ptrdiff_t>(from),
                                all.labels.values().begin() + static_cast<std::ptrdiff_t>(from + n));
    return synthetic::Blobs{all.features.middleRows(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(n)),
                            LabelVector(std::move(y), classes)};
  };
  return {half(0), half(n)};
}

}  // namespace

TEST_CASE("probe loss and gradient") {
  SUBCASE("zero model has loss ln C") {
    for (std::size_t c : {2u, 5u, 10u}) {
      const auto g = probe_loss_and_grad(ProbeModel::zeros(c, 4), random_matrix(9, 4, c), random_labels(9, c, c));
      CHECK(g.loss == doctest::Approx(std::log(static_cast<double>(c))).epsilon(1e-15));
    }
  }
  SUBCASE("loss matches the long-double oracle") {
    ProbeModel m{random_matrix(5, 7, 1), random_matrix(5, 1, 2).col(0)};
    const Matrix x = random_matrix(20, 7, 3);
    const auto y = random_labels(20, 5, 4);
    CHECK(std::abs(probe_loss_and_grad(m, x, y).loss - static_cast<double>(oracle_loss(m, x, y))) <= 1e-13);
  }
  SUBCASE("gradient matches central finite differences on 5 classes, p = 7") {
    CHECK(max_relative_fd_error(5, 7, 30, 11) < 1e-5);
  }
  SUBCASE("duplicating every sample changes nothing") {
    ProbeModel m{random_matrix(3, 4, 5), random_matrix(3, 1, 6).col(0)};
    const Matrix x = random_matrix(10, 4, 7);
    const auto y = random_labels(10, 3, 8);
    Matrix x2(20, 4);
    x2 << x, x;
    std::vector<std::int64_t> y2 = y;
    y2.insert(y2.end(), y.begin(), y.end());
    const auto a = probe_loss_and_grad(m, x, y), b = probe_loss_and_grad(m, x2, y2);
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-14));
    CHECK((a.grad_weights - b.grad_weights).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((a.grad_bias - b.grad_bias).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("huge logits stay finite") {
    ProbeModel m{Matrix::Constant(2, 1, 1e3), Vector::Zero(2)};
    m.weights(1, 0) = -1e3;
    Matrix x(1, 1);
    x << 1.0;
    const std::vector<std::int64_t> y{1};
    CHECK(probe_loss_and_grad(m, x, y).loss == doctest::Approx(2e3));
  }
  CHECK_ERRC(probe_loss_and_grad(ProbeModel::zeros(2, 3), random_matrix(2, 3, 1), std::vector<std::int64_t>{0, 2}),
             Errc::OutOfDomain);
  CHECK_ERRC(probe_loss_and_grad(ProbeModel::zeros(2, 3), random_matrix(2, 4, 1), std::vector<std::int64_t>{0, 1}),
             Errc::DimensionMismatch);
}

TEST_CASE("cosine learning rate") {
  const double eta = 0.01;
  CHECK(cosine_learning_rate(eta, 0, 40) == eta);
  CHECK(std::abs(cosine_learning_rate(eta, 39, 40)) <= 1e-12 * eta);
  CHECK(cosine_learning_rate(eta, 0, 1) == eta);
  double prev = eta;
  for (std::size_t t = 1; t < 40; ++t) {
    const double lr = cosine_learning_rate(eta, t, 40);
    CHECK(lr <= prev);
    CHECK(lr >= 0.0);
    prev = lr;
  }
  // halfway point of an odd-length schedule is eta / 2
  CHECK(cosine_learning_rate(eta, 20, 41) == doctest::Approx(eta / 2).epsilon(1e-15));
}

TEST_CASE("train_probe and evaluate_top1") {
  const auto blobs = synthetic::gaussian_blobs(200, 6, 2, 4.0, 3);
  const Matrix x = row_normalized(blobs.features);
  const auto& y = blobs.labels.values();

  SUBCASE("separable blobs are fit perfectly") {
    const auto model = train_probe(x, y, {0.1, 0.0, 20, 64, 1}, 2);
    CHECK(evaluate_top1(model, x, y) == 1.0);
  }
  SUBCASE("same seed gives identical weights, another seed reshuffles") {
    const ProbeHyperparams hp{0.01, 1e-3, 5, 32, 9};
    const auto a = train_probe(x, y, hp, 2), b = train_probe(x, y, hp, 2);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    auto other = hp;
    other.seed = 10;
    CHECK(train_probe(x, y, other, 2).weights != a.weights);
  }
  SUBCASE("large weight decay shrinks the weights") {
    const auto plain = train_probe(x, y, {1e-3, 0.0, 20, 64, 1}, 2);
    const auto decayed = train_probe(x, y, {1e-3, 1e2, 20, 64, 1}, 2);
    CHECK(decayed.weights.norm() < plain.weights.norm());
  }
  SUBCASE("divergence is reported with the hyperparameters") {
    try {
      train_probe(x, y, {10.0, 1e2, 20, 16, 1}, 2);
      FAIL("expected NonFiniteLoss");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NonFiniteLoss);
      CHECK(std::string(e.what()).find("lambda=100") != std::string::npos);
    }
  }
  SUBCASE("removing label noise does not hurt accuracy") {
    double clean_total = 0.0, noisy_total = 0.0;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      const auto [train, test] = blob_split(300, 8, 3, 0.6, 100 + trial);
      const auto test_x = row_normalized(test.features);
      auto noisy = train.labels.values();
      Rng rng(trial);
      for (auto& v : noisy)
        if (rng.uniform() < 0.4) v = static_cast<std::int64_t>(rng.below(3));
      const ProbeHyperparams hp{0.01, 1e-4, 20, 64, trial};
      clean_total += evaluate_top1(train_probe(row_normalized(train.features), train.labels.values(), hp, 3), test_x,
                                   test.labels.values());
      noisy_total += evaluate_top1(train_probe(row_normalized(train.features), noisy, hp, 3), test_x,
                                   test.labels.values());
    }
    CHECK(clean_total >= noisy_total);
  }
  CHECK_ERRC(train_probe(x.topRows(1), std::span(y).first(1), {}, 2), Errc::TooFewSamples);
  CHECK_ERRC(train_probe(x, y, {0.0, 0.0, 20, 64, 1}, 2), Errc::InvalidArgument);
}

TEST_CASE("evaluate_top1") {
  SUBCASE("ties go to class 0") {
    CHECK(predict(ProbeModel::zeros(3, 2), random_matrix(4, 2, 1)) == std::vector<std::int64_t>{0, 0, 0, 0});
    CHECK(evaluate_top1(ProbeModel::zeros(3, 2), random_matrix(2, 2, 1), std::vector<std::int64_t>{0, 0}) == 1.0);
    CHECK(evaluate_top1(ProbeModel::zeros(3, 2), random_matrix(2, 2, 1), std::vector<std::int64_t>{1, 2}) == 0.0);
  }
  SUBCASE("random labels give chance accuracy") {
    ProbeModel m{random_matrix(2, 5, 2), Vector::Zero(2)};
    const Matrix x = random_matrix(20000, 5, 3);
    CHECK(std::abs(evaluate_top1(m, x, random_labels(20000, 2, 4)) - 0.5) <= 0.05);
  }
  SUBCASE("identity model on one-hot rows") {
    ProbeModel m{Matrix::Identity(3, 3), Vector::Zero(3)};
    CHECK(evaluate_top1(m, Matrix::Identity(3, 3), std::vector<std::int64_t>{0, 1, 2}) == 1.0);
  }
  CHECK_ERRC(evaluate_top1(ProbeModel::zeros(2, 2), Matrix(0, 2), std::vector<std::int64_t>{}), Errc::EmptyDataset);
  CHECK_ERRC(evaluate_top1(ProbeModel::zeros(2, 2), Matrix::Zero(2, 2), std::vector<std::int64_t>{0}),
             Errc::DimensionMismatch);
}

TEST_CASE("lambda grid") {
  const auto grid = lambda_grid();
  REQUIRE(grid.size() == 96);
  CHECK(grid.front() == 1e-6);
  CHECK(grid.back() == 1e2);
  const double ratio = std::pow(10.0, 8.0 / 95.0);
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] / grid[k - 1] == doctest::Approx(ratio).epsilon(1e-12));
  CHECK_ERRC(lambda_grid(1), Errc::InvalidArgument);
  CHECK_ERRC(lambda_grid(4, 0.0, 1.0), Errc::InvalidArgument);
}

TEST_CASE("search_grid") {
  SUBCASE("halving finds the exhaustive optimum of unimodal curves") {
    Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t peak = trial < 96 ? static_cast<std::size_t>(trial) : rng.below(96);
      // strictly increasing up to the peak, strictly decreasing after it
      std::vector<double> curve(96);
      curve[peak] = 1.0;
      for (std::size_t k = peak; k-- > 0;) curve[k] = curve[k + 1] - 1e-3 - rng.uniform();
      for (std::size_t k = peak + 1; k < 96; ++k) curve[k] = curve[k - 1] - 1e-3 - rng.uniform();
      std::vector<GridPoint> trace;
      const auto fast = search_grid(96, 8, false, [&](std::size_t k) { return curve[k]; }, &trace);
      const auto full = search_grid(96, 8, true, [&](std::size_t k) { return curve[k]; });
      CHECK(full.index == peak);
      CHECK(fast.index == full.index);
      CHECK(fast.score == full.score);
      CHECK(trace.size() < 30);
      std::set<std::size_t> seen;
      for (const auto& g : trace) CHECK(seen.insert(g.index).second);
    }
  }
  SUBCASE("plateau ties resolve to the smaller index") {
    const auto r = search_grid(96, 8, true, [](std::size_t k) { return k >= 40 && k <= 60 ? 1.0 : 0.0; });
    CHECK(r.index == 40);
  }
  SUBCASE("coarse points come first in the trace") {
    std::vector<GridPoint> trace;
    search_grid(96, 8, false, [](std::size_t k) { return -std::abs(static_cast<double>(k) - 50.0); }, &trace);
    for (std::size_t i = 0; i < 12; ++i) CHECK(trace[i].index == 8 * i);
    CHECK(trace.back().index != 0);
  }
  CHECK_ERRC(search_grid(0, 8, false, [](std::size_t) { return 0.0; }), Errc::InvalidArgument);
}

TEST_CASE("hyperparameter_search") {
  const auto blobs = synthetic::gaussian_blobs(300, 8, 3, 3.0, 5);
  const Matrix x = row_normalized(blobs.features);
  SearchOptions opt;
  opt.learning_rates = {1e-1, 1e-2};
  opt.epochs = 5;
  opt.batch_size = 64;

  const auto r = hyperparameter_search(x, blobs.labels, 4, opt);
  const auto grid = lambda_grid();
  CHECK(std::find(grid.begin(), grid.end(), r.chosen.weight_decay) != grid.end());
  CHECK((r.chosen.learning_rate == 1e-1 || r.chosen.learning_rate == 1e-2));
  CHECK(r.chosen.seed == 4);
  CHECK(r.chosen.epochs == 5);
  CHECK(r.validation_top1 > 0.9);
  double best = -2.0;
  for (const auto& t : r.trace) best = std::max(best, t.validation_top1);
  CHECK(r.validation_top1 == best);

  SUBCASE("jobs do not change the outcome") {
    auto parallel = opt;
    parallel.jobs = 2;
    const auto p = hyperparameter_search(x, blobs.labels, 4, parallel);
    CHECK(p.chosen == r.chosen);
    CHECK(p.trace.size() == r.trace.size());
  }
  SUBCASE("diverging corners of the grid score below every accuracy") {
    auto wild = opt;
    wild.learning_rates = {10.0};
    wild.epochs = 20;
    wild.batch_size = 16;
    const auto w = hyperparameter_search(x, blobs.labels, 4, wild);
    CHECK(std::any_of(w.trace.begin(), w.trace.end(), [](const GridEvaluation& g) { return g.validation_top1 == kDiverged; }));
  }
  SUBCASE("too few samples") {
    const auto small = synthetic::gaussian_blobs(14, 4, 3, 1.0, 1);
    CHECK_ERRC(hyperparameter_search(small.features, small.labels, 1, opt), Errc::TooFewSamples);
  }
}

TEST_CASE("run_probe_protocol") {
  const auto [train, test] = blob_split(400, 8, 4, 3.0, 21);
  SearchOptions opt;
  opt.learning_rates = {1e-1};
  opt.epochs = 10;
  opt.batch_size = 128;

  const std::uint64_t one[] = {7};
  const auto single = run_probe_protocol(train.features, train.labels, test.features, test.labels, one, opt);
  REQUIRE(single.per_seed.size() == 1);
  CHECK(single.top1 == single.per_seed[0].top1);
  CHECK(single.top1 >= 0.95);
  CHECK(single.chosen == single.per_seed[0].search.chosen);

  const std::uint64_t three[] = {1, 2, 3};
  const auto multi = run_probe_protocol(train.features, train.labels, test.features, test.labels, three, opt);
  REQUIRE(multi.per_seed.size() == 3);
  const double mean = (multi.per_seed[0].top1 + multi.per_seed[1].top1 + multi.per_seed[2].top1) / 3.0;
  CHECK(multi.top1 == doctest::Approx(mean).epsilon(1e-15));

  SUBCASE("json round trip") {
    nlohmann::json j = multi;
    const auto back = j.get<ProbeResult>();
    CHECK(back.top1 == multi.top1);
    CHECK(back.chosen == multi.chosen);
    REQUIRE(back.per_seed.size() == 3);
    CHECK(back.per_seed[2].search.trace.size() == multi.per_seed[2].search.trace.size());
    CHECK(back.per_seed[2].search.trace.back().weight_decay == multi.per_seed[2].search.trace.back().weight_decay);
    CHECK(nlohmann::json(back).dump() == j.dump());
    const nlohmann::json partial{{"model_id", "x"}};
    CHECK_ERRC(partial.get<ProbeResult>(), Errc::FormatError);
  }

  SUBCASE("from the embedding store") {
    repsim::testing::TempDir tmp;
    Registry reg({{"m1", Objective::Sup, TrainingData::IN1k, ArchitectureClass::CNN, SizeClass::Small, 1, "x"}},
                 {{"d", DatasetCategory::Structured, 4}});
    write_embedding(tmp.path(), "d", "m1", train.features, train.labels.values());
    EmbeddingStore store(tmp.path(), reg);
    CHECK_ERRC(run_probe_protocol(store, "m1", "d", one, opt), Errc::MissingEmbedding);
    write_embedding(tmp.path(), "d", "m1", test.features, test.labels.values(), Split::Test);
    const auto r = run_probe_protocol(store, "m1", "d", one, opt);
    CHECK(r.model_id == "m1");
    CHECK(r.dataset_id == "d");
    CHECK(r.top1 == single.top1);
  }
  CHECK_ERRC(run_probe_protocol(train.features, train.labels, test.features, test.labels, {}, opt),
             Errc::InvalidArgument);
}

TEST_CASE("performance_gap_correlation") {
  auto result = [](std::string id, double top1) {
    ProbeResult r;
    r.model_id = std::move(id);
    r.dataset_id = "d";
    r.top1 = top1;
    return r;
  };
  const std::vector<ProbeResult> results{result("a", 0.9), result("b", 0.8), result("c", 0.6), result("d", 0.5)};
  SimilarityVector sims;
  sims.dataset_id = "d";
  sims.pairs = {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}, {"c", "d"}};
  sims.values = {0.9, 0.5, 0.2, 0.7, 0.4, 0.8};
  // gaps x10 = (1, 3, 4, 2, 3, 1); by hand: Sxy = -282/18, Sxx = 66/9, Syy = 1254/36
  const double hand = -282.0 / std::sqrt(66.0 * 1254.0);
  CHECK(std::abs(performance_gap_correlation(results, sims) - hand) <= 1e-12);

  SUBCASE("pair orientation does not matter") {
    auto flipped = sims;
    for (auto& p : flipped.pairs) std::swap(p.first, p.second);
    CHECK(performance_gap_correlation(results, flipped) == performance_gap_correlation(results, sims));
  }
  SUBCASE("anti-linear gaps give -1") {
    auto lin = sims;
    const double gaps[] = {0.1, 0.3, 0.4, 0.2, 0.3, 0.1};
    for (int i = 0; i < 6; ++i) lin.values[static_cast<std::size_t>(i)] = 1.0 - 2.0 * gaps[i];
    CHECK(performance_gap_correlation(results, lin) == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("equal accuracies") {
    const std::vector<ProbeResult> flat{result("a", 0.7), result("b", 0.7), result("c", 0.7), result("d", 0.7)};
    CHECK_ERRC(performance_gap_correlation(flat, sims), Errc::ConstantVector);
  }
  CHECK_ERRC(performance_gap_correlation(std::span(results).first(3), sims), Errc::InvalidArgument);
  auto nan_sims = sims;
  nan_sims.values[2] = std::nan("");
  CHECK_ERRC(performance_gap_correlation(results, nan_sims), Errc::NonFiniteValue);
}
