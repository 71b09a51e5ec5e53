#include "repsim/analysis/aggregate.hpp"
#include "repsim/analysis/consistency.hpp"
#include "repsim/analysis/model_set.hpp"
#include "repsim/analysis/protocols.hpp"
#include "repsim/analysis/similarity.hpp"
#include "repsim/parallel.hpp"

#include "../support/check.hpp"
#include "../support/oracles.hpp"
#include "../support/tempdir.hpp"
#include "../support/views.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace repsim;
using repsim::testing::all_rows;
using repsim::testing::make_view;
using repsim::testing::random_matrix;

namespace {

Registry shipped_registry() {
  const auto dir = repsim::testing::source_dir() / "data";
  return Registry::load(dir / "models.json", dir / "datasets.json");
}

std::vector<synthetic::ModelSpec> noise_ladder() {
  return {{"m_a", 12, 0.05, false}, {"m_b", 10, 0.5, false}, {"m_c", 14, 2.0, false}};
}

SimilarityVector vector_of(std::string dataset, std::vector<double> values) {
  SimilarityVector v;
  v.dataset_id = std::move(dataset);
  v.theta_set = v.phi_set = "all";
  for (std::size_t i = 0; i < values.size(); ++i) v.pairs.emplace_back("a" + std::to_string(i), "b");
  v.values = std::move(values);
  return v;
}

}  // namespace

TEST_CASE("build_model_sets") {
  const Registry reg = shipped_registry();
  auto sizes = [&](Attribute a) {
    std::vector<std::size_t> s;
    for (const auto& set : build_model_sets(reg.models(), a)) s.push_back(set.members.size());
    return s;
  };
  CHECK(sizes(Attribute::Objective) == std::vector<std::size_t>{14, 20, 30});
  CHECK(sizes(Attribute::All) == std::vector<std::size_t>{64});
  CHECK(sizes(Attribute::Architecture) == std::vector<std::size_t>{24, 40});
  CHECK(sizes(Attribute::Size) == std::vector<std::size_t>{32, 14, 8, 10});

  const auto objective = build_model_sets(reg.models(), Attribute::Objective);
  CHECK(objective[1].set_id == "objective=SSL");
  CHECK(objective[1].selector == std::make_pair(std::string("objective"), std::string("SSL")));
  for (Attribute a : {Attribute::Objective, Attribute::TrainingData, Attribute::Architecture, Attribute::Size}) {
    const auto sets = build_model_sets(reg.models(), a);
    CHECK(union_members(sets).size() == 64);
    std::size_t total = 0;
    for (const auto& s : sets) total += s.members.size();
    CHECK(total == 64);  // a partition
  }
  CHECK(parse_attribute("training_data") == Attribute::TrainingData);
  CHECK_ERRC(parse_attribute("color"), Errc::UnknownAttribute);
  CHECK_ERRC(build_model_sets({}, Attribute::All), Errc::EmptyResultSet);
  CHECK_ERRC(make_model_set("x", {"m1", "m1"}), Errc::DuplicateMember);
  CHECK_ERRC(make_model_set("x", {}), Errc::EmptyResultSet);
}

TEST_CASE("enumerate_pairs") {
  const auto s123 = make_model_set("t", {"m1", "m2", "m3"});
  CHECK(enumerate_pairs(s123, s123).size() == 3);
  CHECK(enumerate_pairs(make_model_set("t", {"m1", "m2"}), make_model_set("p", {"m3", "m4", "m5"})).size() == 6);
  CHECK(enumerate_pairs(make_model_set("t", {"m1", "m2"}), make_model_set("p", {"m2", "m3"})) ==
        std::vector<ModelPair>{{"m1", "m2"}, {"m1", "m3"}, {"m2", "m3"}});
  CHECK(enumerate_pairs(make_model_set("t", {"m3", "m1"}), make_model_set("p", {"m2"})) ==
        std::vector<ModelPair>{{"m1", "m2"}, {"m2", "m3"}});
  const auto single = make_model_set("s", {"m1"});
  CHECK_ERRC(enumerate_pairs(single, single), Errc::NoValidPairs);

  SUBCASE("random sets against a brute-force dedup oracle") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::string> a, b;
      for (int i = 0; i < 8; ++i) {
        if (gen() % 2) a.push_back("m" + std::to_string(i));
        if (gen() % 2) b.push_back("m" + std::to_string(i));
      }
      if (a.empty() || b.empty()) continue;
      std::vector<ModelPair> oracle;
      for (const auto& x : a)
        for (const auto& y : b) {
          if (x == y) continue;
          ModelPair p = x < y ? ModelPair{x, y} : ModelPair{y, x};
          if (std::find(oracle.begin(), oracle.end(), p) == oracle.end()) oracle.push_back(p);
        }
      std::sort(oracle.begin(), oracle.end());
      const auto ta = make_model_set("a", a), tb = make_model_set("b", b);
      if (oracle.empty()) {
        CHECK_ERRC(enumerate_pairs(ta, tb), Errc::NoValidPairs);
        continue;
      }
      CHECK(enumerate_pairs(ta, tb) == oracle);
      CHECK(enumerate_pairs(tb, ta) == oracle);
      if (a == b) CHECK(oracle.size() == a.size() * (a.size() - 1) / 2);
      std::set<std::string> overlap;
      for (const auto& x : a)
        if (std::find(b.begin(), b.end(), x) != b.end()) overlap.insert(x);
      if (overlap.empty()) CHECK(oracle.size() == a.size() * b.size());
    }
  }
}

TEST_CASE("similarity_vector and similarity_matrix") {
  const synthetic::DatasetSpec spec{120, 4, 6, 2.0};
  const DatasetView view = repsim::testing::synthetic_view("d", noise_ladder(), spec, 3);
  const auto rows = dataset_sample(view, 90, 7);
  CHECK(rows.indices.size() == 90);
  const ModelSet all = make_model_set("all", {"m_a", "m_b", "m_c"});

  SUBCASE("identical files give exactly one") {
    const Matrix z = random_matrix(40, 5, 1);
    const DatasetView same = make_view("d", {{"x", z}, {"y", z}});
    const auto pair = make_model_set("p", {"x", "y"});
    for (const Measure& m : {Measure::cka_linear(), Measure::cka_rbf(0.4)}) {
      const auto v = similarity_vector(same, pair, pair, m, all_rows(40));
      CHECK(v.values == std::vector<double>{1.0});
      CHECK(similarity_matrix(same, pair, m, all_rows(40)).values == Matrix::Ones(2, 2));
    }
  }

  SUBCASE("values equal a direct per-pair computation without caching") {
    for (const Measure& m : {Measure::cka_linear(), Measure::cka_rbf(0.4), Measure::rsa_spearman()}) {
      const auto v = similarity_vector(view, all, all, m, rows);
      REQUIRE(v.values.size() == 3);
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(v.pairs[k].first != v.pairs[k].second);
        const auto za = l2_normalize(view.features_of(v.pairs[k].first).select_rows(rows.indices));
        const auto zb = l2_normalize(view.features_of(v.pairs[k].second).select_rows(rows.indices));
        CHECK(v.values[k] == similarity(m, za, zb).value);
      }
      if (m.kind == Measure::Kind::CkaLinear) {
        // less noise, more similar: (m_a, m_b) > (m_a, m_c) and (m_b, m_c)
        CHECK(v.values[0] > v.values[1]);
        CHECK(v.values[0] > v.values[2]);
      }
    }
  }

  SUBCASE("linear matrix matches a naive long-double oracle") {
    const auto mat = similarity_matrix(view, all, Measure::cka_linear(), rows);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) {
          CHECK(mat.values(i, j) == 1.0);
          continue;
        }
        const Matrix a = l2_normalize(view.features[i]->select_rows(rows.indices)).data();
        const Matrix b = l2_normalize(view.features[j]->select_rows(rows.indices)).data();
        const double oracle =
            repsim::testing::naive_cka(repsim::testing::naive_gram_linear(a), repsim::testing::naive_gram_linear(b));
        CHECK(std::abs(mat.values(i, j) - oracle) <= 1e-12);
      }
    CHECK(mat.values == mat.values.transpose());
  }

  SUBCASE("permuting the model list permutes rows and columns") {
    const auto base = similarity_matrix(view, all, Measure::cka_linear(), rows);
    const auto perm = similarity_matrix(view, make_model_set("p", {"m_c", "m_a", "m_b"}), Measure::cka_linear(), rows);
    const int map[] = {2, 0, 1};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(perm.values(i, j) == base.values(map[i], map[j]));
  }

  SUBCASE("vector extracted from a matrix equals the direct vector") {
    const auto theta = make_model_set("t", {"m_a"});
    const auto phi = make_model_set("p", {"m_b", "m_c"});
    const auto mat = similarity_matrix(view, all, Measure::cka_linear(), rows);
    const auto from_matrix = similarity_vector(mat, theta, phi);
    const auto direct = similarity_vector(view, theta, phi, Measure::cka_linear(), rows);
    CHECK(from_matrix.pairs == direct.pairs);
    CHECK(from_matrix.values == direct.values);
    CHECK_ERRC(similarity_vector(mat, theta, make_model_set("q", {"zz"})), Errc::MissingEmbedding);
  }

  SUBCASE("jobs do not change results") {
    const auto one = similarity_matrix(view, all, Measure::cka_rbf(0.2), rows, {{}, 1, false});
    const auto four = similarity_matrix(view, all, Measure::cka_rbf(0.2), rows, {{}, 4, false});
    CHECK(one.values == four.values);
  }

  SUBCASE("failures name the pair, or are recorded when partial results are allowed") {
    const DatasetView bad = make_view("dbad", {{"ok", random_matrix(30, 4, 2)},
                                               {"flat", Matrix::Constant(30, 4, 1.0)},
                                               {"ok2", random_matrix(30, 4, 3)}});
    const auto set = make_model_set("s", {"ok", "flat", "ok2"});
    try {
      similarity_matrix(bad, set, Measure::cka_linear(), all_rows(30));
      FAIL("expected DegenerateRepresentation");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DegenerateRepresentation);
      CHECK(std::string(e.what()).find("flat") != std::string::npos);
      CHECK(std::string(e.what()).find("dbad") != std::string::npos);
    }
    const auto partial = similarity_matrix(bad, set, Measure::cka_linear(), all_rows(30), {{}, 1, true});
    CHECK(partial.failures.size() == 2);
    CHECK(partial.failures[0].pair == ModelPair{"flat", "ok"});
    CHECK(std::isnan(partial.values(0, 1)));
    CHECK(std::isfinite(partial.values(0, 2)));
  }

  CHECK_ERRC(similarity_vector(view, all, make_model_set("x", {"nope", "m_a"}), Measure::cka_linear(), rows),
             Errc::MissingEmbedding);
}

TEST_CASE("load_dataset from a store") {
  repsim::testing::TempDir tmp;
  Registry reg({{"m1", Objective::Sup, TrainingData::IN1k, ArchitectureClass::CNN, SizeClass::Small, 1, "x"},
                {"m2", Objective::Sup, TrainingData::IN1k, ArchitectureClass::CNN, SizeClass::Small, 1, "x"}},
               {{"d", DatasetCategory::Structured, 2}, {"u", DatasetCategory::Structured, 2}});
  const std::vector<std::int64_t> labels{0, 1, 0, 1, 0, 1};
  write_embedding(tmp.path(), "d", "m1", random_matrix(6, 3, 1), labels);
  write_embedding(tmp.path(), "d", "m2", random_matrix(6, 2, 2), labels);
  write_embedding(tmp.path(), "u", "m1", random_matrix(6, 3, 1), {});
  write_embedding(tmp.path(), "u", "m2", random_matrix(5, 3, 1), {});
  EmbeddingStore store(tmp.path(), reg);
  const std::vector<std::string> both{"m1", "m2"};
  const DatasetView view = load_dataset(store, "d", both, true);
  CHECK(view.n() == 6);
  REQUIRE(view.labels);
  CHECK(dataset_sample(view, 4, 0).indices.size() == 4);
  CHECK_ERRC(load_dataset(store, "u", both), Errc::DimensionMismatch);
  CHECK_ERRC(load_dataset(store, "u", std::vector<std::string>{"m1"}, true), Errc::MissingLabels);
  CHECK_FALSE(load_dataset(store, "u", std::vector<std::string>{"m1"}).labels);
}

TEST_CASE("aggregate_mean_std") {
  auto mat = [](std::string ds, Matrix v) {
    return SimilarityMatrix{std::move(ds), {"a", "b"}, std::move(v), Measure::cka_linear(), {}};
  };
  Matrix m1(2, 2), m2(2, 2);
  m1 << 1, 0.2, 0.2, 1;
  m2 << 1, 0.4, 0.4, 1;
  const std::vector<SimilarityMatrix> pair{mat("d1", m1), mat("d2", m2)};
  const auto agg = aggregate_mean_std(pair);
  CHECK(agg.mean(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(agg.std(0, 1) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(agg.mean(0, 0) == 1.0);
  CHECK(agg.std(0, 0) == 0.0);
  CHECK(agg.per_dataset_count == 2);

  const std::vector<SimilarityMatrix> same{mat("d1", m1), mat("d2", m1), mat("d3", m1)};
  CHECK(aggregate_mean_std(same).std == Matrix::Zero(2, 2));
  CHECK(aggregate_mean_std(same).mean == m1);

  std::vector<SimilarityMatrix> reordered{mat("d1", m1), mat("d2", m2)};
  reordered[1].models = {"b", "a"};
  CHECK_ERRC(aggregate_mean_std(reordered), Errc::OrderMismatch);
  CHECK_ERRC(aggregate_mean_std(std::span(pair.data(), 1)), Errc::InvalidArgument);

  SUBCASE("std never exceeds sqrt(mu (1 - mu)) on values in [0, 1]") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<SimilarityMatrix> mats;
      const std::size_t d = 2 + gen() % 20;
      for (std::size_t k = 0; k < d; ++k) {
        Matrix v(3, 3);
        for (int i = 0; i < 9; ++i) v.data()[i] = (gen() % 4 == 0) ? static_cast<double>(gen() % 2) : u(gen);
        mats.push_back({"d" + std::to_string(k), {"a", "b", "c"}, v, Measure::cka_linear(), {}});
      }
      CHECK(std_bound_excess(aggregate_mean_std(mats)) <= 1e-9);
    }
  }
}

TEST_CASE("consistency") {
  const auto a = vector_of("A", {0.1, 0.5, 0.9});
  CHECK(consistency(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  const auto b = vector_of("B", {0.2, 0.4, 1.0});
  CHECK(std::abs(consistency(a, b) - std::sqrt(12.0 / 13.0)) <= 1e-12);
  CHECK(consistency(a, b) == consistency(b, a));
  CHECK(std::abs(consistency(a, vector_of("C", {0.3, 1.1, 1.9})) - 1.0) <= 1e-12);

  auto other_pairs = b;
  other_pairs.pairs[0].first = "zz";
  CHECK_ERRC(consistency(a, other_pairs), Errc::PairListMismatch);
  CHECK_ERRC(consistency(a, vector_of("C", {0.3, 0.3, 0.3})), Errc::ConstantVector);
  CHECK_ERRC(consistency(vector_of("A", {0.3}), vector_of("B", {0.5})), Errc::ConstantVector);
}

TEST_CASE("consistency_matrix and distribution") {
  const std::vector<SimilarityVector> three{vector_of("A", {0.1, 0.5, 0.9, 0.3}),
                                            vector_of("B", {0.2, 0.4, 1.0, 0.1}),
                                            vector_of("C", {0.9, 0.6, 0.2, 0.4})};
  const auto cm = consistency_matrix(three);
  CHECK(cm.datasets == std::vector<std::string>{"A", "B", "C"});
  for (int i = 0; i < 3; ++i) {
    CHECK(cm.rho(i, i) == 1.0);
    for (int j = 0; j < 3; ++j) {
      CHECK(cm.rho(i, j) == cm.rho(j, i));
      if (i != j) {
        CHECK(std::abs(cm.rho(i, j) - repsim::testing::naive_pearson(three[i].values, three[j].values)) <= 1e-12);
      }
    }
  }
  const auto dist = consistency_distribution(cm);
  CHECK(dist.samples.size() == 3);
  CHECK(dist.dataset_pairs[2] == std::pair<std::string, std::string>{"B", "C"});
  CHECK(dist.samples[2] == cm.rho(1, 2));

  SUBCASE("duplicate dataset under two ids") {
    const std::vector<SimilarityVector> dup{three[0], vector_of("A2", three[0].values)};
    const auto d = consistency_matrix(dup);
    CHECK(std::abs(d.rho(0, 1) - 1.0) <= 1e-12);
    CHECK(consistency_distribution(d).samples.size() == 1);
  }
  SUBCASE("23 datasets give 253 samples") {
    std::vector<SimilarityVector> many;
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int d = 0; d < 23; ++d) many.push_back(vector_of("d" + std::to_string(d), {u(gen), u(gen), u(gen), u(gen)}));
    CHECK(consistency_distribution(consistency_matrix(many)).samples.size() == 253);
  }
  SUBCASE("partial runs record failing dataset pairs") {
    std::vector<SimilarityVector> with_flat = three;
    with_flat.push_back(vector_of("F", {0.5, 0.5, 0.5, 0.5}));
    CHECK_ERRC(consistency_matrix(with_flat), Errc::ConstantVector);
    const auto partial = consistency_matrix(with_flat, true);
    CHECK(partial.failures.size() == 3);
    CHECK(std::isnan(partial.rho(0, 3)));
    CHECK(consistency_distribution(partial).samples.size() == 3);
  }
  CHECK_ERRC(consistency_matrix(std::span(three.data(), 1)), Errc::InvalidArgument);
}

TEST_CASE("summarize") {
  // numpy: median, percentile 25/75 (linear), mean, std (ddof=0)
  const std::vector<double> v{0.3, -0.1, 0.75, 0.42, 0.9, 0.05, 0.61};
  const auto s = summarize(v);
  CHECK(s.median == 0.42);
  CHECK(s.q1 == doctest::Approx(0.175).epsilon(1e-15));
  CHECK(s.q3 == doctest::Approx(0.6799999999999999).epsilon(1e-15));
  CHECK(s.mean == doctest::Approx(0.41857142857142854).epsilon(1e-15));
  CHECK(s.std == doctest::Approx(0.3374453848478329).epsilon(1e-14));
  CHECK(s.count == 7);
  const auto e = summarize(std::vector<double>{0.5, 0.1, 0.8, 0.2});
  CHECK(e.median == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(e.q1 == doctest::Approx(0.175).epsilon(1e-15));
  CHECK(e.q3 == doctest::Approx(0.575).epsilon(1e-15));
  CHECK(summarize(std::vector<double>{0.7, 0.7, 0.7}).std == 0.0);
  CHECK_ERRC(summarize(std::vector<double>{}), Errc::EmptyResultSet);

  SUBCASE("median equals an independent sort") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 50; ++t) {
      std::vector<double> x(1 + gen() % 30);
      for (auto& xi : x) xi = nd(gen);
      std::vector<double> sorted = x;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t k = sorted.size();
      const double med = k % 2 ? sorted[k / 2] : (sorted[k / 2 - 1] + sorted[k / 2]) / 2;
      CHECK(summarize(x).median == doctest::Approx(med).epsilon(1e-15));
    }
  }
}

TEST_CASE("transform_cka") {
  const std::vector<double> v{1.0, 0.0, 0.5};
  const auto ac = transform_cka(v, CkaTransform::Arccos);
  CHECK(ac[0] == 0.0);
  CHECK(ac[1] == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  // tan(0.5) from the sin/cos Taylor series in long double
  long double s = 0, c = 0, term_s = 0.5L, term_c = 1.0L;
  for (int k = 0; k < 20; ++k) {
    s += term_s;
    c += term_c;
    term_s *= -0.25L / ((2 * k + 2) * (2 * k + 3));
    term_c *= -0.25L / ((2 * k + 1) * (2 * k + 2));
  }
  const auto t = transform_cka(v, CkaTransform::Tan);
  CHECK(std::abs(t[2] - static_cast<double>(s / c)) <= 1e-15);
  CHECK(t[2] == doctest::Approx(0.5463).epsilon(1e-4));
  CHECK(t[1] == 0.0);
  // arccos is decreasing
  CHECK(transform_cka(std::vector<double>{0.2}, CkaTransform::Arccos)[0] >
        transform_cka(std::vector<double>{0.3}, CkaTransform::Arccos)[0]);
  try {
    transform_cka(std::vector<double>{0.5, 1.0000001}, CkaTransform::Tan);
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::OutOfDomain);
    CHECK(e.location() == std::vector<std::size_t>{1});
  }
  CHECK_ERRC(transform_cka(std::vector<double>{-0.1}, CkaTransform::Arccos), Errc::OutOfDomain);
  CHECK_ERRC(transform_cka(std::vector<double>{std::nan("")}, CkaTransform::Arccos), Errc::OutOfDomain);
}

TEST_CASE("hierarchical_order") {
  SUBCASE("two perfect blocks stay contiguous") {
    Matrix m(4, 4);
    m << 1, 0.1, 1, 0.1,  //
        0.1, 1, 0.1, 1,   //
        1, 0.1, 1, 0.1,   //
        0.1, 1, 0.1, 1;
    CHECK(hierarchical_order(m) == std::vector<std::size_t>{0, 2, 1, 3});
  }
  SUBCASE("two models keep their order") {
    Matrix m(2, 2);
    m << 1, 0.4, 0.4, 1;
    CHECK(hierarchical_order(m) == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("five models follow the average-linkage trace") {
    Matrix s(5, 5);
    s << 1.00, 0.30, 0.55, 0.90, 0.20,  //
        0.30, 1.00, 0.40, 0.35, 0.80,   //
        0.55, 0.40, 1.00, 0.60, 0.25,   //
        0.90, 0.35, 0.60, 1.00, 0.30,   //
        0.20, 0.80, 0.25, 0.30, 1.00;
    // heights from scipy.cluster.hierarchy.linkage(method="average")
    const auto merges = average_linkage(s);
    REQUIRE(merges.size() == 4);
    CHECK(merges[0].left == std::vector<std::size_t>{0});
    CHECK(merges[0].right == std::vector<std::size_t>{3});
    CHECK(merges[0].height == doctest::Approx(0.09999999999999998).epsilon(1e-15));
    CHECK(merges[1].left == std::vector<std::size_t>{1});
    CHECK(merges[1].right == std::vector<std::size_t>{4});
    CHECK(merges[1].height == doctest::Approx(0.19999999999999996).epsilon(1e-15));
    CHECK(merges[2].right == std::vector<std::size_t>{2});
    CHECK(merges[2].height == doctest::Approx(0.425).epsilon(1e-15));
    CHECK(merges[3].height == doctest::Approx(0.7000000000000001).epsilon(1e-15));
    CHECK(hierarchical_order(s) == std::vector<std::size_t>{0, 3, 2, 1, 4});
  }
  SUBCASE("all-equal distances resolve by index") {
    Matrix m = Matrix::Constant(4, 4, 0.5);
    m.diagonal().setOnes();
    CHECK(hierarchical_order(m) == std::vector<std::size_t>{0, 1, 2, 3});
  }
  CHECK_ERRC(hierarchical_order(Matrix::Ones(1, 1)), Errc::InvalidArgument);
}

TEST_CASE("subsample_convergence") {
  const synthetic::DatasetSpec spec{400, 10, 6, 2.0};
  const DatasetView view = repsim::testing::synthetic_view("d", noise_ladder(), spec, 9);
  const auto two = make_model_set("two", {"m_a", "m_c"});
  const std::size_t ks[] = {1, 5, 10, 20};

  const auto table = subsample_convergence(view, two, Measure::cka_linear(), ks, 4);
  REQUIRE(table.pairs.size() == 1);
  CHECK(table.differences.cols() == 3);
  for (std::size_t c = 0; c < 4; ++c) {
    const auto rows = stratified_subsample(*view.labels, ks[c] * 10, 4);
    const auto za = l2_normalize(view.features_of("m_a").select_rows(rows.indices));
    const auto zc = l2_normalize(view.features_of("m_c").select_rows(rows.indices));
    CHECK(table.similarity(0, static_cast<Eigen::Index>(c)) == similarity(Measure::cka_linear(), za, zc).value);
  }
  for (int c = 0; c < 3; ++c)
    CHECK(table.differences(0, c) == std::abs(table.similarity(0, c) - table.similarity(0, c + 1)));

  const std::size_t single[] = {10};
  CHECK(subsample_convergence(view, two, Measure::cka_linear(), single, 4).differences.cols() == 0);

  const Matrix z = random_matrix(400, 5, 3);
  auto same = make_view("s", {{"x", z}, {"y", z}}, view.labels);
  const auto zero = subsample_convergence(same, make_model_set("p", {"x", "y"}), Measure::cka_linear(), ks, 1);
  CHECK(zero.differences.cwiseAbs().maxCoeff() == 0.0);

  const std::size_t too_big[] = {1, 41};
  CHECK_ERRC(subsample_convergence(view, two, Measure::cka_linear(), too_big, 1), Errc::KTooLarge);
  const std::size_t unsorted[] = {5, 5};
  CHECK_ERRC(subsample_convergence(view, two, Measure::cka_linear(), unsorted, 1), Errc::InvalidArgument);
  auto unlabeled = view;
  unlabeled.labels.reset();
  CHECK_ERRC(subsample_convergence(unlabeled, two, Measure::cka_linear(), ks, 1), Errc::MissingLabels);
}

TEST_CASE("bootstrap_stability") {
  const synthetic::DatasetSpec spec{1000, 5, 6, 2.0};
  const DatasetView view = repsim::testing::synthetic_view("d", noise_ladder(), spec, 12);
  const auto two = make_model_set("two", {"m_a", "m_b"});

  const auto res = bootstrap_stability(view, two, Measure::cka_linear(), 100, 1000, 77);
  REQUIRE(res.pairs.size() == 1);
  REQUIRE(res.pairs[0].values.size() == 100);
  for (std::size_t it = 0; it < 100; ++it) {
    const auto rows = bootstrap_indices(1000, 1000, 77 ^ it);
    const auto za = l2_normalize(view.features_of("m_a").select_rows(rows.indices));
    const auto zb = l2_normalize(view.features_of("m_b").select_rows(rows.indices));
    CHECK(res.pairs[0].values[it] == similarity(Measure::cka_linear(), za, zb).value);
  }
  CHECK(res.pairs[0].std > 0.0);
  CHECK(res.pairs[0].min <= res.pairs[0].mean);
  CHECK(res.pairs[0].mean <= res.pairs[0].max);

  const Matrix z = random_matrix(200, 6, 4);
  const auto same = make_view("s", {{"x", z}, {"y", z}});
  const auto xy = make_model_set("p", {"x", "y"});
  for (const Measure& m : {Measure::cka_linear(), Measure::cka_rbf(0.4)}) {
    const auto ident = bootstrap_stability(same, xy, m, 20, 150, 3);
    for (double v : ident.pairs[0].values) CHECK(v == 1.0);
    CHECK(ident.pairs[0].std == 0.0);
  }
  CHECK(bootstrap_stability(view, two, Measure::cka_linear(), 1, 500, 3).pairs[0].std == 0.0);
  CHECK_ERRC(bootstrap_stability(view, two, Measure::cka_linear(), 0, 10, 3), Errc::InvalidArgument);
  CHECK_ERRC(bootstrap_stability(view, two, Measure::cka_linear(), 5, 1001, 3), Errc::InvalidArgument);
}

TEST_CASE("parallel_for") {
  std::vector<int> slots(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { slots[i] = static_cast<int>(i * i); });
  for (int i = 0; i < 100; ++i) CHECK(slots[static_cast<std::size_t>(i)] == i * i);
  try {
    parallel_for(50, 3, [](std::size_t i) {
      if (i == 7 || i == 31) throw Error(Errc::InvalidArgument, "task " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.message() == "task 7");
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no tasks"); });
}
