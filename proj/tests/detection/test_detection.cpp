#include <doctest.h>

#include <chrono>
#include <sstream>

#include "clarifystl/dataset/mutation.hpp"
#include "clarifystl/detection/ambiguity_model.hpp"
#include "clarifystl/detection/detection.hpp"
#include "clarifystl/llm/scripted.hpp"
#include "support/clusters.hpp"
#include "support/corpus.hpp"

using namespace clarifystl;
using namespace clarifystl::detection;

TEST_CASE("triplet_loss") {
  Eigen::Vector2d a(0, 0), n(2, 0);
  CHECK(triplet_loss(a, a, n, 1.0) == 0.0);
  Eigen::Vector2d p(1.5, 0), n2(0, 0.5);
  CHECK(triplet_loss(a, p, n2, 1.0) == doctest::Approx(2.0));
  CHECK(triplet_loss(a, a, a, 1.0) == 1.0);
  CHECK_THROWS_AS(triplet_loss(Eigen::VectorXd(a), Eigen::VectorXd::Zero(3), Eigen::VectorXd(a), 1.0), DetectionError);
  CHECK_THROWS_AS(triplet_loss(a, a, a, 0.0), DetectionError);
}

TEST_CASE("property: triplet_loss is non-negative and non-increasing in the negative distance") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd a(4), p(4), dir(4);
    for (int k = 0; k < 4; ++k) {
      a(k) = rng.normal();
      p(k) = rng.normal();
      dir(k) = rng.normal();
    }
    dir.normalize();
    double prev = triplet_loss(a, p, Eigen::VectorXd(a + 0.0 * dir), 1.0);
    CHECK(prev >= 0.0);
    for (double r = 0.25; r < 4.0; r += 0.25) {
      const double cur = triplet_loss(a, p, Eigen::VectorXd(a + r * dir), 1.0);
      CHECK(cur >= 0.0);
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("projector output has unit norm and softmax sums to one") {
  auto m = AmbiguityModel::initialized(ModelDims::scaled(32), 4);
  CHECK(m.dims() == ModelDims{32, 8, 2});
  CHECK(ModelDims::scaled(4096) == ModelDims{4096, 1024, 256});
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(32);
    for (int k = 0; k < 32; ++k) x(k) = 3.0 * rng.normal();
    CHECK(std::abs(m.project(x).norm() - 1.0) < 1e-6);
    CHECK(m.probabilities(x).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(m.project(Eigen::VectorXd::Zero(5)), DetectionError);
}

TEST_CASE("analytic gradients match finite differences") {
  const ModelDims d{6, 5, 3};
  auto m = AmbiguityModel::initialized(d, 21);
  m.b1.setConstant(0.05);
  m.b2.setConstant(-0.1);
  m.b3 << 0.2, -0.3;
  Rng rng(2);
  Eigen::VectorXd a(6), p(6), n(6);
  for (int k = 0; k < 6; ++k) {
    a(k) = rng.normal();
    p(k) = a(k) + 0.8 * rng.normal();
    n(k) = a(k) + 0.3 * rng.normal();
  }
  Gradients g(d);
  const ExampleLoss base = example_loss(m, a, p, n, 1, &g);
  REQUIRE(base.triplet > 0.0);

  auto check = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad) {
    for (Eigen::Index r = 0; r < param.rows(); ++r) {
      for (Eigen::Index c = 0; c < param.cols(); ++c) {
        const double keep = param(r, c);
        const double h = 1e-6;
        param(r, c) = keep + h;
        const double up = example_loss(m, a, p, n, 1, nullptr).total();
        param(r, c) = keep - h;
        const double down = example_loss(m, a, p, n, 1, nullptr).total();
        param(r, c) = keep;
        CHECK(grad(r, c) == doctest::Approx((up - down) / (2 * h)).epsilon(1e-4).scale(1.0));
      }
    }
  };
  check(m.W1, g.W1);
  check(m.W2, g.W2);
  check(m.W3, g.W3);
  Eigen::MatrixXd b1 = m.b1, b2 = m.b2, b3 = m.b3;
  auto check_vec = [&](Eigen::VectorXd& param, const Eigen::VectorXd& grad) {
    Eigen::MatrixXd pm = param;
    for (Eigen::Index r = 0; r < param.size(); ++r) {
      const double keep = param(r);
      param(r) = keep + 1e-6;
      const double up = example_loss(m, a, p, n, 1, nullptr).total();
      param(r) = keep - 1e-6;
      const double down = example_loss(m, a, p, n, 1, nullptr).total();
      param(r) = keep;
      CHECK(grad(r) == doctest::Approx((up - down) / 2e-6).epsilon(1e-4).scale(1.0));
    }
  };
  check_vec(m.b1, g.b1);
  check_vec(m.b2, g.b2);
  check_vec(m.b3, g.b3);
}

TEST_CASE("classify_ambiguity threshold is inclusive") {
  AmbiguityModel m(ModelDims{2, 2, 2});
  m.W1.setIdentity();
  m.W2.setIdentity();
  m.b2 << 1.0, 0.0;
  llm::LookupEmbeddingProvider table(2);
  table.insert("x", Eigen::Vector2d(1, 1));
  auto half = classify_ambiguity(m, "x", table);
  CHECK(half.confidence == 0.5);
  CHECK(half.is_defective);
  CHECK(half.types == std::set<DefectType>{DefectType::Semantic});

  m.b3 << 0.0, std::log(0.49 / 0.51);
  auto below = classify_ambiguity(m, "x", table);
  CHECK(below.confidence == doctest::Approx(0.49).epsilon(1e-12));
  CHECK_FALSE(below.is_defective);
  CHECK(below.types.empty());
}

TEST_CASE("training on two clusters") {
  testsupport::ClusterSet data(32, 400, 100, 4.0, 17);
  TrainingConfig cfg;
  cfg.epochs = 30;
  cfg.lr = 1e-2;
  cfg.seed = 5;
  const auto t0 = std::chrono::steady_clock::now();
  auto trained = train_ambiguity_model(data.train, data.provider, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("training took " << secs << " s");

  REQUIRE(trained.log.initial_triplet.has_value());
  REQUIRE(trained.log.epochs.size() == 30);
  const double initial = *trained.log.initial_triplet;
  const double final_loss = trained.log.epochs.back().triplet;
  MESSAGE("triplet loss " << initial << " -> " << final_loss);
  CHECK(final_loss < initial);
  CHECK(final_loss <= 0.1 * initial);

  int correct = 0;
  for (const auto& [text, label] : data.test) {
    correct += classify_ambiguity(trained.model, text, data.provider).is_defective == (label == 1) ? 1 : 0;
  }
  const double accuracy = correct / static_cast<double>(data.test.size());
  MESSAGE("held-out accuracy " << accuracy);
  CHECK(accuracy >= 0.95);

  auto again = train_ambiguity_model(data.train, data.provider, cfg);
  CHECK(again.model == trained.model);
  for (std::size_t e = 0; e < again.log.epochs.size(); ++e) {
    CHECK(again.log.epochs[e].total == trained.log.epochs[e].total);
  }

  std::stringstream file;
  trained.model.save(file);
  const std::string bytes = file.str();
  CHECK(bytes.substr(0, 5) == "AMBM1");
  CHECK(bytes.size() == 5 + 12 + 16 + 8 * static_cast<std::size_t>(32 * 8 + 8 + 8 * 2 + 2 + 2 * 2 + 2));
  CHECK(static_cast<unsigned char>(bytes[5]) == 32);
  auto loaded = AmbiguityModel::load(file);
  CHECK(loaded == trained.model);

  std::stringstream junk("AMBX1....");
  CHECK_THROWS_AS(AmbiguityModel::load(junk), DetectionError);
}

TEST_CASE("training edge cases") {
  testsupport::ClusterSet data(8, 20, 0, 4.0, 1);
  TrainingConfig cfg;
  cfg.epochs = 0;
  auto untrained = train_ambiguity_model(data.train, data.provider, cfg);
  CHECK(untrained.log.epochs.empty());
  CHECK_FALSE(untrained.log.initial_triplet.has_value());
  CHECK(untrained.model.dims() == ModelDims::scaled(8));

  std::vector<std::pair<std::string, int>> one_class;
  for (const auto& r : data.train) {
    if (r.second == 0) one_class.push_back(r);
  }
  CHECK_THROWS_AS(train_ambiguity_model(one_class, data.provider, cfg), DetectionError);
  cfg.dims = ModelDims{16, 4, 2};
  CHECK_THROWS_AS(train_ambiguity_model(data.train, data.provider, cfg), DetectionError);
}

TEST_CASE("rule_detect_vagueness") {
  const auto lex = dataset::PhraseLexicon::defaults();
  auto soon = rule_detect_vagueness("the system responds soon", lex);
  CHECK(soon.is_defective);
  CHECK(soon.types == std::set<DefectType>{DefectType::Temporal});
  auto high = rule_detect_vagueness("speed is high", lex);
  CHECK(high.types == std::set<DefectType>{DefectType::Numerical});
  auto plain = rule_detect_vagueness("If speed exceeds 50 then the brake activates within 2 seconds", lex);
  CHECK_FALSE(plain.is_defective);
  CHECK(plain.types.empty());
  auto cond = rule_detect_vagueness("speed > 50, brake activates", lex);
  CHECK(cond.types == std::set<DefectType>{DefectType::ConditionalLogic});
}

TEST_CASE("property: rule detector flags every rule-only vagueness mutant") {
  const auto lex = dataset::PhraseLexicon::defaults();
  auto corpus = testsupport::synthetic_corpus(80, 77);
  dataset::MutationPlan plan;
  plan.seed = 4;
  plan.counts = {{DefectType::Temporal, 40}, {DefectType::Numerical, 40}, {DefectType::ConditionalLogic, 25}};
  auto built = dataset::build_dataset(corpus, plan, lex);
  for (std::size_t i = corpus.size(); i < built.records.size(); ++i) {
    const auto& m = built.records[i];
    auto r = rule_detect_vagueness(m.nl, lex);
    INFO(m.nl);
    for (DefectType t : m.defect_types) CHECK(r.types.count(t) == 1);
  }
}

TEST_CASE("llm vagueness detector") {
  llm::ScriptedFixture fx;
  fx.add("detect_vagueness", 0, R"({"vague": true, "types": ["Numerical"], "rationale": "no amount"})");
  fx.add("detect_vagueness", 1, "complete");
  fx.add("detect_vagueness", 2, "I think it may be fine");
  fx.add("detect_vagueness", 2, "Temporal, Numerical");
  fx.add("detect_vagueness", 3, "hmm");
  fx.add("detect_vagueness", 3, "still prose");
  fx.add("detect_vagueness", 4, R"({"vague": true, "types": ["Referential"]})");
  fx.add("detect_vagueness", 4, R"({"vague": false})");
  llm::ScriptedBackend b(fx);
  const std::string example =
      "During 10-150 seconds, if signal x1 exceeds 0.2, then signal x2 will decrease for the next 30 seconds";

  auto r0 = detect_vagueness(example, b, 0);
  CHECK(r0.is_defective);
  CHECK(r0.types == std::set<DefectType>{DefectType::Numerical});
  CHECK(r0.rationale == "no amount");
  auto r1 = detect_vagueness(example, b, 1);
  CHECK_FALSE(r1.is_defective);
  CHECK(r1.types.empty());
  auto r2 = detect_vagueness(example, b, 2);
  CHECK(r2.types == std::set<DefectType>{DefectType::Temporal, DefectType::Numerical});
  CHECK(b.calls("detect_vagueness") == 4);
  CHECK_THROWS_AS(detect_vagueness(example, b, 3), DetectionParseError);
  auto r4 = detect_vagueness(example, b, 4);
  CHECK_FALSE(r4.is_defective);
}

TEST_CASE("llm and rule ambiguity detectors") {
  llm::ScriptedFixture fx;
  fx.add("detect_ambiguity", 1, R"({"ambiguous": true, "types": ["Semantic"]})");
  fx.add("detect_ambiguity", 2, "not ambiguous");
  llm::ScriptedBackend b(fx);
  LlmAmbiguityDetector d(b);
  CHECK(d.detect("x", 1).types == std::set<DefectType>{DefectType::Semantic});
  CHECK_FALSE(d.detect("x", 2).is_defective);

  const auto lex = dataset::PhraseLexicon::defaults();
  CHECK(rule_detect_ambiguity("x1 exceeds 0.2 and it stays high", lex).types ==
        std::set<DefectType>{DefectType::Referential});
  CHECK_FALSE(rule_detect_ambiguity("x1 exceeds 0.2 and x1 stays high", lex).is_defective);
}
