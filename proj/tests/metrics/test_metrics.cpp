#include <doctest.h>

#include <cmath>
#include <vector>

#include "clarifystl/metrics/metrics.hpp"
#include "clarifystl/metrics/robustness.hpp"
#include "clarifystl/rng.hpp"
#include "clarifystl/stl/monitor.hpp"
#include "support/generators.hpp"

using namespace clarifystl;
using namespace clarifystl::metrics;

TEST_CASE("formula_accuracy") {
  CHECK(formula_accuracy("G[0,5](x > 1)", "G[0,5](x > 1)") == 1.0);
  // 11 reference tokens, only the threshold differs
  CHECK(formula_accuracy("G[0,5](x > 2)", "G[0,5](x > 1)") == doctest::Approx(10.0 / 11.0).epsilon(1e-12));
  CHECK(formula_accuracy("G[0,5](x >", "G[0,5](x > 1)") == 0.0);
  CHECK_THROWS_AS(formula_accuracy("x > 1", "G[0,5](x >"), stl::ParseError);
  // canonicalization happens before alignment
  CHECK(formula_accuracy("G[0,5.0]( x>1 )", "G[0,5](x > 1)") == 1.0);
}

TEST_CASE("template_accuracy") {
  CHECK(template_accuracy("G[0,5](x > 2)", "G[0,9](y > 7)") == 1.0);
  CHECK(template_accuracy("F[0,5](x > 2)", "G[0,9](y > 7)") == doctest::Approx(10.0 / 11.0).epsilon(1e-12));
  CHECK(template_accuracy("G[0,9](y > 7)", "G[0,9](y > 7)") == 1.0);
  CHECK(template_accuracy("G[0,9](y >", "G[0,9](y > 7)") == 0.0);
}

TEST_CASE("bleu") {
  CHECK(bleu("the signal rises", "the signal rises") == doctest::Approx(1.0));
  CHECK(bleu("G[0,5](x > 1)", "G[0,5](x > 1)") == doctest::Approx(1.0));
  CHECK(bleu("", "a b c") == 0.0);
  // p1 = 3/4, p2 = 2/3, p3 = 1/2, p4 = 0/1 smoothed to 1/2, no brevity penalty
  const double expected = std::pow(0.75 * (2.0 / 3.0) * 0.5 * 0.5, 0.25);
  CHECK(std::abs(bleu("a b c d", "a b c e") - expected) < 1e-12);
  CHECK(std::abs(expected - 0.5946) < 1e-4);
  // brevity penalty applies to short candidates
  CHECK(bleu("a b", "a b c d") < bleu("a b c", "a b c d"));
}

TEST_CASE("rouge_l") {
  CHECK(rouge_l("what value", "what value") == 1.0);
  CHECK(rouge_l("what value", "what specific value") == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(rouge_l("alpha beta", "gamma delta") == 0.0);
  CHECK(rouge_l("", "x") == 0.0);
}

TEST_CASE("bert_style_score") {
  llm::HashEmbeddingProvider hashp(64);
  CHECK(bert_style_score("what specific value", "what specific value", hashp) == doctest::Approx(1.0));

  llm::LookupEmbeddingProvider table(2);
  table.insert("a", Eigen::Vector2d(1, 0));
  table.insert("b", Eigen::Vector2d(0, 1));
  table.insert("c", Eigen::Vector2d(0.5, std::sqrt(3.0) / 2.0));
  CHECK(bert_style_score("a", "b", table) == 0.0);
  // unit vectors 60 degrees apart: cos = 0.5 both ways
  CHECK(bert_style_score("a", "c", table) == doctest::Approx(0.5).epsilon(1e-12));
  table.insert("d", Eigen::Vector2d(-1, 0));
  CHECK(bert_style_score("a", "d", table) == 0.0);
}

TEST_CASE("classification_metrics") {
  std::vector<int> y{1, 0, 1, 1, 0};
  auto same = classification_metrics(y, y);
  CHECK(same.accuracy == 1.0);
  CHECK(same.f1 == 1.0);

  std::vector<int> p{1, 1, 0, 0}, l{1, 0, 0, 1};
  auto r = classification_metrics(p, l);
  CHECK(r.accuracy == 0.5);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == 0.5);

  std::vector<int> zeros{0, 0, 0}, ones{1, 1, 1};
  auto z = classification_metrics(zeros, ones);
  CHECK(z.recall == 0.0);
  CHECK(z.f1 == 0.0);
  CHECK(z.precision == 0.0);

  std::vector<int> shorter{1};
  CHECK_THROWS_AS(classification_metrics(shorter, ones), MetricError);
}

TEST_CASE("fleiss_kappa") {
  Eigen::MatrixXi agree(3, 2);
  agree << 3, 0, 0, 3, 3, 0;
  CHECK(fleiss_kappa(agree) == doctest::Approx(1.0));

  Eigen::MatrixXi split(2, 2);
  split << 2, 1, 1, 2;
  // P_i = 1/3 for both items, category shares 1/2 each
  CHECK(std::abs(fleiss_kappa(split) - (-1.0 / 3.0)) < 1e-12);

  Eigen::MatrixXi single(4, 3);
  single.setZero();
  single.col(1).setConstant(5);
  CHECK(fleiss_kappa(single) == 1.0);

  Eigen::MatrixXi ragged(2, 2);
  ragged << 2, 1, 1, 1;
  CHECK_THROWS_AS(fleiss_kappa(ragged), MetricError);
}

TEST_CASE("property: fleiss_kappa is invariant under item and category permutations") {
  clarifystl::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int items = 3 + static_cast<int>(rng.index(5));
    const int cats = 2 + static_cast<int>(rng.index(3));
    const int raters = 2 + static_cast<int>(rng.index(4));
    Eigen::MatrixXi m = Eigen::MatrixXi::Zero(items, cats);
    for (int i = 0; i < items; ++i) {
      for (int r = 0; r < raters; ++r) ++m(i, static_cast<int>(rng.index(static_cast<std::size_t>(cats))));
    }
    if (m.colwise().sum().maxCoeff() == items * raters) continue;
    Eigen::MatrixXi permuted = m.colwise().reverse().rowwise().reverse();
    CHECK(fleiss_kappa(permuted) == doctest::Approx(fleiss_kappa(m)).epsilon(1e-12));
  }
}

TEST_CASE("generate_traces") {
  auto g = stl::parse("G[0,5](x > 1)");
  CHECK(stl::evaluate(g, stl::Trace::constant({"x"}, {2}, 6), 0));
  CHECK_FALSE(stl::evaluate(g, stl::Trace::constant({"x"}, {0}, 6), 0));

  auto f = stl::parse("F[10,150](x1 > 0.2)");
  auto traces = generate_traces(f, {10, 7});
  REQUIRE(traces.size() == 10);
  int sat = 0;
  for (const auto& t : traces) {
    CHECK(t.horizon() >= stl::temporal_depth(f));
    sat += stl::evaluate(f, t, 0) ? 1 : 0;
  }
  CHECK(sat > 0);
  CHECK(sat < 10);

  auto again = generate_traces(f, {10, 7});
  CHECK(again == traces);

  CHECK_THROWS_AS(generate_traces(stl::parse("x > 1 | !(x > 1)"), {4, 1}), TraceBudgetExhausted);
  CHECK_THROWS_AS(generate_traces(stl::parse("true"), {4, 1}), TraceBudgetExhausted);
}

TEST_CASE("semantic_robustness") {
  std::vector<stl::Trace> traces;
  for (double v : {2.0, 0.5, -1.0, 3.0}) traces.push_back(stl::Trace::constant({"x"}, {v}, 6));
  auto r = semantic_robustness("G[0,5](x > 1)", "G[0,5](x > 0)", traces);
  CHECK(r.n_traces == 4);
  CHECK(r.n_agree == 3);
  CHECK(r.score == 75.0);

  CHECK(semantic_robustness("G[0,5](x > 0)", "G[0,5](x > 0)", traces).score == 100.0);
  CHECK(semantic_robustness("!G[0,5](x > 0)", "G[0,5](x > 0)", traces).score == 0.0);
  CHECK(semantic_robustness("G[0,5](x >", "G[0,5](x > 0)", traces).score == 0.0);

  auto long_window = semantic_robustness("G[0,9](x > 0)", "G[0,5](x > 0)", traces);
  CHECK(long_window.n_traces == 0);
  CHECK(long_window.excluded.size() == 4);
}

TEST_CASE("trace json round trip") {
  Eigen::MatrixXd v(2, 2);
  v << 1, 2, 3, 4.5;
  stl::Trace t({"a", "b"}, {0, 1.5, 4}, v);
  auto j = trace_to_json(t);
  CHECK(j.dump() ==
        R"({"variables":["a","b"],"breakpoints":[0.0,1.5,4.0],"values":[[1.0,2.0],[3.0,4.5]],"horizon":4.0})");
  CHECK(trace_from_json(nlohmann::json::parse(j.dump())) == t);
  auto bad = nlohmann::json::parse(R"({"variables":["a"],"breakpoints":[0,1],"values":[[1]],"horizon":2})");
  CHECK_THROWS_AS(trace_from_json(bad), stl::InvalidTrace);
}
