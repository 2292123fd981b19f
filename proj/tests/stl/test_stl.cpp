#include <doctest.h>

#include <random>

#include "clarifystl/stl/monitor.hpp"
#include "clarifystl/stl/syntax.hpp"
#include "support/generators.hpp"
#include "support/grid_oracle.hpp"

using namespace clarifystl::stl;
using clarifystl::testing::FormulaGenerator;
using clarifystl::testing::GridOracle;

namespace {

Formula atom(const char* name, Comparator c, double v) { return Formula::atom(Atom::make(name, c, v)); }

Trace step_trace() {
  // x = -1 on [0,1), 1 on [1,3]
  Eigen::MatrixXd v(1, 2);
  v << -1, 1;
  return Trace({"x"}, {0, 1, 3}, v);
}

} // namespace

TEST_CASE("parse the automatic transmission requirement") {
  auto f = parse("G[0,12]((speed > 45) -> F[1,4](rpm < 2700))");
  auto expected = Formula::globally(
      Interval::make(0, 12),
      Formula::implication(atom("speed", Comparator::Greater, 45),
                           Formula::eventually(Interval::make(1, 4),
                                               atom("rpm", Comparator::Less, 2700))));
  CHECK(f == expected);
  CHECK(render(f) == "G[0,12](speed > 45 -> F[1,4](rpm < 2700))");
}

TEST_CASE("parse a single atom") {
  CHECK(parse("x1 > 0.2") == atom("x1", Comparator::Greater, 0.2));
}

TEST_CASE("parse errors") {
  SUBCASE("inverted interval") {
    try {
      parse("G[5,2](x > 0)");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.position() == 1);
      CHECK(e.detail() == "interval lower bound must be less than upper bound");
    }
  }
  SUBCASE("negative bound") { CHECK_THROWS_AS(parse("F[-1,2](x > 0)"), ParseError); }
  SUBCASE("equality comparator") { CHECK_THROWS_AS(parse("x == 1"), ParseError); }
  SUBCASE("overflow") {
    std::string big = "x > 1" + std::string(400, '0');
    try {
      parse(big);
      FAIL("expected overflow");
    } catch (const ParseError& e) {
      CHECK(e.detail() == "number overflow");
    }
  }
  SUBCASE("signal on the right") { CHECK_THROWS_AS(parse("x > y"), ParseError); }
}

TEST_CASE("render examples") {
  CHECK(render(atom("x1", Comparator::Greater, 0.2)) == "x1 > 0.2");
  CHECK(render(Formula::globally(Interval::make(0, 30), atom("x2", Comparator::Less, 0.5))) ==
        "G[0,30](x2 < 0.5)");
  auto fig = Formula::implication(
      Formula::eventually(Interval::make(10, 150), atom("x1", Comparator::Greater, 0.2)),
      Formula::globally(Interval::make(0, 30), atom("x2", Comparator::Less, 0.5)));
  CHECK(render(fig) == "F[10,150](x1 > 0.2) -> G[0,30](x2 < 0.5)");
}

TEST_CASE("render affine atoms and until") {
  CHECK(render(parse("2*x - y + 0.5*z >= -1.5")) == "2*x - y + 0.5*z >= -1.5");
  CHECK(render(parse("-x<3")) == "-1*x < 3");
  CHECK(render(parse("x>1 U[0,2] y<0 & true")) == "((x > 1) U[0,2] (y < 0)) & true");
  CHECK(render(parse("a > 0 -> b > 0 -> c > 0")) == "a > 0 -> (b > 0 -> c > 0)");
  CHECK(render(parse("!!(x > 0)")) == "!!(x > 0)");
  CHECK(render(parse("G[0.50,2.250](x > 1.000)")) == "G[0.5,2.25](x > 1)");
}

TEST_CASE("unicode input is normalized") {
  CHECK(render(parse("□[0,1](x ≥ 1 ∧ ¬(y ≤ 2)) → ◇[0,2]⊤")) ==
        "G[0,1](x >= 1 & !(y <= 2)) -> F[0,2](true)");
}

TEST_CASE("check_syntax") {
  CHECK(check_syntax("G[0,5](x > 1)").empty());
  auto d = check_syntax("G[0,5](x >");
  REQUIRE(d.size() == 1);
  CHECK(d[0].message == "unexpected end of input");
  CHECK(d[0].position == 10);
  auto d2 = check_syntax("F[3](x > 1)");
  REQUIRE(d2.size() == 1);
  CHECK(d2[0].message == "interval requires two bounds");
}

TEST_CASE("tokenize") {
  auto toks = tokenize("G[0,5](x > 1)");
  std::vector<std::string> text;
  for (const auto& t : toks) text.push_back(t.text);
  CHECK(text == std::vector<std::string>{"G", "[", "0", ",", "5", "]", "(", "x", ">", "1", ")"});
  CHECK(toks[0].kind == TokenKind::Operator);
  CHECK(toks[1].kind == TokenKind::Delimiter);
  CHECK(toks[2].kind == TokenKind::Number);
  CHECK(toks[7].kind == TokenKind::Identifier);
  CHECK(toks[8].kind == TokenKind::Comparator);

  CHECK(tokenize("x1 > 0.2").size() == 3);
  CHECK_THROWS_AS(tokenize(""), ParseError);

  auto imp = tokenize("a > 0 -> b > -1");
  CHECK(imp[3].text == "->");
  CHECK(imp[3].kind == TokenKind::Operator);
  CHECK(imp.back().text == "-1");
}

TEST_CASE("extract_template") {
  auto a = extract_template(parse("G[0,5](x > 1)"));
  auto b = extract_template(parse("G[0,9](y > 7)"));
  CHECK(a.text() == "G[NUM,NUM](SIG > NUM)");
  CHECK(a == b);
  CHECK(extract_template(parse("x1 > 0.2")).text() == "SIG > NUM");
  CHECK(extract_template(parse("2*x - y < 3")).text() == "NUM*SIG - SIG < NUM");
  CHECK(extract_template(a) == a);
}

TEST_CASE("evaluate step-trace examples agree with the grid oracle") {
  Trace tr = step_trace();
  GridOracle oracle(tr, 0.25);
  auto ev = parse("F[0,2](x > 0)");
  auto al = parse("G[0,2](x > 0)");
  CHECK(oracle.holds(ev, 0) == true);
  CHECK(oracle.holds(al, 0) == false);
  CHECK(evaluate(ev, tr, 0) == true);
  CHECK(evaluate(al, tr, 0) == false);

  CHECK(evaluate(Formula::falsity(), tr, 1.5) == false);
  CHECK(evaluate(Formula::negation(Formula::falsity()), tr, 1.5) == true);
}

TEST_CASE("until starts its invariant at the evaluation time") {
  // x > 0 fails on [0,1) so x > 0 U[1,2] y > 0 is false at 0 even though
  // x holds throughout the window [1,2].
  Eigen::MatrixXd v(2, 2);
  v << -1, 1, 1, 1;
  Trace tr({"x", "y"}, {0, 1, 3}, v);
  auto f = parse("(x > 0) U[1,2] (y > 0)");
  CHECK_FALSE(evaluate(f, tr, 0));
  CHECK(evaluate(f, tr, 1));
}

TEST_CASE("closed window endpoints are inspected") {
  // y > 0 only on [2,3]; F[0,2] at t = 0 sees t' = 2 exactly.
  Eigen::MatrixXd v(1, 2);
  v << -1, 1;
  Trace tr({"y"}, {0, 2, 3}, v);
  CHECK(evaluate(parse("F[0,2](y > 0)"), tr, 0));
  CHECK_FALSE(evaluate(parse("F[0,1.5](y > 0)"), tr, 0));
}

TEST_CASE("evaluate errors") {
  Trace tr = step_trace();
  CHECK_THROWS_AS(evaluate(parse("q > 0"), tr, 0), EvaluationError);
  CHECK_THROWS_AS(evaluate(parse("G[0,4](x > 0)"), tr, 0), HorizonExceeded);
  CHECK_THROWS_AS(evaluate(parse("G[0,2](x > 0)"), tr, 1.5), HorizonExceeded);
  CHECK_THROWS_AS(evaluate(parse("x > 0"), tr, 3.5), EvaluationError);
  CHECK_THROWS_AS(evaluate(parse("x > 0"), tr, -1), EvaluationError);
  CHECK(evaluate(parse("x > 0"), tr, 3) == true);
}

TEST_CASE("trace invariants") {
  Eigen::MatrixXd v(1, 2);
  v << 0, 1;
  CHECK_THROWS_AS(Trace({"x"}, {0, 2, 1}, v), InvalidTrace);
  CHECK_THROWS_AS(Trace({"x"}, {1, 2, 3}, v), InvalidTrace);
  CHECK_THROWS_AS(Trace({"x", "x"}, {0, 1}, Eigen::MatrixXd::Zero(2, 1)), InvalidTrace);
  CHECK_THROWS_AS(Trace({"x"}, {0, 1, 2, 3}, v), InvalidTrace);
}

TEST_CASE("property: render/parse round trip") {
  FormulaGenerator gen(11);
  for (int i = 0; i < 300; ++i) {
    Formula f = gen.formula();
    CAPTURE(render(f));
    CHECK(parse(render(f)) == f);
  }
}

TEST_CASE("property: template is a fixpoint") {
  FormulaGenerator gen(12);
  for (int i = 0; i < 100; ++i) {
    auto t = extract_template(gen.formula());
    CHECK(extract_template(t) == t);
    for (const auto& tok : t.tokens) {
      CHECK(tok.kind != TokenKind::Identifier);
      CHECK(tok.kind != TokenKind::Number);
    }
  }
}

TEST_CASE("property: evaluate matches the grid oracle") {
  FormulaGenerator gen(13, {3, {"x", "y"}, 3, true, true});
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    Formula f = gen.formula();
    int depth = static_cast<int>(temporal_depth(f));
    int horizon = depth + 2;
    Trace tr = clarifystl::testing::random_trace(rng, {"x", "y"}, horizon, 6);
    GridOracle oracle(tr, 0.5);
    for (int t = 0; t + depth <= horizon; ++t) {
      CAPTURE(render(f));
      CHECK(evaluate(f, tr, t) == oracle.holds(f, t));
    }
  }
}

TEST_CASE("property: derived operators agree with their expansions") {
  FormulaGenerator gen(14, {2, {"x", "y"}, 3, true, true});
  std::mt19937_64 rng(15);
  for (int i = 0; i < 500; ++i) {
    Formula phi = gen.formula(), psi = gen.formula();
    Interval iv = gen.interval();
    int horizon = static_cast<int>(std::max(temporal_depth(phi) + iv.hi, temporal_depth(psi))) + 1;
    Trace tr = clarifystl::testing::random_trace(rng, {"x", "y"}, horizon, 6);
    auto v = [&](const Formula& f) { return evaluate(f, tr, 0); };
    CAPTURE(render(phi));
    CAPTURE(render(psi));
    CHECK(v(Formula::eventually(iv, phi)) == v(Formula::until(iv, Formula::truth(), phi)));
    CHECK(v(Formula::globally(iv, phi)) == v(Formula::negation(Formula::eventually(iv, Formula::negation(phi)))));
    CHECK(v(Formula::disjunction(phi, psi)) ==
          v(Formula::negation(Formula::conjunction(Formula::negation(phi), Formula::negation(psi)))));
    CHECK(v(Formula::implication(phi, psi)) == v(Formula::disjunction(Formula::negation(phi), psi)));
  }
}
