#include <doctest.h>

#include <sstream>

#include "clarifystl/dataset/lexicon.hpp"
#include "clarifystl/dataset/mutation.hpp"
#include "clarifystl/dataset/record.hpp"
#include "clarifystl/dataset/validator.hpp"
#include "clarifystl/llm/scripted.hpp"
#include "support/corpus.hpp"

using namespace clarifystl;
using namespace clarifystl::dataset;

namespace {

DatasetRecord clean(std::string id, std::string nl, std::string stl) {
  DatasetRecord r;
  r.id = std::move(id);
  r.nl = std::move(nl);
  r.stl = std::move(stl);
  return r;
}

std::string dump(const std::vector<DatasetRecord>& rs) {
  std::ostringstream out;
  write_dataset(out, rs);
  return out.str();
}

} // namespace

TEST_CASE("record json round trip keeps unknown fields") {
  const std::string line =
      R"({"id":"r1","nl":"x exceeds 3","stl":"x > 3","label":"vague","defect_types":["Numerical","Temporal"],)"
      R"("reference_query":"What value?","parent_id":"r0","source":"manual","score":[1,2]})";
  std::istringstream in(line + "\n\n");
  auto rs = read_dataset(in);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].label == Label::Vague);
  CHECK(rs[0].defect_types == std::set<DefectType>{DefectType::Temporal, DefectType::Numerical});
  CHECK(rs[0].extra["source"] == "manual");
  CHECK(dump(rs) ==
        R"({"id":"r1","nl":"x exceeds 3","stl":"x > 3","label":"vague","defect_types":["Temporal","Numerical"],)"
        R"("reference_query":"What value?","parent_id":"r0","source":"manual","score":[1,2]})"
        "\n");
  std::istringstream again(dump(rs));
  CHECK(read_dataset(again) == rs);

  std::istringstream bad(R"({"id":"r2","nl":"x","label":"clean","defect_types":["Temporal"]})");
  CHECK_THROWS_AS(read_dataset(bad), DatasetError);
  std::istringstream mixed(R"({"id":"r3","nl":"x","label":"vague","defect_types":["Referential"]})");
  CHECK_THROWS_AS(read_dataset(mixed), DatasetError);
  std::istringstream broken("{\"id\":");
  CHECK_THROWS_AS(read_dataset(broken), DatasetError);
}

TEST_CASE("validate_nl") {
  CHECK(validate_nl("During 10-150 seconds, if signal x1 exceeds 0.2, then signal x2 will decrease "
                    "for the next 30 seconds"));
  auto dangling = validate_nl("if speed > 50 then");
  CHECK_FALSE(dangling);
  REQUIRE(dangling.reasons.size() == 1);
  CHECK(dangling.reasons[0].find("dangling") != std::string::npos);
  CHECK_FALSE(validate_nl(""));
  CHECK_FALSE(validate_nl("   "));
  CHECK_FALSE(validate_nl(", x exceeds 3"));
  CHECK_FALSE(validate_nl("the quick brown fox"));
  CHECK_FALSE(validate_nl("x exceeds (3"));
  CHECK_FALSE(validate_nl("x exceeds \"3"));
  CHECK_FALSE(validate_nl("x exceeds  3"));
  CHECK_FALSE(validate_nl("x exceeds 3 and"));
  CHECK_FALSE(validate_nl("x exceeds 3,"));
  CHECK(validate_nl("[x] > 3."));
  CHECK(validate_nl("x stays below 3 or y is above 4."));
}

TEST_CASE("lexicon") {
  const auto lex = PhraseLexicon::defaults();
  lex.validate();
  for (const char* p : {"soon", "later", "in a moment", "within the next period of time"}) {
    CHECK(std::find(lex.temporal.begin(), lex.temporal.end(), p) != lex.temporal.end());
  }
  std::istringstream in("# custom\n[temporal]\n  eventually-ish \nsoonish\n\n[referential]\nthe former\n");
  auto custom = parse_lexicon(in);
  CHECK(custom.temporal == std::vector<std::string>{"eventually-ish", "soonish"});
  CHECK(custom.referential == std::vector<std::string>{"the former"});
  CHECK(custom.numerical == lex.numerical);

  std::istringstream clash("[temporal]\nsoon\n[numerical]\nsoon\n");
  CHECK_THROWS_AS(parse_lexicon(clash), DatasetError);
  std::istringstream empty("[temporal]\n[numerical]\nis high\n");
  CHECK_THROWS_AS(parse_lexicon(empty), DatasetError);
  std::istringstream unknown("[colors]\nred\n");
  CHECK_THROWS_AS(parse_lexicon(unknown), DatasetError);
  CHECK(is_downward_phrase("is low"));
  CHECK_FALSE(is_downward_phrase("is high"));
}

TEST_CASE("vagueness cues") {
  const auto lex = PhraseLexicon::defaults();
  CHECK(temporal_cue("the system responds soon", lex));
  CHECK(temporal_cue("x rises within a few seconds", lex));
  CHECK_FALSE(temporal_cue("x rises within 5 seconds", lex));
  CHECK(numerical_cue("speed is high", lex));
  CHECK(numerical_cue("signal x2 will decrease for the next 30 seconds", lex));
  CHECK_FALSE(numerical_cue("signal x2 will decrease 0.5 for the next 30 seconds", lex));
  CHECK(conditional_cue("speed > 50, brake activates", lex));
  CHECK_FALSE(conditional_cue("If speed > 50, brake activates", lex));
  CHECK_FALSE(conditional_cue("During 10-150 seconds, x1 exceeds 0.2", lex));
}

TEST_CASE("temporal mutation") {
  auto lex = PhraseLexicon::defaults();
  lex.temporal = {"within the next period of time"};
  auto r = clean("t1", "signal x stays above 3 for [0, 10] time units", "G[0,10](x > 3)");
  auto m = mutate_vagueness(r, DefectType::Temporal, lex, 1);
  CHECK(m.nl == "signal x stays above 3 within the next period of time");
  CHECK(m.label == Label::Vague);
  CHECK(m.defect_types == std::set<DefectType>{DefectType::Temporal});
  CHECK(m.parent_id == "t1");
  CHECK(m.id == "t1-temporal");
  CHECK(m.stl == r.stl);

  lex.temporal = {"soon"};
  auto example = clean("ex",
                     "During 10-150 seconds, if signal x1 exceeds 0.2, then signal x2 will decrease "
                     "for the next 30 seconds",
                    "F[10,150](x1 > 0.2) -> G[0,30](x2 < 0.5)");
  auto first = mutate_vagueness(example, DefectType::Temporal, lex, 0);
  auto second = mutate_vagueness(example, DefectType::Temporal, lex, 0);
  CHECK(first == second);
  const bool a = first.nl == "Soon, if signal x1 exceeds 0.2, then signal x2 will decrease for the next 30 seconds";
  const bool b = first.nl == "During 10-150 seconds, if signal x1 exceeds 0.2, then signal x2 will decrease soon";
  CHECK((a || b));

  CHECK_THROWS_AS(mutate_vagueness(clean("n", "x exceeds 3", "x > 3"), DefectType::Temporal, lex, 0),
                  MutationNotApplicable);
}

TEST_CASE("numerical mutation") {
  auto lex = PhraseLexicon::defaults();
  lex.numerical = {"is high", "is low"};
  auto m = mutate_vagueness(clean("n1", "speed exceeds 50", "speed > 50"), DefectType::Numerical, lex, 3);
  CHECK(m.nl == "speed is high");
  auto down = mutate_vagueness(clean("n2", "rpm should stay below 2700", "G[0,4](rpm < 2700)"),
                               DefectType::Numerical, lex, 3);
  CHECK(down.nl == "rpm is low");
  auto sym = mutate_vagueness(clean("n3", "x1 > 0.2 holds for 5 seconds", "G[0,5](x1 > 0.2)"),
                              DefectType::Numerical, lex, 3);
  CHECK(sym.nl == "x1 is high holds for 5 seconds");
  CHECK_THROWS_AS(
      mutate_vagueness(clean("n4", "speed exceeds 50", "speed > 60"), DefectType::Numerical, lex, 0),
      MutationNotApplicable);
}

TEST_CASE("conditional mutation") {
  const auto lex = PhraseLexicon::defaults();
  auto m = mutate_vagueness(clean("c1", "if speed > 50 then brake activates", "(speed > 50) -> (brake > 0)"),
                            DefectType::ConditionalLogic, lex, 0);
  CHECK(m.nl == "speed > 50, brake activates");
  auto cap = mutate_vagueness(
      clean("c2", "If the speed exceeds 50, the brake activates", "(speed > 50) -> (brake > 0)"),
      DefectType::ConditionalLogic, lex, 0);
  CHECK(cap.nl == "The speed exceeds 50, the brake activates");
  auto keep = mutate_vagueness(clean("c3", "If x1 exceeds 0.2 then x2 drops", "(x1 > 0.2) -> (x2 < 0)"),
                               DefectType::ConditionalLogic, lex, 0);
  CHECK(keep.nl == "x1 exceeds 0.2, x2 drops");
  CHECK_THROWS_AS(mutate_vagueness(clean("c4", "if speed > 50 then brake activates",
                                         "(speed > 50) & (brake > 0)"),
                                   DefectType::ConditionalLogic, lex, 0),
                  MutationNotApplicable);
}

TEST_CASE("stacked vagueness keeps the original parent") {
  const auto lex = PhraseLexicon::defaults();
  auto r = clean("s1", "If signal x exceeds 3, then signal y stays below 4 for the next 20 seconds",
                 "(x > 3) -> G[0,20](y < 4)");
  auto t = mutate_vagueness(r, DefectType::Temporal, lex, 7);
  auto tn = mutate_vagueness(t, DefectType::Numerical, lex, 7);
  CHECK(tn.defect_types == std::set<DefectType>{DefectType::Temporal, DefectType::Numerical});
  CHECK(tn.parent_id == "s1");
  CHECK(tn.id == "s1-temporal-numerical");
  CHECK_THROWS_AS(mutate_vagueness(tn, DefectType::Temporal, lex, 7), MutationNotApplicable);
  tn.validate();
}

TEST_CASE("referential mutation") {
  auto lex = PhraseLexicon::defaults();
  lex.referential = {"it"};
  auto m = mutate_ambiguity(clean("a1", "x1 exceeds 0.2 and x1 stays high",
                                  "(x1 > 0.2) & F[0,5](x1 > 0.9) & (x2 < 3)"),
                            DefectType::Referential, lex, nullptr, 0);
  CHECK(m.nl == "x1 exceeds 0.2 and it stays high");
  CHECK(m.label == Label::Ambiguous);
  CHECK(m.defect_types == std::set<DefectType>{DefectType::Referential});

  auto named = mutate_ambiguity(clean("a2", "signal x1 exceeds 0.2 and signal x1 drops below 3 while x2 is above 1",
                                      "(x1 > 0.2) & (x1 < 3) & (x2 > 1)"),
                                DefectType::Referential, lex, nullptr, 0);
  CHECK(named.nl == "signal x1 exceeds 0.2 and it drops below 3 while x2 is above 1");

  CHECK_THROWS_AS(mutate_ambiguity(clean("a3", "x1 exceeds 0.2 and x1 stays high", "(x1 > 0.2)"),
                                   DefectType::Referential, lex, nullptr, 0),
                  MutationNotApplicable);
}

TEST_CASE("semantic mutation uses the backend") {
  const auto lex = PhraseLexicon::defaults();
  auto r = clean("m1", "x2 should stay below 0.5 within 30 seconds after x1 exceeds 0.2",
                 "G[0,30](x2 < 0.5)");
  CHECK_THROWS_AS(mutate_ambiguity(r, DefectType::Semantic, lex, nullptr, 0), MutationModeError);

  llm::ScriptedFixture fx;
  fx.add("mutate_semantic", 0, "within the next 30 seconds, if x1 exceeds 0.2, then x2 should stay below 0.5\n");
  fx.add("mutate_semantic", 0, "within the next 30 seconds, the value should stay below 0.5");
  llm::ScriptedBackend backend(fx);
  auto m = mutate_ambiguity(r, DefectType::Semantic, lex, &backend, 0);
  CHECK(m.nl == "within the next 30 seconds, if x1 exceeds 0.2, then x2 should stay below 0.5");
  CHECK(m.defect_types == std::set<DefectType>{DefectType::Semantic});
  CHECK_THROWS_AS(mutate_ambiguity(r, DefectType::Semantic, lex, &backend, 0), MutationRejected);
}

TEST_CASE("build_dataset") {
  const auto lex = PhraseLexicon::defaults();
  auto corpus = testsupport::synthetic_corpus(5, 11);

  MutationPlan temporal;
  temporal.counts[DefectType::Temporal] = 2;
  temporal.seed = 1;
  auto built = build_dataset(corpus, temporal, lex);
  REQUIRE(built.records.size() == 7);
  CHECK(built.report.per_type.at("Temporal").applied == 2);
  CHECK_FALSE(built.report.partial);
  for (std::size_t i = 5; i < 7; ++i) {
    const auto& m = built.records[i];
    CHECK(m.label == Label::Vague);
    REQUIRE(m.parent_id.has_value());
    CHECK(std::any_of(corpus.begin(), corpus.end(), [&](const DatasetRecord& c) { return c.id == *m.parent_id; }));
  }

  auto unchanged = build_dataset(corpus, MutationPlan{}, lex);
  CHECK(unchanged.records == corpus);

  std::vector<DatasetRecord> single{clean("s0", "x exceeds 3 and x stays high", "x > 3"),
                                    clean("s1", "y is below 2", "y < 2")};
  MutationPlan refs;
  refs.counts[DefectType::Referential] = 3;
  auto none = build_dataset(single, refs, lex);
  CHECK(none.records.size() == 2);
  CHECK(none.report.per_type.at("Referential").applied == 0);
  CHECK(none.report.per_type.at("Referential").skipped == 3);
  CHECK(none.report.partial);

  MutationPlan semantic;
  semantic.counts[DefectType::Semantic] = 2;
  auto skipped = build_dataset(corpus, semantic, lex);
  CHECK(skipped.records.size() == 5);
  CHECK(skipped.report.per_type.at("Semantic").skipped == 2);
  semantic.mode = MutationMode::LlmAssisted;
  CHECK_THROWS_AS(build_dataset(corpus, semantic, lex), MutationModeError);

  auto dirty = corpus;
  dirty[0].stl = "G[5,2](x > 0)";
  CHECK_THROWS_AS(build_dataset(dirty, temporal, lex), DatasetError);
}

TEST_CASE("property: rule-only mutants are valid, linked and reproducible") {
  const auto lex = PhraseLexicon::defaults();
  auto corpus = testsupport::synthetic_corpus(120, 2024);
  MutationPlan plan;
  plan.seed = 9;
  plan.counts = {{DefectType::Temporal, 50},
                 {DefectType::Numerical, 50},
                 {DefectType::ConditionalLogic, 40},
                 {DefectType::Referential, 50}};
  plan.stacked = 10;
  auto a = build_dataset(corpus, plan, lex);
  auto b = build_dataset(corpus, plan, lex);
  CHECK(dump(a.records) == dump(b.records));
  CHECK(a.records.size() == corpus.size() + 200);
  CHECK_FALSE(a.report.partial);

  std::set<std::string> ids;
  for (const auto& r : a.records) CHECK(ids.insert(r.id).second);
  for (std::size_t i = corpus.size(); i < a.records.size(); ++i) {
    const auto& m = a.records[i];
    INFO(m.id << ": " << m.nl);
    m.validate();
    CHECK(validate_nl(m.nl));
    REQUIRE(m.parent_id.has_value());
    CHECK(ids.count(*m.parent_id) == 1);
    if (m.defect_types.count(DefectType::Temporal)) CHECK(temporal_cue(m.nl, lex));
    if (m.defect_types.count(DefectType::Numerical)) CHECK(numerical_cue(m.nl, lex));
    if (m.defect_types.count(DefectType::ConditionalLogic)) CHECK(conditional_cue(m.nl, lex));
  }
  for (const auto& c : corpus) {
    CHECK(validate_nl(c.nl));
    CHECK_FALSE(temporal_cue(c.nl, lex));
    CHECK_FALSE(numerical_cue(c.nl, lex));
    CHECK_FALSE(conditional_cue(c.nl, lex));
  }
}
