#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "clarifystl/dataset/record.hpp"
#include "clarifystl/llm/remote.hpp"
#include "clarifystl/metrics/robustness.hpp"
#include "clarifystl/stl/trace.hpp"
#include "support/corpus.hpp"

namespace fs = std::filesystem;
using namespace clarifystl;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "clarifystl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  std::istringstream in(input);
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err, in);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("clarifystl-cli-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

const std::string kFixture = CLARIFYSTL_FIXTURE_DIR "/running_example.fixture";
const std::string kAnswers = CLARIFYSTL_FIXTURE_DIR "/running_example.answers";
const std::string kExample =
    "During 10-150 seconds, if signal x1 exceeds 0.2, then signal x2 will decrease for the next 30 seconds";

} // namespace

TEST_CASE("parse, check and template") {
  auto ok = run({"parse", "G[0,12]((speed > 45) -> F[1,4](rpm < 2700))"});
  CHECK(ok.code == 0);
  CHECK(ok.out == "G[0,12](speed > 45 -> F[1,4](rpm < 2700))\n");

  auto bad = run({"parse", "G[5,2](x>0)"});
  CHECK(bad.code == 1);
  CHECK(bad.out.empty());
  CHECK(bad.err.find("interval") != std::string::npos);

  auto lines = run({"--format", "lines", "parse", "x > 1"});
  CHECK(lines.out == "{\"input\":\"x > 1\",\"stl\":\"x > 1\"}\n");
  auto after = run({"parse", "x > 1", "--format", "lines"});
  CHECK(after.out == lines.out);

  CHECK(run({"check", "x > 1", "F[0,1](y < 2)"}).code == 0);
  auto chk = run({"check", "x > 1", "G[1](x"});
  CHECK(chk.code == 1);
  CHECK(chk.out.find("error at") != std::string::npos);

  CHECK(run({"template", "G[0,12](speed > 45)"}).out == "G[NUM,NUM](SIG > NUM)\n");
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"parse"}).code == 2);
  auto unknown = run({"parse", "--bogus", "x > 1"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--format", "xml", "parse", "x > 1"}).code == 2);
  CHECK(run({"clarify", kExample}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("monitor") {
  TempDir tmp;
  const auto trace = stl::Trace({"x"}, {0.0, 2.0, 5.0}, (Eigen::MatrixXd(1, 2) << 0.0, 3.0).finished());
  {
    std::ofstream f(tmp / "trace.json");
    f << metrics::trace_to_json(trace).dump();
  }
  CHECK(run({"monitor", "F[0,3](x > 1)", "--trace", tmp / "trace.json"}).out == "satisfied\n");
  CHECK(run({"monitor", "G[0,3](x > 1)", "--trace", tmp / "trace.json"}).out == "violated\n");
  CHECK(run({"monitor", "x > 1", "--trace", tmp / "trace.json", "--time", "2"}).out == "satisfied\n");
  auto lines = run({"--format", "lines", "monitor", "x > 1", "--trace", tmp / "trace.json"});
  CHECK(nlohmann::json::parse(lines.out)["verdict"] == false);
  CHECK(run({"monitor", "x > 1", "--trace", tmp / "missing.json"}).code == 1);
}

TEST_CASE("clarify the running example offline") {
  TempDir tmp;
  const auto before = llm::network_request_count();
  auto r = run({"clarify", "--fixture", kFixture, "--answers", kAnswers, kExample, "--transcript", tmp / "t.jsonl"});
  CHECK(r.code == 0);
  CHECK(r.out.find("stl: F[10,150](x1 > 0.2) -> G[0,30](x2 < 0.5)\n") != std::string::npos);
  CHECK(r.out.find("rounds: 2\n") != std::string::npos);
  CHECK(llm::network_request_count() == before);

  std::istringstream t(slurp(tmp / "t.jsonl"));
  std::size_t events = 0;
  for (std::string line; std::getline(t, line); ++events) {
    auto j = nlohmann::json::parse(line);
    CHECK(j["seq"] == events);
  }
  CHECK(events > 10);

  auto lines = run({"--format", "lines", "clarify", "--fixture", kFixture, "--answers", kAnswers, kExample});
  auto j = nlohmann::json::parse(lines.out);
  CHECK(j["phase"] == "Done");
  CHECK(j["rounds"] == 2);
  CHECK(j["stl"] == "F[10,150](x1 > 0.2) -> G[0,30](x2 < 0.5)");

  auto interactive = run({"clarify", "--fixture", kFixture, kExample}, "0.5\nthe first time\n");
  CHECK(interactive.code == 0);
  CHECK(interactive.out.find("[Vagueness] What specific value should signal x2 decrease?") != std::string::npos);

  auto short_answers = run({"clarify", "--fixture", kFixture, kExample}, "0.5\n");
  CHECK(short_answers.code == 1);
  CHECK(short_answers.err.find("aborted") != std::string::npos);
}

TEST_CASE("mutate is byte-reproducible") {
  TempDir tmp;
  {
    std::ofstream f(tmp / "corpus.jsonl");
    dataset::write_dataset(f, testsupport::synthetic_corpus(40, 3));
  }
  const std::vector<std::string> args{"mutate", "-i", tmp / "corpus.jsonl", "--temporal", "10", "--numerical", "10",
                                      "--conditional", "5", "--referential", "5", "--semantic", "3", "--seed", "9"};
  auto a = args, b = args;
  a.insert(a.end(), {"-o", tmp / "a.jsonl"});
  b.insert(b.end(), {"-o", tmp / "b.jsonl"});
  auto ra = run(a);
  CHECK(ra.code == 0);
  CHECK(ra.out.find("Semantic") != std::string::npos);
  CHECK(run(b).code == 0);
  CHECK(slurp(tmp / "a.jsonl") == slurp(tmp / "b.jsonl"));
  CHECK(dataset::load_dataset(tmp / "a.jsonl").size() > 40);

  auto rep = run({"--format", "lines", "mutate", "-i", tmp / "corpus.jsonl", "-o", tmp / "c.jsonl", "--temporal", "2"});
  CHECK(nlohmann::json::parse(rep.out).contains("types"));
  CHECK(run({"mutate", "-i", tmp / "nope.jsonl", "-o", tmp / "d.jsonl"}).code == 1);
}

TEST_CASE("train-ambiguity, detect and evaluate") {
  TempDir tmp;
  {
    std::ofstream c(tmp / "corpus.jsonl");
    dataset::write_dataset(c, testsupport::synthetic_corpus(60, 11));
  }
  REQUIRE(run({"mutate", "-i", tmp / "corpus.jsonl", "-o", tmp / "data.jsonl", "--referential", "40", "--temporal",
               "20", "--seed", "2"})
              .code == 0);
  const std::vector<std::string> train{"train-ambiguity", "-i", tmp / "data.jsonl", "--epochs", "3", "--lr", "0.01",
                                       "--dim", "64", "--seed", "4"};
  auto a = train, b = train;
  a.insert(a.end(), {"-o", tmp / "a.ambm"});
  b.insert(b.end(), {"-o", tmp / "b.ambm"});
  auto ta = run(a);
  CHECK(ta.code == 0);
  CHECK(ta.out.find("epoch 3") != std::string::npos);
  CHECK(run(b).code == 0);
  CHECK(slurp(tmp / "a.ambm") == slurp(tmp / "b.ambm"));
  CHECK(slurp(tmp / "a.ambm").substr(0, 5) == "AMBM1");

  auto dm = run({"--format", "lines", "detect", "--kind", "ambiguity", "--model", tmp / "a.ambm", "x1 exceeds 2 and it stays high"});
  CHECK(dm.code == 0);
  auto dj = nlohmann::json::parse(dm.out);
  CHECK(dj["confidence"].get<double>() >= 0.0);
  CHECK(dj["confidence"].get<double>() <= 1.0);

  auto dv = run({"detect", "the system responds soon"});
  CHECK(dv.out == "vague: Temporal\n");
  CHECK(run({"detect", "If speed exceeds 50 then the brake activates within 2 seconds"}).out ==
        "no vagueness detected\n");
  auto batch = run({"detect", "--input", tmp / "data.jsonl"});
  CHECK(batch.out.find("recall: 1.000000") != std::string::npos);
  CHECK(run({"detect", "--kind", "ambiguity", "--ambiguity-detector", "model", "x"}).code == 2);

  {
    std::ofstream p(tmp / "pairs.jsonl");
    p << R"j({"generated": "G[0,5](x > 1)", "reference": "G[0,5](x > 1)"})j" << '\n';
    p << R"j({"prediction": "F[0,5](x > 1)", "reference": "G[0,5](x > 1)"})j" << '\n';
  }
  auto ev = run({"--format", "lines", "evaluate", "-i", tmp / "pairs.jsonl", "--seed", "1"});
  CHECK(ev.code == 0);
  std::map<std::string, double> m;
  std::istringstream lines(ev.out);
  for (std::string line; std::getline(lines, line);) {
    auto j = nlohmann::json::parse(line);
    m[j["metric"]] = j["value"];
  }
  CHECK(m.size() == 6);
  CHECK(m["template_accuracy"] < 1.0);
  CHECK(m["semantic_robustness"] > 50.0);
  CHECK(m["semantic_robustness"] < 100.0);
  {
    std::ofstream p(tmp / "bad.jsonl");
    p << "{\"generated\": 1}\n";
  }
  CHECK(run({"evaluate", "-i", tmp / "bad.jsonl"}).code == 1);
}
