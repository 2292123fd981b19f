#include "cli.hpp"

#include <csignal>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clarifystl/clarification/server.hpp"
#include "clarifystl/clarification/session.hpp"
#include "clarifystl/dataset/mutation.hpp"
#include "clarifystl/detection/ambiguity_model.hpp"
#include "clarifystl/detection/detection.hpp"
#include "clarifystl/llm/embedding.hpp"
#include "clarifystl/llm/remote.hpp"
#include "clarifystl/llm/scripted.hpp"
#include "clarifystl/metrics/metrics.hpp"
#include "clarifystl/metrics/robustness.hpp"
#include "clarifystl/stl/monitor.hpp"
#include "clarifystl/stl/syntax.hpp"

#include <httplib.h>

namespace clarifystl::cli {

namespace {

using nlohmann::ordered_json;
namespace cl = clarification;
namespace det = detection;
using dataset::DefectType;

/// Reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
  std::istream& in;
  bool lines = false;
};

std::string fixed(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << std::fixed << v;
  return s.str();
}

std::string read_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  std::vector<std::string> out;
  for (std::string line; std::getline(f, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

dataset::PhraseLexicon lexicon_from(const std::string& path) {
  return path.empty() ? dataset::PhraseLexicon::defaults() : dataset::load_lexicon(path);
}

std::string types_text(const std::set<DefectType>& types) {
  std::string s;
  for (auto t : types) s += (s.empty() ? "" : ", ") + std::string(dataset::to_string(t));
  return s;
}

ordered_json types_json(const std::set<DefectType>& types) {
  ordered_json a = ordered_json::array();
  for (auto t : types) a.push_back(dataset::to_string(t));
  return a;
}

// Backend, detectors and model shared by detect, clarify and serve.
struct BackendOptions {
  std::string backend;
  std::string fixture;
  std::string lexicon;
  std::string model;
  std::string vagueness = "auto";
  std::string ambiguity = "auto";

  void add(CLI::App* app, bool detectors) {
    app->add_option("--backend", backend, "Completion backend: scripted or remote")
        ->check(CLI::IsMember({"scripted", "remote"}));
    app->add_option("--fixture", fixture, "Scripted reply fixture (JSON lines); implies --backend scripted");
    app->add_option("--lexicon", lexicon, "Phrase lexicon file");
    app->add_option("--model", model, "Trained ambiguity model (AMBM1 file)");
    if (detectors) {
      app->add_option("--vagueness-detector", vagueness, "auto, rule or llm")
          ->check(CLI::IsMember({"auto", "rule", "llm"}));
      app->add_option("--ambiguity-detector", ambiguity, "auto, model, rule or llm")
          ->check(CLI::IsMember({"auto", "model", "rule", "llm"}));
    }
  }

  std::string resolved_backend() const {
    if (!backend.empty()) {
      if (backend == "scripted" && fixture.empty()) throw UsageError("--backend scripted needs --fixture");
      return backend;
    }
    return fixture.empty() ? "" : "scripted";
  }

  std::string vagueness_kind() const {
    if (vagueness != "auto") return vagueness;
    return resolved_backend() == "scripted" ? "llm" : "rule";
  }

  std::string ambiguity_kind() const {
    if (ambiguity != "auto") return ambiguity;
    if (resolved_backend() == "scripted") return "llm";
    return model.empty() ? "rule" : "model";
  }
};

struct Collaborators {
  std::unique_ptr<llm::CompletionBackend> backend;
  std::unique_ptr<llm::HashEmbeddingProvider> embeddings;
  std::unique_ptr<det::Detector> vagueness;
  std::unique_ptr<det::Detector> ambiguity;
};

std::unique_ptr<llm::CompletionBackend> make_backend(const BackendOptions& o) {
  const std::string kind = o.resolved_backend();
  if (kind == "scripted") return std::make_unique<llm::ScriptedBackend>(llm::load_fixture(o.fixture));
  if (kind == "remote") {
    auto cfg = llm::RemoteConfig::from_environment();
    if (cfg.api_key.empty()) throw Error(std::string(llm::kApiKeyEnv) + " is not set");
    return std::make_unique<llm::RemoteBackend>(cfg);
  }
  return nullptr;
}

std::shared_ptr<Collaborators> make_collaborators(const BackendOptions& o, bool need_backend) {
  auto c = std::make_shared<Collaborators>();
  c->backend = make_backend(o);
  if (need_backend && !c->backend) throw UsageError("a backend is required: pass --fixture or --backend remote");
  const auto lex = lexicon_from(o.lexicon);

  const std::string vk = o.vagueness_kind();
  if (vk == "llm") {
    if (!c->backend) throw UsageError("--vagueness-detector llm needs --fixture or --backend remote");
    c->vagueness = std::make_unique<det::LlmVaguenessDetector>(*c->backend);
  } else {
    c->vagueness = std::make_unique<det::RuleVaguenessDetector>(lex);
  }

  const std::string ak = o.ambiguity_kind();
  if (ak == "llm") {
    if (!c->backend) throw UsageError("--ambiguity-detector llm needs --fixture or --backend remote");
    c->ambiguity = std::make_unique<det::LlmAmbiguityDetector>(*c->backend);
  } else if (ak == "model") {
    if (o.model.empty()) throw UsageError("--ambiguity-detector model needs --model");
    auto m = det::AmbiguityModel::load(std::filesystem::path(o.model));
    c->embeddings = std::make_unique<llm::HashEmbeddingProvider>(m.dims().input);
    c->ambiguity = std::make_unique<det::ClassifierAmbiguityDetector>(std::move(m), *c->embeddings);
  } else {
    c->ambiguity = std::make_unique<det::RuleAmbiguityDetector>(lex);
  }
  return c;
}

// parse / check / template / monitor

int cmd_parse(Io& io, const std::string& text) {
  const auto f = stl::parse(text);
  if (io.lines) {
    io.out << ordered_json{{"input", text}, {"stl", stl::render(f)}}.dump() << '\n';
  } else {
    io.out << stl::render(f) << '\n';
  }
  return 0;
}

int cmd_check(Io& io, const std::vector<std::string>& texts) {
  int status = 0;
  for (const auto& t : texts) {
    const auto diags = stl::check_syntax(t);
    if (!diags.empty()) status = 1;
    if (io.lines) {
      ordered_json d = ordered_json::array();
      for (const auto& x : diags) d.push_back({{"position", x.position}, {"message", x.message}});
      io.out << ordered_json{{"input", t}, {"ok", diags.empty()}, {"diagnostics", d}}.dump() << '\n';
    } else if (diags.empty()) {
      io.out << "ok: " << t << '\n';
    } else {
      for (const auto& x : diags) io.out << "error at " << x.position << ": " << x.message << '\n';
    }
  }
  return status;
}

int cmd_template(Io& io, const std::string& text) {
  const std::string t = stl::extract_template(stl::parse(text)).text();
  if (io.lines) {
    io.out << ordered_json{{"input", text}, {"template", t}}.dump() << '\n';
  } else {
    io.out << t << '\n';
  }
  return 0;
}

int cmd_monitor(Io& io, const std::string& text, const std::string& trace_path, double t) {
  const auto f = stl::parse(text);
  const auto trace = metrics::trace_from_json(nlohmann::json::parse(read_text(trace_path)));
  const bool v = stl::evaluate(f, trace, t);
  if (io.lines) {
    io.out << ordered_json{{"stl", stl::render(f)}, {"time", t}, {"verdict", v}}.dump() << '\n';
  } else {
    io.out << (v ? "satisfied" : "violated") << '\n';
  }
  return 0;
}

// mutate

struct MutateOptions {
  std::string input, output, mode = "rule";
  std::size_t temporal = 0, numerical = 0, conditional = 0, referential = 0, semantic = 0, stacked = 0;
  std::uint64_t seed = 0;
  BackendOptions backend;
};

int cmd_mutate(Io& io, const MutateOptions& o) {
  const auto corpus = dataset::load_dataset(o.input);
  dataset::MutationPlan plan;
  plan.seed = o.seed;
  plan.stacked = o.stacked;
  plan.mode = o.mode == "llm" ? dataset::MutationMode::LlmAssisted : dataset::MutationMode::RuleOnly;
  auto put = [&](DefectType t, std::size_t n) {
    if (n > 0) plan.counts[t] = n;
  };
  put(DefectType::Temporal, o.temporal);
  put(DefectType::Numerical, o.numerical);
  put(DefectType::ConditionalLogic, o.conditional);
  put(DefectType::Referential, o.referential);
  put(DefectType::Semantic, o.semantic);
  auto backend = plan.mode == dataset::MutationMode::LlmAssisted ? make_backend(o.backend) : nullptr;
  const auto built = dataset::build_dataset(corpus, plan, lexicon_from(o.backend.lexicon), backend.get());
  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw Error("cannot write " + o.output);
  dataset::write_dataset(out, built.records);
  const auto report = built.report.to_json();
  if (io.lines) {
    io.out << report.dump() << '\n';
  } else {
    io.out << "wrote " << built.records.size() << " records (" << built.records.size() - corpus.size()
           << " mutants) to " << o.output << '\n';
    for (const auto& [type, r] : built.report.per_type) {
      io.out << type << ": requested " << r.requested << ", applied " << r.applied << ", skipped " << r.skipped
             << (r.note.empty() ? "" : " (" + r.note + ")") << '\n';
    }
  }
  return 0;
}

// train-ambiguity

struct TrainOptions {
  std::string input, output;
  det::TrainingConfig config;
  int dim = static_cast<int>(llm::HashEmbeddingProvider::kDefaultDimension);
};

int cmd_train(Io& io, const TrainOptions& o) {
  const auto records = dataset::load_dataset(o.input);
  std::vector<std::pair<std::string, int>> examples;
  for (const auto& r : records) examples.emplace_back(r.nl, r.label == dataset::Label::Ambiguous ? 1 : 0);
  llm::HashEmbeddingProvider provider(o.dim);
  const auto result = det::train_ambiguity_model(examples, provider, o.config);
  result.model.save(std::filesystem::path(o.output));
  const auto& log = result.log;
  if (io.lines) {
    if (log.initial_triplet) io.out << ordered_json{{"epoch", 0}, {"triplet", *log.initial_triplet}}.dump() << '\n';
    for (std::size_t e = 0; e < log.epochs.size(); ++e) {
      io.out << ordered_json{{"epoch", e + 1},
                             {"triplet", log.epochs[e].triplet},
                             {"cross_entropy", log.epochs[e].cross_entropy},
                             {"total", log.epochs[e].total}}
                    .dump()
             << '\n';
    }
  } else {
    if (log.initial_triplet) io.out << "initial triplet loss " << fixed(*log.initial_triplet) << '\n';
    for (std::size_t e = 0; e < log.epochs.size(); ++e) {
      io.out << "epoch " << e + 1 << ": triplet " << fixed(log.epochs[e].triplet) << ", cross-entropy "
             << fixed(log.epochs[e].cross_entropy) << '\n';
    }
    io.out << "saved model to " << o.output << '\n';
  }
  return 0;
}

// detect

struct DetectOptions {
  std::string kind = "vagueness";
  std::string text;
  std::string input;
  BackendOptions backend;
};

int cmd_detect(Io& io, const DetectOptions& o) {
  BackendOptions b = o.backend;
  if (o.kind == "vagueness") b.ambiguity = "rule";
  if (o.kind == "ambiguity") b.vagueness = "rule";
  auto c = make_collaborators(b, false);
  det::Detector& d = o.kind == "vagueness" ? *c->vagueness : *c->ambiguity;

  if (!o.input.empty()) {
    const auto records = dataset::load_dataset(o.input);
    const auto positive = o.kind == "vagueness" ? dataset::Label::Vague : dataset::Label::Ambiguous;
    std::vector<int> pred, gold;
    for (const auto& r : records) {
      pred.push_back(d.detect(r.nl, 0).is_defective ? 1 : 0);
      gold.push_back(r.label == positive ? 1 : 0);
    }
    const auto m = metrics::classification_metrics(pred, gold);
    if (io.lines) {
      io.out << ordered_json{{"records", records.size()}, {"accuracy", m.accuracy}, {"precision", m.precision},
                             {"recall", m.recall}, {"f1", m.f1}}
                    .dump()
             << '\n';
    } else {
      io.out << "records: " << records.size() << "\naccuracy: " << fixed(m.accuracy) << "\nprecision: "
             << fixed(m.precision) << "\nrecall: " << fixed(m.recall) << "\nf1: " << fixed(m.f1) << '\n';
    }
    return 0;
  }
  if (o.text.empty()) throw UsageError("detect needs a requirement or --input");
  const auto r = d.detect(o.text, 0);
  if (io.lines) {
    ordered_json j{{"requirement", o.text}, {"defective", r.is_defective}, {"types", types_json(r.types)},
                   {"confidence", r.confidence}};
    j["rationale"] = r.rationale ? ordered_json(*r.rationale) : ordered_json(nullptr);
    io.out << j.dump() << '\n';
  } else if (r.is_defective) {
    io.out << (o.kind == "vagueness" ? "vague" : "ambiguous") << ": " << types_text(r.types) << '\n';
  } else {
    io.out << (o.kind == "vagueness" ? "no vagueness detected" : "no ambiguity detected") << '\n';
  }
  return 0;
}

// evaluate

struct EvaluateOptions {
  std::string input;
  std::size_t traces = 20;
  std::uint64_t seed = 0;
};

int cmd_evaluate(Io& io, const EvaluateOptions& o) {
  std::ifstream f(o.input);
  if (!f) throw Error("cannot open " + o.input);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t lineno = 0;
  for (std::string line; std::getline(f, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    }
    const char* gen_key = j.contains("generated") ? "generated" : "prediction";
    if (!j.contains(gen_key) || !j[gen_key].is_string() || !j.contains("reference") || !j["reference"].is_string()) {
      throw Error("line " + std::to_string(lineno) + ": needs string fields 'generated' and 'reference'");
    }
    pairs.emplace_back(j[gen_key].get<std::string>(), j["reference"].get<std::string>());
  }
  if (pairs.empty()) throw Error("no prediction/reference pairs in " + o.input);

  llm::HashEmbeddingProvider provider;
  double fa = 0, ta = 0, bl = 0, rl = 0, bs = 0, sr = 0;
  std::size_t sr_n = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [gen, ref] = pairs[i];
    fa += metrics::formula_accuracy(gen, ref);
    ta += metrics::template_accuracy(gen, ref);
    bl += metrics::bleu(std::string_view(gen), std::string_view(ref));
    rl += metrics::rouge_l(gen, ref);
    bs += metrics::bert_style_score(gen, ref, provider);
    try {
      metrics::TraceGenerationConfig tc;
      tc.count = o.traces;
      tc.seed = o.seed + i;
      const auto traces = metrics::generate_traces(stl::parse(ref), tc);
      sr += metrics::semantic_robustness(gen, ref, traces).score;
      ++sr_n;
    } catch (const metrics::TraceBudgetExhausted& e) {
      io.err << "pair " << i + 1 << ": semantic robustness skipped: " << e.what() << '\n';
    }
  }
  const double n = static_cast<double>(pairs.size());
  const std::vector<std::pair<const char*, double>> rows{
      {"formula_accuracy", fa / n}, {"template_accuracy", ta / n}, {"bleu", bl / n},
      {"rouge_l", rl / n},          {"bert_style_score", bs / n},
      {"semantic_robustness", sr_n == 0 ? 0.0 : sr / static_cast<double>(sr_n)}};
  if (io.lines) {
    for (const auto& [k, v] : rows) io.out << ordered_json{{"metric", k}, {"value", v}, {"pairs", pairs.size()}}.dump() << '\n';
  } else {
    io.out << "pairs: " << pairs.size() << '\n';
    for (const auto& [k, v] : rows) io.out << k << ": " << fixed(v) << '\n';
  }
  return 0;
}

// clarify

struct ClarifyOptions {
  std::string requirement;
  std::string answers;
  std::string transcript;
  cl::SessionConfig session;
  BackendOptions backend;
};

int cmd_clarify(Io& io, const ClarifyOptions& o) {
  auto c = make_collaborators(o.backend, true);
  cl::AnswerSource source;
  if (!o.answers.empty()) {
    auto list = std::make_shared<std::vector<std::string>>(read_lines(o.answers));
    auto next = std::make_shared<std::size_t>(0);
    source = [list, next, &io](const cl::ClarificationQuery& q) -> std::optional<std::string> {
      if (*next >= list->size()) return std::nullopt;
      const std::string a = (*list)[(*next)++];
      if (!io.lines) io.out << "[" << cl::to_string(q.stage) << "] " << q.text << "\n> " << a << '\n';
      return a;
    };
  } else {
    source = [&io](const cl::ClarificationQuery& q) -> std::optional<std::string> {
      io.out << "[" << cl::to_string(q.stage) << "] " << q.text << "\n> " << std::flush;
      std::string a;
      if (!std::getline(io.in, a)) return std::nullopt;
      return a;
    };
  }
  const auto outcome = cl::run_session(cl::Requirement::make("cli", o.requirement),
                                       {*c->vagueness, *c->ambiguity, *c->backend}, source, o.session);
  if (!o.transcript.empty()) {
    std::ofstream t(o.transcript, std::ios::binary);
    if (!t) throw Error("cannot write " + o.transcript);
    cl::write_transcript(t, outcome.transcript);
  }
  if (io.lines) {
    ordered_json j{{"phase", cl::to_string(outcome.phase)},
                   {"rounds", outcome.requirement.revisions.size()},
                   {"final_requirement", outcome.requirement.text()}};
    j["stl"] = outcome.formula ? ordered_json(stl::render(*outcome.formula)) : ordered_json(nullptr);
    j["error"] = outcome.error ? ordered_json(*outcome.error) : ordered_json(nullptr);
    io.out << j.dump() << '\n';
  }
  if (outcome.phase != cl::Phase::Done) {
    io.err << "error: session aborted: " << outcome.error.value_or("unknown reason") << '\n';
    return 1;
  }
  if (!io.lines) {
    io.out << "rounds: " << outcome.requirement.revisions.size() << '\n'
           << "requirement: " << outcome.requirement.text() << '\n'
           << "stl: " << stl::render(*outcome.formula) << '\n';
  }
  return 0;
}

// serve

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server != nullptr) g_server->stop();
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  cl::SessionConfig session;
  BackendOptions backend;
};

int cmd_serve(Io& io, const ServeOptions& o) {
  make_collaborators(o.backend, true);  // fail fast on bad options
  cl::SessionRegistry registry([o](cl::Requirement r) {
    auto c = make_collaborators(o.backend, true);
    cl::HostedSession h;
    h.session = std::make_unique<cl::Session>(std::move(r), cl::SessionDeps{*c->vagueness, *c->ambiguity, *c->backend},
                                              o.session);
    h.owned = c;
    return h;
  });
  httplib::Server server;
  cl::install_routes(server, registry);
  if (!server.bind_to_port(o.host, o.port)) throw Error("cannot listen on " + o.host + ":" + std::to_string(o.port));
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  io.out << "listening on http://" << o.host << ":" << o.port << std::endl;
  server.listen_after_bind();
  g_server = nullptr;
  return 0;
}

void add_session_options(CLI::App* app, cl::SessionConfig& cfg) {
  app->add_option("--max-iterations", cfg.max_iterations_per_phase, "Clarification rounds allowed per stage")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--candidates", cfg.candidate_n, "Candidate formulas sampled per ambiguity round")
      ->check(CLI::PositiveNumber);
  app->add_option("--temperature", cfg.sampling_temperature, "Candidate sampling temperature")
      ->check(CLI::Range(0.0, 2.0));
  app->add_flag("--llm-back-translation", cfg.llm_back_translation, "Describe candidates with the backend");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Requirement clarification and Signal Temporal Logic toolkit", "clarifystl"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  app.add_option("--format", format, "Output format: text or lines")->check(CLI::IsMember({"text", "lines"}));

  std::string formula_text;
  auto* parse = app.add_subcommand("parse", "Parse a formula and print its canonical form");
  parse->add_option("formula", formula_text, "STL formula")->required();

  std::vector<std::string> check_texts;
  auto* check = app.add_subcommand("check", "Syntax-check formulas");
  check->add_option("formulas", check_texts, "STL formulas")->required();

  auto* templ = app.add_subcommand("template", "Print the formula template");
  templ->add_option("formula", formula_text, "STL formula")->required();

  std::string trace_path;
  double at = 0.0;
  auto* monitor = app.add_subcommand("monitor", "Evaluate a formula on a trace file");
  monitor->add_option("formula", formula_text, "STL formula")->required();
  monitor->add_option("--trace", trace_path, "Trace JSON file")->required();
  monitor->add_option("--time", at, "Evaluation time");

  MutateOptions mo;
  auto* mutate = app.add_subcommand("mutate", "Build a mutated dataset from a clean corpus");
  mutate->add_option("--input,-i", mo.input, "Clean corpus (JSON lines)")->required();
  mutate->add_option("--output,-o", mo.output, "Output dataset (JSON lines)")->required();
  mutate->add_option("--temporal", mo.temporal);
  mutate->add_option("--numerical", mo.numerical);
  mutate->add_option("--conditional", mo.conditional);
  mutate->add_option("--referential", mo.referential);
  mutate->add_option("--semantic", mo.semantic);
  mutate->add_option("--stacked", mo.stacked);
  mutate->add_option("--seed", mo.seed);
  mutate->add_option("--mode", mo.mode, "rule or llm")->check(CLI::IsMember({"rule", "llm"}));
  mo.backend.add(mutate, false);

  TrainOptions to;
  auto* train = app.add_subcommand("train-ambiguity", "Train the ambiguity classifier");
  train->add_option("--input,-i", to.input, "Labelled dataset (JSON lines)")->required();
  train->add_option("--output,-o", to.output, "Model file")->required();
  train->add_option("--epochs", to.config.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--batch", to.config.batch)->check(CLI::PositiveNumber);
  train->add_option("--lr", to.config.lr)->check(CLI::PositiveNumber);
  train->add_option("--margin", to.config.margin)->check(CLI::PositiveNumber);
  train->add_option("--dropout", to.config.dropout)->check(CLI::Range(0.0, 0.99));
  train->add_option("--seed", to.config.seed);
  train->add_option("--dim", to.dim, "Hash embedding dimension")->check(CLI::Range(4, 1 << 16));

  DetectOptions dopt;
  auto* detect = app.add_subcommand("detect", "Run a detector on a requirement or a labelled dataset");
  detect->add_option("requirement", dopt.text, "Requirement text");
  detect->add_option("--kind", dopt.kind, "vagueness or ambiguity")->check(CLI::IsMember({"vagueness", "ambiguity"}));
  detect->add_option("--input,-i", dopt.input, "Labelled dataset to score");
  dopt.backend.add(detect, true);

  EvaluateOptions eo;
  auto* evaluate = app.add_subcommand("evaluate", "Score generated formulas against references");
  evaluate->add_option("--input,-i", eo.input, "JSON lines with 'generated' and 'reference'")->required();
  evaluate->add_option("--traces", eo.traces, "Traces per pair for semantic robustness")->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", eo.seed);

  ClarifyOptions co;
  auto* clarify = app.add_subcommand("clarify", "Run a clarification session");
  clarify->add_option("requirement", co.requirement, "Requirement text")->required();
  clarify->add_option("--answers", co.answers, "File with one answer per line (default: ask on the terminal)");
  clarify->add_option("--transcript", co.transcript, "Write the session transcript (JSON lines)");
  add_session_options(clarify, co.session);
  co.backend.add(clarify, true);

  ServeOptions so;
  auto* serve = app.add_subcommand("serve", "Host the session HTTP API");
  serve->add_option("--port", so.port)->check(CLI::Range(1, 65535));
  serve->add_option("--host", so.host);
  add_session_options(serve, so.session);
  so.backend.add(serve, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  Io io{out, err, in, format == "lines"};
  try {
    if (parse->parsed()) return cmd_parse(io, formula_text);
    if (check->parsed()) return cmd_check(io, check_texts);
    if (templ->parsed()) return cmd_template(io, formula_text);
    if (monitor->parsed()) return cmd_monitor(io, formula_text, trace_path, at);
    if (mutate->parsed()) return cmd_mutate(io, mo);
    if (train->parsed()) return cmd_train(io, to);
    if (detect->parsed()) return cmd_detect(io, dopt);
    if (evaluate->parsed()) return cmd_evaluate(io, eo);
    if (clarify->parsed()) return cmd_clarify(io, co);
    if (serve->parsed()) return cmd_serve(io, so);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "error: no command\n";
  return 2;
}

} // namespace clarifystl::cli
