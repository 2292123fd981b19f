#include "clarifystl/clarification/session.hpp"

#include <memory>

#include "clarifystl/stl/syntax.hpp"

namespace clarifystl::clarification {

using nlohmann::ordered_json;

class Session::Recorder : public llm::CompletionBackend {
 public:
  Recorder(Session& owner, llm::CompletionBackend& inner) : owner_(owner), inner_(inner) {}

  std::string complete(const llm::CompletionRequest& request) override {
    ordered_json messages = ordered_json::array();
    for (const auto& m : request.messages) {
      messages.push_back({{"role", llm::to_string(m.role)}, {"content", m.content}});
    }
    owner_.log("prompt", {{"tag", request.operation_tag},
                          {"round", request.round},
                          {"temperature", request.temperature},
                          {"messages", std::move(messages)}});
    std::string reply = inner_.complete(request);
    owner_.log("reply", {{"tag", request.operation_tag}, {"round", request.round}, {"text", reply}});
    return reply;
  }

 private:
  Session& owner_;
  llm::CompletionBackend& inner_;
};

namespace {

ordered_json query_json(const ClarificationQuery& q) {
  ordered_json j{{"stage", to_string(q.stage)}, {"text", q.text}};
  j["defect_type"] = q.defect ? ordered_json(dataset::to_string(*q.defect)) : ordered_json(nullptr);
  j["divergence_point"] = q.divergence_point ? ordered_json(*q.divergence_point) : ordered_json(nullptr);
  return j;
}

ordered_json detection_json(const char* detector, const detection::DetectionResult& r) {
  ordered_json types = ordered_json::array();
  for (auto t : r.types) types.push_back(dataset::to_string(t));
  ordered_json j{{"detector", detector}, {"defective", r.is_defective}, {"types", types},
                 {"confidence", r.confidence}};
  if (r.rationale) j["rationale"] = *r.rationale;
  return j;
}

} // namespace

const char* to_string(Phase p) {
  switch (p) {
    case Phase::VaguenessLoop: return "VaguenessLoop";
    case Phase::AmbiguityLoop: return "AmbiguityLoop";
    case Phase::Transforming: return "Transforming";
    case Phase::Done: return "Done";
    case Phase::Aborted: return "Aborted";
  }
  return "?";
}

ordered_json to_json(const TranscriptEvent& e) {
  return {{"seq", e.seq}, {"phase", to_string(e.phase)}, {"kind", e.kind}, {"payload", e.payload}};
}

void write_transcript(std::ostream& out, const std::vector<TranscriptEvent>& events) {
  for (const auto& e : events) out << to_json(e).dump() << '\n';
}

Session::Session(Requirement initial, SessionDeps deps, SessionConfig config)
    : deps_(deps), config_(config), requirement_(std::move(initial)) {
  if (config_.max_iterations_per_phase < 0) throw ClarificationError("iteration cap must be non-negative");
  if (config_.candidate_n == 0) throw ClarificationError("candidate count must be at least 1");
  requirement_.validate();
  recorder_ = std::make_unique<Recorder>(*this, deps_.backend);
  log("phase", {{"to", to_string(phase_)}, {"requirement", requirement_.text()}});
}

Session::~Session() = default;

void Session::log(std::string kind, ordered_json payload) {
  transcript_.push_back(TranscriptEvent{transcript_.size(), phase_, std::move(kind), std::move(payload)});
}

void Session::enter(Phase p) {
  phase_ = p;
  log("phase", {{"to", to_string(p)}});
}

void Session::abort(const std::string& why) {
  pending_.reset();
  error_ = why;
  log("error", {{"message", why}});
  enter(Phase::Aborted);
}

void Session::issue(ClarificationQuery q) {
  (q.stage == Stage::Vagueness ? vague_iters_ : ambig_iters_) += 1;
  log("query", query_json(q));
  pending_ = std::move(q);
}

void Session::advance() {
  while (!pending_ && !finished()) {
    try {
      step();
    } catch (const std::exception& e) {
      abort(e.what());
    }
  }
}

void Session::step() {
  const int cap = config_.max_iterations_per_phase;
  switch (phase_) {
    case Phase::VaguenessLoop: {
      const auto det = deps_.vagueness.detect(requirement_.text(), requirement_.round());
      log("detection", detection_json("vagueness", det));
      if (!det.is_defective) return enter(Phase::AmbiguityLoop);
      if (vague_iters_ >= cap) {
        return abort("vagueness stage exceeded " + std::to_string(cap) + " clarification rounds");
      }
      std::optional<DefectType> vtype;
      for (auto t : det.types) {
        if (dataset::is_vagueness(t)) {
          vtype = t;
          break;
        }
      }
      auto q = generate_vagueness_query(requirement_, vtype.value_or(DefectType::Temporal), *recorder_);
      if (!q) {
        log("escape", {{"stage", "Vagueness"}});
        return enter(Phase::AmbiguityLoop);
      }
      return issue(std::move(*q));
    }
    case Phase::AmbiguityLoop: {
      const auto det = deps_.ambiguity.detect(requirement_.text(), requirement_.round());
      log("detection", detection_json("ambiguity", det));
      if (!det.is_defective) return enter(Phase::Transforming);
      if (ambig_iters_ >= cap) {
        return abort("ambiguity stage exceeded " + std::to_string(cap) + " clarification rounds");
      }
      auto cands = sample_candidates(requirement_, config_.candidate_n, *recorder_, config_.sampling_temperature);
      for (const auto& f : cands.formulas) {
        cands.descriptions.push_back(config_.llm_back_translation
                                         ? back_translate(f, *recorder_, requirement_.round())
                                         : back_translate(f));
      }
      ordered_json formulas = ordered_json::array();
      for (const auto& f : cands.formulas) formulas.push_back(stl::render(f));
      log("candidates", {{"formulas", formulas}, {"descriptions", cands.descriptions}});
      const auto report = analyze_discrepancies(requirement_, cands.descriptions, *recorder_);
      ordered_json points = ordered_json::array();
      for (const auto& p : report.divergence_points) {
        points.push_back({{"aspect", p.aspect}, {"interpretations", p.interpretations}});
      }
      log("report", {{"divergence_points", points}});
      if (report.empty()) return enter(Phase::Transforming);
      auto q = generate_ambiguity_query(requirement_, report, *recorder_);
      if (!q) {
        log("escape", {{"stage", "Ambiguity"}});
        return enter(Phase::Transforming);
      }
      return issue(std::move(*q));
    }
    case Phase::Transforming: {
      formula_ = transform_to_stl(requirement_, *recorder_);
      log("formula", {{"stl", stl::render(*formula_)}});
      return enter(Phase::Done);
    }
    case Phase::Done:
    case Phase::Aborted:
      return;
  }
}

void Session::answer(const std::string& text) {
  if (!pending_) throw NoPendingQuery("no query is pending");
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ClarificationError("answer is empty");
  log("answer", {{"text", text}});
  const ClarificationQuery q = *pending_;
  try {
    requirement_ = refine_requirement(requirement_, q, text, *recorder_);
  } catch (const UnusableAnswer& e) {
    log("restate", {{"message", e.what()}});
    pending_.reset();
    if (iterations(q.stage) >= config_.max_iterations_per_phase) {
      return abort(std::string(to_string(q.stage)) + " stage exceeded " +
                   std::to_string(config_.max_iterations_per_phase) + " clarification rounds");
    }
    return issue(q);
  } catch (const std::exception& e) {
    return abort(e.what());
  }
  pending_.reset();
  const auto& rev = requirement_.revisions.back();
  log("revision", {{"index", requirement_.revisions.size() - 1},
                   {"text_before", rev.text_before},
                   {"text_after", rev.text_after}});
  advance();
}

void Session::cancel(const std::string& reason) {
  if (!finished()) abort(reason);
}

AnswerSource scripted_answers(std::vector<std::string> answers) {
  auto list = std::make_shared<std::vector<std::string>>(std::move(answers));
  auto next = std::make_shared<std::size_t>(0);
  return [list, next](const ClarificationQuery&) -> std::optional<std::string> {
    if (*next >= list->size()) return std::nullopt;
    return (*list)[(*next)++];
  };
}

SessionOutcome run_session(Requirement initial, SessionDeps deps, const AnswerSource& answers, SessionConfig config) {
  Session s(std::move(initial), deps, config);
  s.advance();
  while (!s.finished()) {
    auto a = answers(*s.pending_query());
    if (!a) {
      s.cancel("answer source ended before the session finished");
      break;
    }
    try {
      s.answer(*a);
    } catch (const ClarificationError& e) {
      s.cancel(e.what());
    }
  }
  return SessionOutcome{s.requirement(), s.formula(), s.phase(), s.iterations(Stage::Vagueness),
                        s.iterations(Stage::Ambiguity), s.error(), s.transcript()};
}

} // namespace clarifystl::clarification
