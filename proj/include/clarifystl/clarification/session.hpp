#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clarifystl/clarification/inquirer.hpp"
#include "clarifystl/detection/detection.hpp"

namespace clarifystl::clarification {

/// An answer was submitted while no query was pending.
class NoPendingQuery : public ClarificationError {
 public:
  using ClarificationError::ClarificationError;
};

enum class Phase { VaguenessLoop, AmbiguityLoop, Transforming, Done, Aborted };

const char* to_string(Phase p);

struct SessionConfig {
  int max_iterations_per_phase = 10;
  std::size_t candidate_n = 3;
  double sampling_temperature = llm::kSamplingTemperature;
  /// Describe candidates with the backend instead of the fixed template.
  bool llm_back_translation = false;
};

struct TranscriptEvent {
  std::size_t seq = 0;
  Phase phase = Phase::VaguenessLoop;
  /// prompt, reply, detection, candidates, report, query, answer, restate,
  /// revision, escape, formula, phase, error.
  std::string kind;
  nlohmann::ordered_json payload;
};

nlohmann::ordered_json to_json(const TranscriptEvent& e);
/// One JSON object per line.
void write_transcript(std::ostream& out, const std::vector<TranscriptEvent>& events);

/// Collaborators of a session; they must outlive it.
struct SessionDeps {
  detection::Detector& vagueness;
  detection::Detector& ambiguity;
  /// Inquirers, refiner, candidate sampler and transformer.
  llm::CompletionBackend& backend;
};

/**
 * Two-stage clarification state machine driven one answer at a time:
 * vagueness loop, ambiguity loop, transformation. advance() runs until a
 * query is pending or the session is Done/Aborted. Errors from any step
 * abort the session; the message is kept in error(). Not thread-safe.
 */
class Session {
 public:
  Session(Requirement initial, SessionDeps deps, SessionConfig config = {});
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;
  ~Session();

  void advance();
  /// Throws NoPendingQuery, or ClarificationError on a blank answer. A
  /// RESTATE reply from the refiner re-issues the same query.
  void answer(const std::string& text);
  /// Aborts an unfinished session with `reason`.
  void cancel(const std::string& reason);

  Phase phase() const { return phase_; }
  bool finished() const { return phase_ == Phase::Done || phase_ == Phase::Aborted; }
  const std::optional<ClarificationQuery>& pending_query() const { return pending_; }
  const Requirement& requirement() const { return requirement_; }
  const std::optional<stl::Formula>& formula() const { return formula_; }
  const std::optional<std::string>& error() const { return error_; }
  /// Queries issued in a stage, re-asks included.
  int iterations(Stage s) const { return s == Stage::Vagueness ? vague_iters_ : ambig_iters_; }
  std::size_t queries_issued() const { return static_cast<std::size_t>(vague_iters_ + ambig_iters_); }
  const std::vector<TranscriptEvent>& transcript() const { return transcript_; }
  const SessionConfig& config() const { return config_; }

 private:
  class Recorder;

  void log(std::string kind, nlohmann::ordered_json payload);
  void enter(Phase p);
  void abort(const std::string& why);
  void issue(ClarificationQuery q);
  void step();

  SessionDeps deps_;
  SessionConfig config_;
  std::unique_ptr<Recorder> recorder_;
  Requirement requirement_;
  Phase phase_ = Phase::VaguenessLoop;
  int vague_iters_ = 0;
  int ambig_iters_ = 0;
  std::optional<ClarificationQuery> pending_;
  std::optional<stl::Formula> formula_;
  std::optional<std::string> error_;
  std::vector<TranscriptEvent> transcript_;
};

struct SessionOutcome {
  Requirement requirement;
  std::optional<stl::Formula> formula;
  Phase phase = Phase::Aborted;
  int vagueness_iterations = 0;
  int ambiguity_iterations = 0;
  std::optional<std::string> error;
  std::vector<TranscriptEvent> transcript;
};

/// Supplies one answer per query; nullopt ends the session (Aborted).
using AnswerSource = std::function<std::optional<std::string>(const ClarificationQuery&)>;

/// Answers taken in order from a list.
AnswerSource scripted_answers(std::vector<std::string> answers);

SessionOutcome run_session(Requirement initial, SessionDeps deps, const AnswerSource& answers,
                           SessionConfig config = {});

} // namespace clarifystl::clarification
