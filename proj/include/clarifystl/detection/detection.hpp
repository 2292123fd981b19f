#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>

#include "clarifystl/dataset/lexicon.hpp"
#include "clarifystl/dataset/record.hpp"
#include "clarifystl/error.hpp"
#include "clarifystl/llm/backend.hpp"

namespace clarifystl::detection {

using dataset::DefectType;

class DetectionError : public Error {
 public:
  using Error::Error;
};

/// The backend's reply could not be read as a detection verdict.
class DetectionParseError : public DetectionError {
 public:
  using DetectionError::DetectionError;
};

struct DetectionResult {
  bool is_defective = false;
  std::set<DefectType> types;
  /// Probability-like score for "defective" in [0, 1].
  double confidence = 0.0;
  std::optional<std::string> rationale;

  bool operator==(const DetectionResult&) const = default;
};

/// Lexical baseline: reports the vagueness types whose surface cue occurs.
DetectionResult rule_detect_vagueness(std::string_view requirement, const dataset::PhraseLexicon& lex);

/// Referential ambiguity baseline: a referring expression from the lexicon
/// occurs as a standalone phrase.
DetectionResult rule_detect_ambiguity(std::string_view requirement, const dataset::PhraseLexicon& lex);

/**
 * Prompt-based vagueness detector (operation tag "detect_vagueness").
 * Accepted replies: a JSON object {"vague": bool, "types": [...],
 * "rationale": "..."}, a bare list of type names, or "complete"/"none".
 * An unreadable reply is retried once, then DetectionParseError.
 */
DetectionResult detect_vagueness(const std::string& requirement,
                                 llm::CompletionBackend& backend,
                                 int round = 0);

/// Prompt-based ambiguity detector (tag "detect_ambiguity"); same reply
/// forms with the key "ambiguous".
DetectionResult detect_ambiguity(const std::string& requirement,
                                 llm::CompletionBackend& backend,
                                 int round = 0);

/// Reads a detector reply; `ambiguity` selects which types are admissible.
/// Throws DetectionParseError.
DetectionResult parse_detection_reply(const std::string& reply, bool ambiguity);

/// Injectable detector used by the clarification loop. `round` is the
/// number of clarification rounds completed so far.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual DetectionResult detect(const std::string& requirement, int round) = 0;
};

class RuleVaguenessDetector : public Detector {
 public:
  explicit RuleVaguenessDetector(dataset::PhraseLexicon lex) : lex_(std::move(lex)) {}
  DetectionResult detect(const std::string& requirement, int) override {
    return rule_detect_vagueness(requirement, lex_);
  }

 private:
  dataset::PhraseLexicon lex_;
};

class RuleAmbiguityDetector : public Detector {
 public:
  explicit RuleAmbiguityDetector(dataset::PhraseLexicon lex) : lex_(std::move(lex)) {}
  DetectionResult detect(const std::string& requirement, int) override {
    return rule_detect_ambiguity(requirement, lex_);
  }

 private:
  dataset::PhraseLexicon lex_;
};

class LlmVaguenessDetector : public Detector {
 public:
  explicit LlmVaguenessDetector(llm::CompletionBackend& backend) : backend_(backend) {}
  DetectionResult detect(const std::string& requirement, int round) override {
    return detect_vagueness(requirement, backend_, round);
  }

 private:
  llm::CompletionBackend& backend_;
};

class LlmAmbiguityDetector : public Detector {
 public:
  explicit LlmAmbiguityDetector(llm::CompletionBackend& backend) : backend_(backend) {}
  DetectionResult detect(const std::string& requirement, int round) override {
    return detect_ambiguity(requirement, backend_, round);
  }

 private:
  llm::CompletionBackend& backend_;
};

/// Fixed verdict; useful for pipelines that force or skip a phase.
class ConstantDetector : public Detector {
 public:
  explicit ConstantDetector(DetectionResult r) : r_(std::move(r)) {}
  DetectionResult detect(const std::string&, int) override { return r_; }

 private:
  DetectionResult r_;
};

} // namespace clarifystl::detection
