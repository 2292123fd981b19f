#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "clarifystl/dataset/record.hpp"
#include "clarifystl/error.hpp"
#include "clarifystl/llm/backend.hpp"
#include "clarifystl/stl/formula.hpp"

namespace clarifystl::clarification {

using dataset::DefectType;

class ClarificationError : public Error {
 public:
  using Error::Error;
};

/// The refiner reported that the answer does not address the query.
class UnusableAnswer : public ClarificationError {
 public:
  using ClarificationError::ClarificationError;
};

enum class Stage { Vagueness, Ambiguity };

const char* to_string(Stage s);

struct ClarificationQuery {
  Stage stage = Stage::Vagueness;
  /// Non-empty, ends with '?'.
  std::string text;
  /// Vagueness queries: the defect type asked about.
  std::optional<DefectType> defect;
  /// Ambiguity queries: index of the divergence point asked about.
  std::optional<std::size_t> divergence_point;

  bool operator==(const ClarificationQuery&) const = default;
};

/// Trims, strips a leading "Query:" label and quotes, and makes the text end
/// with a question mark. Throws ClarificationError when nothing is left.
std::string normalize_query(std::string_view raw);

struct Revision {
  std::string text_before;
  ClarificationQuery query;
  std::string answer;
  std::string text_after;

  bool operator==(const Revision&) const = default;
};

struct Requirement {
  std::string id;
  std::string original;
  std::vector<Revision> revisions;

  static Requirement make(std::string id, std::string text);

  /// Last text_after, or the original when there are no revisions.
  const std::string& text() const;
  /// Round index used for backend calls: the number of revisions so far.
  int round() const { return static_cast<int>(revisions.size()); }
  /// Copy with one more revision.
  Requirement revised(ClarificationQuery query, std::string answer, std::string text_after) const;
  /// Chronology and linkage of the revision chain; throws ClarificationError.
  void validate() const;

  bool operator==(const Requirement&) const = default;
};

struct CandidateSet {
  std::vector<stl::Formula> formulas;
  std::vector<std::string> descriptions;
  std::size_t n = 3;
};

struct DivergencePoint {
  std::string aspect;
  std::vector<std::string> interpretations;

  bool operator==(const DivergencePoint&) const = default;
};

/// No divergence points means no ambiguity was found.
struct DiscrepancyReport {
  std::vector<DivergencePoint> divergence_points;

  bool empty() const { return divergence_points.empty(); }
  bool operator==(const DiscrepancyReport&) const = default;
};

/// Reads a formula out of a model reply (code fences and "STL:" style labels
/// are tolerated). nullopt when no line parses.
std::optional<stl::Formula> extract_formula(std::string_view reply);

/**
 * Vagueness inquirer (tag "vagueness_query"). Returns nullopt when the model
 * answers that the requirement does not contain vagueness of that type.
 * Throws ClarificationError on an empty reply; backend errors propagate.
 */
std::optional<ClarificationQuery> generate_vagueness_query(const Requirement& requirement,
                                                           DefectType vtype,
                                                           llm::CompletionBackend& backend);

/// `n` completions at the sampling temperature (tag "sample_candidates"),
/// at most 3n attempts; unparseable replies are dropped. Candidate order
/// follows sample order. Throws ClarificationError when none parses.
CandidateSet sample_candidates(const Requirement& requirement, std::size_t n,
                               llm::CompletionBackend& backend,
                               double temperature = llm::kSamplingTemperature);

/// Deterministic fixed-scheme description of a formula.
std::string back_translate(const stl::Formula& formula);
/// Model-based description under the same scheme (tag "back_translate").
std::string back_translate(const stl::Formula& formula, llm::CompletionBackend& backend, int round);

/**
 * Identical descriptions give an empty report without a backend call.
 * Otherwise asks the backend (tag "analyze_discrepancies") for a JSON
 * object {"divergence_points": [{"aspect": ..., "interpretations": [...]}]}.
 */
DiscrepancyReport analyze_discrepancies(const Requirement& requirement,
                                        const std::vector<std::string>& descriptions,
                                        llm::CompletionBackend& backend);
DiscrepancyReport parse_discrepancy_report(const std::string& reply);

/// Ambiguity inquirer (tag "ambiguity_query"). The query always names the
/// aspect of a divergence point. nullopt on the "does not contain
/// ambiguity" escape. Throws ClarificationError on an empty report.
std::optional<ClarificationQuery> generate_ambiguity_query(const Requirement& requirement,
                                                           const DiscrepancyReport& report,
                                                           llm::CompletionBackend& backend);

/// Supplemented requirement (tag "refine"). Throws ClarificationError on an
/// empty answer or reply, UnusableAnswer when the model replies RESTATE.
Requirement refine_requirement(const Requirement& requirement, const ClarificationQuery& query,
                               const std::string& answer, llm::CompletionBackend& backend);

/// Few-shot NL to STL (tag "transform", temperature 0), one retry.
stl::Formula transform_to_stl(const Requirement& requirement, llm::CompletionBackend& backend);

} // namespace clarifystl::clarification
