#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "clarifystl/dataset/lexicon.hpp"
#include "clarifystl/dataset/record.hpp"
#include "clarifystl/llm/backend.hpp"

namespace clarifystl::dataset {

/// The record offers no span the requested mutation can target.
class MutationNotApplicable : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

/// The mutated text failed validate_nl or lost the intended defect cue.
class MutationRejected : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

/// An LLM-only mutation was requested without a completion backend.
class MutationModeError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

/**
 * Vague variant of `record` (label clean or vague). Targets the NL span
 * aligned with the formula: an interval for Temporal, a threshold
 * comparison for Numerical, an if/then connective for ConditionalLogic.
 * Applied to an already vague record the defect types accumulate and the
 * original parent_id is kept. The new id is `<record.id>-<slug>`.
 */
DatasetRecord mutate_vagueness(const DatasetRecord& record,
                               DefectType vtype,
                               const PhraseLexicon& lexicon,
                               std::uint64_t seed);

/**
 * Ambiguous variant of `record`. Referential replaces a later mention of a
 * signal (preferring a repeated mention) with a referring expression and
 * needs at least two distinct signals in the formula. Semantic asks
 * `backend` (operation tag "mutate_semantic") for a rewording and requires
 * every signal name to survive.
 */
DatasetRecord mutate_ambiguity(const DatasetRecord& record,
                               DefectType atype,
                               const PhraseLexicon& lexicon,
                               llm::CompletionBackend* backend,
                               std::uint64_t seed);

enum class MutationMode { RuleOnly, LlmAssisted };

struct MutationPlan {
  std::map<DefectType, std::size_t> counts;
  /// Mutants carrying every applicable vagueness type, stacked in type order.
  std::size_t stacked = 0;
  std::uint64_t seed = 0;
  MutationMode mode = MutationMode::RuleOnly;
};

struct TypeReport {
  std::size_t requested = 0;
  std::size_t applied = 0;
  std::size_t not_applicable = 0;
  std::size_t rejected = 0;
  /// requested - applied.
  std::size_t skipped = 0;
  std::string note;
};

struct BuildReport {
  std::map<std::string, TypeReport> per_type;
  /// Set when some type fell short of its requested count.
  bool partial = false;

  nlohmann::ordered_json to_json() const;
};

struct BuildResult {
  /// Input records followed by the mutants.
  std::vector<DatasetRecord> records;
  BuildReport report;
};

/// Deterministic for a given seed. Throws DatasetError when an input record
/// is not clean or its formula does not parse, and MutationModeError when
/// an LLM-assisted plan requests semantic mutants without a backend.
BuildResult build_dataset(const std::vector<DatasetRecord>& corpus,
                          const MutationPlan& plan,
                          const PhraseLexicon& lexicon,
                          llm::CompletionBackend* backend = nullptr);

/// Seed derived from a base seed and a record id, stable across platforms.
std::uint64_t record_seed(std::uint64_t seed, std::string_view id, DefectType t);

} // namespace clarifystl::dataset
