#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace clarifystl::dataset {

/// Vague phrase sets. Order matters: seeded sampling indexes into it.
struct PhraseLexicon {
  /// Replacements for time intervals ("soon", "later", ...).
  std::vector<std::string> temporal;
  /// Replacements for threshold comparisons ("is high", "is low", ...).
  std::vector<std::string> numerical;
  /// Conditional openers that the conditional mutation deletes.
  std::vector<std::string> conditional;
  /// Referring expressions standing in for a signal name.
  std::vector<std::string> referential;

  static PhraseLexicon defaults();

  /// Throws DatasetError on an empty set or a phrase shared by two sets.
  void validate() const;
};

/**
 * Plain-text lexicon: `[temporal]`, `[numerical]`, `[conditional]` and
 * `[referential]` section headers, one phrase per line, `#` comments.
 * Sections that are absent keep their default contents.
 */
PhraseLexicon parse_lexicon(std::istream& in);
PhraseLexicon load_lexicon(const std::filesystem::path& path);

/// True when a numerical phrase expresses a downward magnitude ("is low").
bool is_downward_phrase(std::string_view phrase);

/// Case-insensitive whole-word occurrence of `phrase` in `text`.
bool contains_phrase(std::string_view text, std::string_view phrase);

// Surface cues of each vagueness type. The rule detector reports exactly
// these, and every rule mutation must leave its own cue behind.

/// A temporal phrase, or a time unit with no number among the three
/// preceding words.
bool temporal_cue(std::string_view text, const PhraseLexicon& lex);
/// A numerical phrase, or a magnitude word with no number among the two
/// following words.
bool numerical_cue(std::string_view text, const PhraseLexicon& lex);
/// Two adjacent comma-separated clauses that both state a predicate, with
/// no conditional opener in the first and no connective starting the second.
bool conditional_cue(std::string_view text, const PhraseLexicon& lex);

} // namespace clarifystl::dataset
