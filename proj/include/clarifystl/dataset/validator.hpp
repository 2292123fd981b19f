#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace clarifystl::dataset {

struct Validation {
  bool ok = true;
  std::vector<std::string> reasons;

  explicit operator bool() const { return ok; }
};

/**
 * Rule-based syntactic check of a natural-language requirement. Passes iff
 * the text is non-empty, starts with a letter, digit or opening bracket,
 * contains a finite verb or a comparator phrase, has balanced brackets and
 * quotes, does not end on a dangling `and`/`or`/`if`/`then`/`,`, and has no
 * doubled whitespace. `reasons` names every failed rule.
 */
Validation validate_nl(std::string_view text);

/// Finite verb from the fixed verb list, or a comparator phrase.
bool has_predicate_phrase(std::string_view text);

/// Word tokens as used by the lexical rules: identifiers, unsigned numbers,
/// and single punctuation characters.
std::vector<std::string> lexical_words(std::string_view text);

bool is_number_word(std::string_view w);

} // namespace clarifystl::dataset
