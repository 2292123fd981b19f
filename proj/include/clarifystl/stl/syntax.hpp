#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "clarifystl/stl/formula.hpp"

namespace clarifystl::stl {

/// Syntax error at a byte offset of the input text.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message);

  std::size_t position() const { return position_; }
  /// Message without the position prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::size_t position_;
  std::string detail_;
};

struct Diagnostic {
  std::size_t position = 0;
  std::string message;
};

/**
 * Parses the textual formula grammar.
 *
 *   implies := or ( "->" implies )?
 *   or      := and ( "|" and )*
 *   and     := until ( "&" until )*
 *   until   := unary ( "U" interval until )?
 *   unary   := "!" unary | ("G" | "F") interval unary | primary
 *   primary := "true" | "false" | "(" implies ")" | atom
 *   atom    := term ( ("+" | "-") term )* cmp ["-"] number
 *   term    := ["-"] number ["*"] ident | ["-"] ident
 *
 * `G`, `F` and `U` are operators only when immediately followed by `[`.
 * Unicode spellings of the connectives and comparators are accepted.
 */
Formula parse(std::string_view text);

/// Canonical text; parse(render(f)) == f.
std::string render(const Formula& f);

/// Empty iff parse(text) succeeds.
std::vector<Diagnostic> check_syntax(std::string_view text);

/// Shortest fixed-notation decimal that reads back to `value`.
std::string format_number(double value);

enum class TokenKind { Operator, Delimiter, Number, Identifier, Comparator, Placeholder };

struct Token {
  TokenKind kind;
  std::string text;

  bool operator==(const Token&) const = default;
};

/// Token stream of the canonical rendering.
std::vector<Token> tokenize(const Formula& f);
/// Parses first; throws ParseError on invalid text (including empty input).
std::vector<Token> tokenize(std::string_view text);

/// Joins tokens with the canonical spacing rules.
std::string join_tokens(const std::vector<Token>& tokens);

inline constexpr std::string_view kSignalPlaceholder = "SIG";
inline constexpr std::string_view kNumberPlaceholder = "NUM";

/// A formula with signal names and numerals abstracted away.
struct TemplateFormula {
  std::vector<Token> tokens;

  std::string text() const { return join_tokens(tokens); }
  bool operator==(const TemplateFormula&) const = default;
};

TemplateFormula extract_template(const Formula& f);
/// Re-abstraction of an existing template is the identity.
TemplateFormula extract_template(const TemplateFormula& t);

} // namespace clarifystl::stl
