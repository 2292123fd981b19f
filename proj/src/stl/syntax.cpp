#include "clarifystl/stl/syntax.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <system_error>
#include <utility>

namespace clarifystl::stl {

ParseError::ParseError(std::size_t position, const std::string& message)
    : Error("position " + std::to_string(position) + ": " + message),
      position_(position),
      detail_(message) {}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  std::array<char, 400> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed);
  if (ec != std::errc()) {
    auto [e2, ec2] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    (void)ec2;
    return std::string(buf.data(), e2);
  }
  return std::string(buf.data(), end);
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Lex {
  Ident,
  Number,
  Globally,
  Eventually,
  Until,
  Not,
  And,
  Or,
  Implies,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Cmp,
  Plus,
  Minus,
  Star,
  True,
  False,
  End,
};

struct Lexeme {
  Lex kind;
  std::string text;
  std::size_t pos;
  Comparator cmp = Comparator::Greater;
};

struct UnicodeForm {
  std::string_view bytes;
  Lex kind;
  std::string_view ascii;
  Comparator cmp = Comparator::Greater;
};

constexpr std::array<UnicodeForm, 11> kUnicodeForms{{
    {"¬", Lex::Not, "!"},
    {"∧", Lex::And, "&"},
    {"∨", Lex::Or, "|"},
    {"→", Lex::Implies, "->"},
    {"⇒", Lex::Implies, "->"},
    {"≤", Lex::Cmp, "<=", Comparator::LessEqual},
    {"≥", Lex::Cmp, ">=", Comparator::GreaterEqual},
    {"□", Lex::Globally, "G"},
    {"◇", Lex::Eventually, "F"},
    {"⊤", Lex::True, "true"},
    {"⊥", Lex::False, "false"},
}};

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Lexeme> lex(std::string_view s) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  auto next_non_space = [&](std::size_t j) {
    while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\n' || s[j] == '\r')) ++j;
    return j;
  };
  while (true) {
    i = next_non_space(i);
    if (i >= s.size()) break;
    const std::size_t start = i;
    const char c = s[i];

    if (static_cast<unsigned char>(c) >= 0x80) {
      bool matched = false;
      for (const auto& form : kUnicodeForms) {
        if (s.substr(i, form.bytes.size()) == form.bytes) {
          out.push_back({form.kind, std::string(form.ascii), start, form.cmp});
          i += form.bytes.size();
          matched = true;
          break;
        }
      }
      if (!matched) throw ParseError(start, "unexpected non-ASCII character");
      continue;
    }

    if (is_digit(c)) {
      std::size_t j = i;
      while (j < s.size() && is_digit(s[j])) ++j;
      if (j < s.size() && s[j] == '.') {
        std::size_t k = j + 1;
        if (k >= s.size() || !is_digit(s[k])) {
          throw ParseError(j, "expected digits after decimal point");
        }
        while (k < s.size() && is_digit(s[k])) ++k;
        j = k;
      }
      out.push_back({Lex::Number, std::string(s.substr(i, j - i)), start});
      i = j;
      continue;
    }

    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      std::string word(s.substr(i, j - i));
      const bool bracket_follows = j < s.size() && s[j] == '[';
      if (word == "true") {
        out.push_back({Lex::True, word, start});
      } else if (word == "false") {
        out.push_back({Lex::False, word, start});
      } else if (bracket_follows && word == "G") {
        out.push_back({Lex::Globally, word, start});
      } else if (bracket_follows && word == "F") {
        out.push_back({Lex::Eventually, word, start});
      } else if (bracket_follows && word == "U") {
        out.push_back({Lex::Until, word, start});
      } else {
        out.push_back({Lex::Ident, word, start});
      }
      i = j;
      continue;
    }

    auto peek = [&](std::size_t off) { return i + off < s.size() ? s[i + off] : '\0'; };
    switch (c) {
      case '(': out.push_back({Lex::LParen, "(", start}); ++i; break;
      case ')': out.push_back({Lex::RParen, ")", start}); ++i; break;
      case '[': out.push_back({Lex::LBracket, "[", start}); ++i; break;
      case ']': out.push_back({Lex::RBracket, "]", start}); ++i; break;
      case ',': out.push_back({Lex::Comma, ",", start}); ++i; break;
      case '+': out.push_back({Lex::Plus, "+", start}); ++i; break;
      case '*': out.push_back({Lex::Star, "*", start}); ++i; break;
      case '-':
        if (peek(1) == '>') {
          out.push_back({Lex::Implies, "->", start});
          i += 2;
        } else {
          out.push_back({Lex::Minus, "-", start});
          ++i;
        }
        break;
      case '!':
        if (peek(1) == '=') throw ParseError(start, "comparator '!=' is not supported");
        out.push_back({Lex::Not, "!", start});
        ++i;
        break;
      case '~': out.push_back({Lex::Not, "!", start}); ++i; break;
      case '&':
        out.push_back({Lex::And, "&", start});
        i += peek(1) == '&' ? 2 : 1;
        break;
      case '|':
        out.push_back({Lex::Or, "|", start});
        i += peek(1) == '|' ? 2 : 1;
        break;
      case '=':
        if (peek(1) == '=') throw ParseError(start, "comparator '==' is not supported");
        if (peek(1) == '>') {
          out.push_back({Lex::Implies, "->", start});
          i += 2;
          break;
        }
        throw ParseError(start, "comparator '=' is not supported");
      case '<':
        if (peek(1) == '=') {
          out.push_back({Lex::Cmp, "<=", start, Comparator::LessEqual});
          i += 2;
        } else {
          out.push_back({Lex::Cmp, "<", start, Comparator::Less});
          ++i;
        }
        break;
      case '>':
        if (peek(1) == '=') {
          out.push_back({Lex::Cmp, ">=", start, Comparator::GreaterEqual});
          i += 2;
        } else {
          out.push_back({Lex::Cmp, ">", start, Comparator::Greater});
          ++i;
        }
        break;
      default:
        throw ParseError(start, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Lex::End, "", s.size()});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::vector<Lexeme> lexemes) : lx_(std::move(lexemes)) {}

  Formula parse_all() {
    Formula f = implies();
    if (peek().kind != Lex::End) fail_unexpected("end of formula");
    return f;
  }

 private:
  const Lexeme& peek() const { return lx_[pos_]; }
  const Lexeme& advance() { return lx_[pos_++]; }
  bool accept(Lex k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void fail_unexpected(const std::string& expected) const {
    const Lexeme& l = peek();
    if (l.kind == Lex::End) throw ParseError(l.pos, "unexpected end of input");
    throw ParseError(l.pos, "expected " + expected + " but found '" + l.text + "'");
  }

  const Lexeme& expect(Lex k, const std::string& what) {
    if (peek().kind != k) fail_unexpected(what);
    return advance();
  }

  static double to_number(const Lexeme& l) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(l.text.data(), l.text.data() + l.text.size(), v);
    if (ec == std::errc::result_out_of_range || !std::isfinite(v)) {
      throw ParseError(l.pos, "number overflow");
    }
    if (ec != std::errc() || ptr != l.text.data() + l.text.size()) {
      throw ParseError(l.pos, "malformed number '" + l.text + "'");
    }
    return v;
  }

  Formula implies() {
    Formula lhs = disjunction();
    if (accept(Lex::Implies)) return Formula::implication(std::move(lhs), implies());
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept(Lex::Or)) f = Formula::disjunction(std::move(f), conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = until();
    while (accept(Lex::And)) f = Formula::conjunction(std::move(f), until());
    return f;
  }

  Formula until() {
    Formula lhs = unary();
    if (peek().kind == Lex::Until) {
      advance();
      Interval i = interval();
      return Formula::until(i, std::move(lhs), until());
    }
    return lhs;
  }

  Formula unary() {
    switch (peek().kind) {
      case Lex::Not:
        advance();
        return Formula::negation(unary());
      case Lex::Globally: {
        advance();
        Interval i = interval();
        return Formula::globally(i, unary());
      }
      case Lex::Eventually: {
        advance();
        Interval i = interval();
        return Formula::eventually(i, unary());
      }
      default:
        return primary();
    }
  }

  Interval interval() {
    const Lexeme& open = expect(Lex::LBracket, "'['");
    auto bound = [&]() {
      if (peek().kind == Lex::Minus) {
        throw ParseError(peek().pos, "interval bounds must be non-negative");
      }
      return to_number(expect(Lex::Number, "interval bound"));
    };
    double lo = bound();
    if (peek().kind == Lex::RBracket) {
      throw ParseError(open.pos, "interval requires two bounds");
    }
    expect(Lex::Comma, "','");
    double hi = bound();
    expect(Lex::RBracket, "']'");
    if (lo >= hi) {
      throw ParseError(open.pos, "interval lower bound must be less than upper bound");
    }
    return Interval{lo, hi};
  }

  Formula primary() {
    switch (peek().kind) {
      case Lex::True:
        advance();
        return Formula::truth();
      case Lex::False:
        advance();
        return Formula::falsity();
      case Lex::LParen: {
        advance();
        Formula f = implies();
        expect(Lex::RParen, "')'");
        return f;
      }
      case Lex::Ident:
      case Lex::Number:
      case Lex::Minus:
        return atom();
      default:
        fail_unexpected("formula");
    }
  }

  Term term(bool negate) {
    if (peek().kind == Lex::Number) {
      double c = to_number(advance());
      accept(Lex::Star);
      const Lexeme& id = expect(Lex::Ident, "signal name");
      return Term{negate ? -c : c, id.text};
    }
    const Lexeme& id = expect(Lex::Ident, "signal name");
    return Term{negate ? -1.0 : 1.0, id.text};
  }

  Formula atom() {
    std::vector<Term> terms;
    terms.push_back(term(accept(Lex::Minus)));
    while (true) {
      if (accept(Lex::Plus)) {
        terms.push_back(term(false));
      } else if (accept(Lex::Minus)) {
        terms.push_back(term(true));
      } else {
        break;
      }
    }
    if (peek().kind != Lex::Cmp) fail_unexpected("comparator");
    Comparator cmp = advance().cmp;
    bool negative = accept(Lex::Minus);
    if (peek().kind == Lex::Ident) {
      throw ParseError(peek().pos, "right-hand side of a comparison must be a number");
    }
    double threshold = to_number(expect(Lex::Number, "threshold"));
    return Formula::atom(Atom{std::move(terms), cmp, negative ? -threshold : threshold});
  }

  std::vector<Lexeme> lx_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

int precedence(Kind k) {
  switch (k) {
    case Kind::Implies: return 1;
    case Kind::Or: return 2;
    case Kind::And: return 3;
    case Kind::Until: return 4;
    default: return 5;
  }
}

class Emitter {
 public:
  std::vector<Token> tokens;

  void op(std::string text) { tokens.push_back({TokenKind::Operator, std::move(text)}); }
  void delim(std::string text) { tokens.push_back({TokenKind::Delimiter, std::move(text)}); }
  void number(double v) { tokens.push_back({TokenKind::Number, format_number(v)}); }

  void interval(const Interval& i) {
    delim("[");
    number(i.lo);
    delim(",");
    number(i.hi);
    delim("]");
  }

  void atom(const Atom& a) {
    bool first = true;
    for (const auto& t : a.terms) {
      double c = t.coefficient;
      if (first) {
        if (c != 1.0) {
          number(c);
          op("*");
        }
      } else {
        op(c < 0.0 ? "-" : "+");
        c = std::abs(c);
        if (c != 1.0) {
          number(c);
          op("*");
        }
      }
      tokens.push_back({TokenKind::Identifier, t.variable});
      first = false;
    }
    tokens.push_back({TokenKind::Comparator, to_string(a.comparator)});
    number(a.threshold);
  }

  void parenthesized(const Formula& f) {
    delim("(");
    formula(f);
    delim(")");
  }

  void formula(const Formula& f) {
    switch (f.kind()) {
      case Kind::Atom:
        atom(f.as_atom());
        return;
      case Kind::True:
        op("true");
        return;
      case Kind::False:
        op("false");
        return;
      case Kind::Not: {
        op("!");
        const Formula& g = f.operand();
        auto k = g.kind();
        if (k == Kind::Not || k == Kind::Globally || k == Kind::Eventually ||
            k == Kind::True || k == Kind::False) {
          formula(g);
        } else {
          parenthesized(g);
        }
        return;
      }
      case Kind::Globally:
      case Kind::Eventually:
        op(f.kind() == Kind::Globally ? "G" : "F");
        interval(f.interval());
        parenthesized(f.operand());
        return;
      case Kind::Until:
        until_operand(f.lhs());
        op("U");
        interval(f.interval());
        until_operand(f.rhs());
        return;
      default: {
        const char* sym = f.kind() == Kind::And ? "&" : f.kind() == Kind::Or ? "|" : "->";
        boolean_operand(f.lhs(), f.kind());
        op(sym);
        boolean_operand(f.rhs(), f.kind());
      }
    }
  }

  void until_operand(const Formula& g) {
    if (g.is_binary() || g.kind() == Kind::Atom) {
      parenthesized(g);
    } else {
      formula(g);
    }
  }

  void boolean_operand(const Formula& g, Kind parent) {
    if (g.kind() == Kind::Until ||
        (g.is_binary() && precedence(g.kind()) <= precedence(parent))) {
      parenthesized(g);
    } else {
      formula(g);
    }
  }
};

bool is_spaced_operator(const Token& t) {
  if (t.kind == TokenKind::Comparator) return true;
  if (t.kind != TokenKind::Operator) return false;
  return t.text == "&" || t.text == "|" || t.text == "->" || t.text == "+" || t.text == "-";
}

} // namespace

Formula parse(std::string_view text) {
  bool blank = true;
  for (char c : text) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') {
      blank = false;
      break;
    }
  }
  if (blank) throw ParseError(0, "empty input");
  Parser p(lex(text));
  try {
    return p.parse_all();
  } catch (const InvalidFormula& e) {
    throw ParseError(0, e.what());
  }
}

std::vector<Diagnostic> check_syntax(std::string_view text) {
  try {
    parse(text);
    return {};
  } catch (const ParseError& e) {
    return {Diagnostic{e.position(), e.detail()}};
  }
}

std::string join_tokens(const std::vector<Token>& tokens) {
  std::string out;
  bool space_next = false;
  bool in_until_interval = false;
  for (const auto& t : tokens) {
    const bool spaced = is_spaced_operator(t);
    const bool until_op = t.kind == TokenKind::Operator && t.text == "U";
    if (!out.empty() && (space_next || spaced || until_op)) out += ' ';
    out += t.text;
    space_next = spaced;
    if (until_op) in_until_interval = true;
    if (in_until_interval && t.kind == TokenKind::Delimiter && t.text == "]") {
      in_until_interval = false;
      space_next = true;
    }
  }
  return out;
}

std::vector<Token> tokenize(const Formula& f) {
  Emitter e;
  e.formula(f);
  return std::move(e.tokens);
}

std::vector<Token> tokenize(std::string_view text) { return tokenize(parse(text)); }

std::string render(const Formula& f) { return join_tokens(tokenize(f)); }

TemplateFormula extract_template(const TemplateFormula& t) {
  TemplateFormula out;
  out.tokens.reserve(t.tokens.size());
  for (const auto& tok : t.tokens) {
    switch (tok.kind) {
      case TokenKind::Identifier:
        out.tokens.push_back({TokenKind::Placeholder, std::string(kSignalPlaceholder)});
        break;
      case TokenKind::Number:
        out.tokens.push_back({TokenKind::Placeholder, std::string(kNumberPlaceholder)});
        break;
      default:
        out.tokens.push_back(tok);
    }
  }
  return out;
}

TemplateFormula extract_template(const Formula& f) {
  return extract_template(TemplateFormula{tokenize(f)});
}

} // namespace clarifystl::stl
