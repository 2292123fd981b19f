#include "clarifystl/dataset/validator.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace clarifystl::dataset {

namespace {

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::set<std::string, std::less<>>& verbs() {
  static const std::set<std::string, std::less<>> v{
      "is",        "are",       "be",        "was",      "were",      "will",      "shall",
      "should",    "must",      "can",       "may",      "has",       "have",      "does",
      "do",        "stays",     "stay",      "remains",  "remain",    "exceeds",   "exceed",
      "holds",     "hold",      "rises",     "rise",     "falls",     "fall",      "drops",
      "drop",      "increases", "increase",  "decreases", "decrease", "reaches",   "reach",
      "goes",      "go",        "becomes",   "become",   "activates", "activate",  "responds",
      "respond",   "settles",   "settle",    "returns",  "return",    "changes",   "change",
      "triggers",  "trigger",   "turns",     "turn",     "keeps",     "keep",      "occurs",
      "occur",     "starts",    "start",     "stops",    "stop",      "grows",     "grow",
      "opens",     "open",      "closes",    "close",    "switches",  "switch",    "exceeded",
      "brakes",    "brake",     "engages",   "engage",   "releases",  "release",   "shows",
      "reads",     "maintains", "maintain",  "equals",   "equal",     "lies",      "lie",
  };
  return v;
}

const std::string kComparatorSymbols[] = {">=", "<=", ">", "<", "\xE2\x89\xA5", "\xE2\x89\xA4"};
const char* const kComparatorWords[] = {"above", "below", "greater than", "less than",
                                        "at least", "at most"};

bool contains_words(const std::vector<std::string>& words, std::string_view phrase) {
  std::vector<std::string> p = lexical_words(phrase);
  if (p.empty() || p.size() > words.size()) return false;
  for (std::size_t i = 0; i + p.size() <= words.size(); ++i) {
    if (std::equal(p.begin(), p.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
      return true;
    }
  }
  return false;
}

} // namespace

bool is_number_word(std::string_view w) {
  return !w.empty() && std::isdigit(static_cast<unsigned char>(w.front())) != 0;
}

std::vector<std::string> lexical_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])) != 0) ++j;
      if (j + 1 < text.size() && text[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(text[j + 1])) != 0) {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])) != 0) ++j;
      }
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else if (word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && word_char(text[j])) ++j;
      out.push_back(lower(text.substr(i, j - i)));
      i = j;
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

bool has_predicate_phrase(std::string_view text) {
  const auto words = lexical_words(text);
  for (const auto& w : words) {
    if (verbs().count(w) != 0) return true;
  }
  for (const auto& sym : kComparatorSymbols) {
    if (text.find(sym) != std::string_view::npos) return true;
  }
  for (const char* p : kComparatorWords) {
    if (contains_words(words, p)) return true;
  }
  return false;
}

Validation validate_nl(std::string_view text) {
  Validation v;
  auto fail = [&](std::string reason) {
    v.ok = false;
    v.reasons.push_back(std::move(reason));
  };
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    fail("text is empty");
    return v;
  }
  const unsigned char first = static_cast<unsigned char>(text.front());
  if (!(std::isalnum(first) != 0 || first == '(' || first == '[' || first >= 0x80)) {
    fail("text must start with a letter, digit or bracket");
  }
  if (!has_predicate_phrase(text)) fail("no finite verb or comparator phrase");

  std::string stack;
  bool balanced = true;
  int quotes = 0;
  for (char c : text) {
    if (c == '(' || c == '[' || c == '{') {
      stack.push_back(c);
    } else if (c == ')' || c == ']' || c == '}') {
      const char open = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (stack.empty() || stack.back() != open) {
        balanced = false;
        break;
      }
      stack.pop_back();
    } else if (c == '"') {
      ++quotes;
    }
  }
  if (!balanced || !stack.empty()) fail("unbalanced brackets");
  if (quotes % 2 != 0) fail("unbalanced quotes");

  std::string_view tail = text;
  while (!tail.empty() && (std::isspace(static_cast<unsigned char>(tail.back())) != 0 ||
                           tail.back() == '.' || tail.back() == '!' || tail.back() == '?')) {
    tail.remove_suffix(1);
  }
  const auto words = lexical_words(tail);
  if (!words.empty()) {
    const std::string& last = words.back();
    if (last == "and" || last == "or" || last == "if" || last == "then" || last == ",") {
      fail("dangling connective '" + last + "' at the end");
    }
  }

  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (std::isspace(static_cast<unsigned char>(text[i])) != 0 &&
        std::isspace(static_cast<unsigned char>(text[i + 1])) != 0) {
      fail("doubled whitespace");
      break;
    }
  }
  return v;
}

} // namespace clarifystl::dataset
