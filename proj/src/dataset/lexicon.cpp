#include "clarifystl/dataset/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "clarifystl/dataset/record.hpp"
#include "clarifystl/dataset/validator.hpp"

namespace clarifystl::dataset {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool contains_sequence(const std::vector<std::string>& words, const std::vector<std::string>& p,
                       std::size_t from = 0) {
  if (p.empty()) return false;
  for (std::size_t i = from; i + p.size() <= words.size(); ++i) {
    if (std::equal(p.begin(), p.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
      return true;
    }
  }
  return false;
}

bool any_phrase(const std::vector<std::string>& words, const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    if (contains_sequence(words, lexical_words(p))) return true;
  }
  return false;
}

const std::set<std::string>& time_units() {
  static const std::set<std::string> s{"second", "seconds", "minute", "minutes", "hour",
                                       "hours",  "ms",      "units",  "unit",    "steps"};
  return s;
}

bool magnitude_word(const std::string& w) {
  static const std::set<std::string> s{
      "high",        "higher",     "low",         "lower",      "large",       "small",
      "big",         "significant", "significantly", "considerable", "considerably",
      "noticeable",  "noticeably", "increase",    "increases",  "increased",   "decrease",
      "decreases",   "decreased",  "rise",        "rises",      "rising",      "drop",
      "drops",       "dropping",   "grow",        "grows",      "elevated",    "reduced"};
  return s.count(w) != 0;
}

std::vector<std::string> split_clauses(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && (text[i] == '(' || text[i] == '[')) ++depth;
    if (i < text.size() && (text[i] == ')' || text[i] == ']')) --depth;
    if (i == text.size() || (depth <= 0 && (text[i] == ',' || text[i] == ';'))) {
      out.push_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

} // namespace

PhraseLexicon PhraseLexicon::defaults() {
  PhraseLexicon lex;
  lex.temporal = {"soon",         "later",         "in a moment", "within the next period of time",
                  "shortly",      "after a while", "for some time", "before long"};
  lex.numerical = {"is high", "is low",       "is large",          "is small",
                   "is significant", "is reduced", "rises considerably", "drops considerably"};
  lex.conditional = {"if", "when", "whenever", "once", "in case"};
  lex.referential = {"it", "the signal", "that signal", "the same signal"};
  return lex;
}

void PhraseLexicon::validate() const {
  const std::pair<const char*, const std::vector<std::string>*> sets[] = {
      {"temporal", &temporal},
      {"numerical", &numerical},
      {"conditional", &conditional},
      {"referential", &referential}};
  std::map<std::string, std::string> owner;
  for (const auto& [name, set] : sets) {
    if (set->empty()) throw DatasetError(std::string("lexicon set '") + name + "' is empty");
    for (const auto& phrase : *set) {
      std::string key = trim(phrase);
      std::transform(key.begin(), key.end(), key.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (key.empty()) throw DatasetError(std::string("empty phrase in lexicon set '") + name + "'");
      auto [it, fresh] = owner.emplace(key, name);
      if (!fresh && it->second != name) {
        throw DatasetError("phrase '" + key + "' appears in both '" + it->second + "' and '" +
                           name + "'");
      }
    }
  }
}

PhraseLexicon parse_lexicon(std::istream& in) {
  PhraseLexicon lex = PhraseLexicon::defaults();
  std::map<std::string, std::vector<std::string>*> sections{
      {"temporal", &lex.temporal},
      {"numerical", &lex.numerical},
      {"conditional", &lex.conditional},
      {"referential", &lex.referential}};
  std::vector<std::string>* current = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw DatasetError("lexicon line " + std::to_string(lineno) + ": bad header");
      auto it = sections.find(trim(std::string_view(t).substr(1, t.size() - 2)));
      if (it == sections.end()) {
        throw DatasetError("lexicon line " + std::to_string(lineno) + ": unknown section " + t);
      }
      current = it->second;
      current->clear();
      continue;
    }
    if (current == nullptr) {
      throw DatasetError("lexicon line " + std::to_string(lineno) + ": phrase outside a section");
    }
    current->push_back(t);
  }
  lex.validate();
  return lex;
}

PhraseLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open lexicon " + path.string());
  return parse_lexicon(in);
}

bool is_downward_phrase(std::string_view phrase) {
  static const std::set<std::string> down{"low",  "lower", "small", "drop",  "drops", "decrease",
                                          "decreases", "reduced", "below", "falls", "little"};
  for (const auto& w : lexical_words(phrase)) {
    if (down.count(w) != 0) return true;
  }
  return false;
}

bool contains_phrase(std::string_view text, std::string_view phrase) {
  return contains_sequence(lexical_words(text), lexical_words(phrase));
}

bool temporal_cue(std::string_view text, const PhraseLexicon& lex) {
  const auto words = lexical_words(text);
  if (any_phrase(words, lex.temporal)) return true;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (time_units().count(words[i]) == 0) continue;
    bool numbered = false;
    for (std::size_t k = 1; k <= 3 && k <= i; ++k) numbered = numbered || is_number_word(words[i - k]);
    if (!numbered) return true;
  }
  return false;
}

bool numerical_cue(std::string_view text, const PhraseLexicon& lex) {
  const auto words = lexical_words(text);
  if (any_phrase(words, lex.numerical)) return true;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!magnitude_word(words[i])) continue;
    bool numbered = false;
    for (std::size_t k = 1; k <= 2 && i + k < words.size(); ++k) {
      numbered = numbered || is_number_word(words[i + k]);
    }
    if (!numbered) return true;
  }
  return false;
}

bool conditional_cue(std::string_view text, const PhraseLexicon& lex) {
  static const std::set<std::string> joiners{"and",   "or",    "then", "but",   "if",
                                             "when",  "whenever", "while", "until", "unless",
                                             "so",    "after", "before", "which", "once",
                                             "where", "otherwise"};
  static const std::vector<std::string> extra_openers{"unless", "while", "after", "before",
                                                      "provided", "then"};
  const auto clauses = split_clauses(text);
  for (std::size_t i = 0; i + 1 < clauses.size(); ++i) {
    const auto& a = clauses[i];
    const auto& b = clauses[i + 1];
    if (!has_predicate_phrase(a) || !has_predicate_phrase(b)) continue;
    const auto aw = lexical_words(a);
    if (any_phrase(aw, lex.conditional) || any_phrase(aw, extra_openers)) continue;
    const auto bw = lexical_words(b);
    if (bw.empty()) continue;
    const std::string& lead = bw.front();
    if (joiners.count(lead) != 0) continue;
    if (lead.size() > 3 && lead.compare(lead.size() - 3, 3, "ing") == 0) continue;
    bool starts_with_opener = false;
    for (const auto& p : lex.conditional) {
      const auto pw = lexical_words(p);
      starts_with_opener = starts_with_opener ||
                           (pw.size() <= bw.size() && std::equal(pw.begin(), pw.end(), bw.begin()));
    }
    if (starts_with_opener) continue;
    return true;
  }
  return false;
}

} // namespace clarifystl::dataset
