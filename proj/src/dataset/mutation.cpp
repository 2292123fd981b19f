#include "clarifystl/dataset/mutation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <optional>
#include <regex>

#include "clarifystl/dataset/validator.hpp"
#include "clarifystl/rng.hpp"
#include "clarifystl/stl/syntax.hpp"

namespace clarifystl::dataset {

namespace {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

struct NumberToken {
  Span span;
  double value = 0.0;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<NumberToken> find_numbers(const std::string& text) {
  std::vector<NumberToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isalpha(static_cast<unsigned char>(text[i])) != 0 || text[i] == '_') {
      while (i < text.size() && word_char(text[i])) ++i;
      continue;
    }
    if (!digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < text.size() && digit(text[i])) ++i;
    if (i + 1 < text.size() && text[i] == '.' && digit(text[i + 1])) {
      ++i;
      while (i < text.size() && digit(text[i])) ++i;
    }
    if (b > 0 && text[b - 1] == '-' &&
        (b == 1 || std::isspace(static_cast<unsigned char>(text[b - 2])) != 0 ||
         text[b - 2] == '(' || text[b - 2] == '[')) {
      --b;
    }
    out.push_back({{b, i}, std::stod(text.substr(b, i - b))});
  }
  return out;
}

bool same_value(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

/// Start of the longest suffix of `prefix` matched by `re` (which must be
/// anchored with `$`), or npos.
std::size_t suffix_match(const std::string& prefix, const std::regex& re) {
  std::smatch m;
  if (!std::regex_search(prefix, m, re)) return std::string::npos;
  return static_cast<std::size_t>(m.position(0));
}

std::size_t prefix_match_length(const std::string& rest, const std::regex& re) {
  std::smatch m;
  if (!std::regex_search(rest, m, re, std::regex_constants::match_continuous)) return 0;
  return static_cast<std::size_t>(m.length(0));
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

bool at_sentence_start(const std::string& text, std::size_t pos) {
  std::size_t i = pos;
  while (i > 0 && std::isspace(static_cast<unsigned char>(text[i - 1])) != 0) --i;
  return i == 0 || text[i - 1] == '.' || text[i - 1] == '!' || text[i - 1] == '?';
}

std::string splice(const std::string& text, Span s, const std::string& replacement) {
  std::string phrase = at_sentence_start(text, s.begin) ? capitalized(replacement) : replacement;
  return text.substr(0, s.begin) + phrase + text.substr(s.end);
}

void collect(const stl::Formula& f,
             std::vector<stl::Interval>& intervals,
             std::vector<stl::Atom>& atoms,
             bool& has_implication) {
  using stl::Kind;
  switch (f.kind()) {
    case Kind::Atom:
      atoms.push_back(f.as_atom());
      return;
    case Kind::True:
    case Kind::False:
      return;
    case Kind::Not:
      collect(f.operand(), intervals, atoms, has_implication);
      return;
    case Kind::Globally:
    case Kind::Eventually:
      intervals.push_back(f.interval());
      collect(f.operand(), intervals, atoms, has_implication);
      return;
    case Kind::Until:
      intervals.push_back(f.interval());
      [[fallthrough]];
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
      has_implication = has_implication || f.kind() == Kind::Implies;
      collect(f.lhs(), intervals, atoms, has_implication);
      collect(f.rhs(), intervals, atoms, has_implication);
      return;
  }
}

struct Alignment {
  stl::Formula formula;
  std::vector<stl::Interval> intervals;
  std::vector<stl::Atom> atoms;
  bool has_implication = false;
};

Alignment align(const DatasetRecord& r) {
  if (r.stl.empty()) throw MutationNotApplicable(r.id + ": record has no formula");
  std::optional<stl::Formula> f;
  try {
    f = stl::parse(r.stl);
  } catch (const stl::ParseError& e) {
    throw DatasetError(r.id + ": formula does not parse: " + e.what());
  }
  Alignment a{*f, {}, {}, false};
  collect(a.formula, a.intervals, a.atoms, a.has_implication);
  return a;
}

const std::regex& interval_lead() {
  static const std::regex re(
      R"((?:\b(?:during|within|between|from|for|in|over)\s+(?:the\s+(?:next|first|following)\s+)?)?\[?\s*$)",
      std::regex::icase);
  return re;
}

const std::regex& upper_only_lead() {
  static const std::regex re(
      R"(\b(?:within|for|in|during|over)\s+(?:the\s+(?:next|first|following)\s+)?$)",
      std::regex::icase);
  return re;
}

const std::regex& interval_joint() {
  static const std::regex re(R"(^\s*(?:-|\xE2\x80\x93|to|and|,)\s*$)", std::regex::icase);
  return re;
}

const std::regex& interval_tail() {
  static const std::regex re(
      R"(\s*\]?(?:\s*(?:time\s+units?|time\s+steps?|seconds?|secs?|minutes?|ms|s)\b)?)",
      std::regex::icase);
  return re;
}

const std::regex& comparison_lead() {
  static const std::regex re(
      R"((?:\b(?:will|should|must|shall|can)\s+)?(?:\b(?:is|are|be|stays?|remains?|goes|go|falls?|drops?|rises?|gets?|keeps?)\s+)?)"
      R"((?:\b(?:strictly\s+)?(?:above|below|over|under|(?:greater|less|higher|lower|larger|smaller|more)\s+than(?:\s+or\s+equal\s+to)?|at\s+least|at\s+most)|\bexceed(?:s|ing)?|>=|<=|>|<|\xE2\x89\xA5|\xE2\x89\xA4)\s*$)",
      std::regex::icase);
  return re;
}

const std::regex& downward_comparison() {
  static const std::regex re(R"(below|under|less|lower|smaller|at\s+most|<|\xE2\x89\xA4)",
                             std::regex::icase);
  return re;
}

const std::regex& comparison_tail() {
  static const std::regex re(R"((?:\s*(?:units?|km/h|m/s|rpm|degrees?|%|percent)\b)?)",
                             std::regex::icase);
  return re;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.index(v.size())];
}

std::vector<Span> temporal_spans(const std::string& text, const Alignment& a) {
  const auto nums = find_numbers(text);
  std::vector<Span> spans;
  auto extend = [&](std::size_t b, std::size_t e) {
    const std::size_t lead = suffix_match(text.substr(0, b), interval_lead());
    const std::size_t start = lead == std::string::npos ? b : lead;
    const std::size_t stop = e + prefix_match_length(text.substr(e), interval_tail());
    Span s{start, stop};
    if (std::find(spans.begin(), spans.end(), s) == spans.end()) spans.push_back(s);
  };
  for (const auto& iv : a.intervals) {
    for (std::size_t i = 0; i + 1 < nums.size(); ++i) {
      if (!same_value(nums[i].value, iv.lo) || !same_value(nums[i + 1].value, iv.hi)) continue;
      const std::string joint =
          text.substr(nums[i].span.end, nums[i + 1].span.begin - nums[i].span.end);
      if (std::regex_match(joint, interval_joint())) extend(nums[i].span.begin, nums[i + 1].span.end);
    }
    if (iv.lo != 0.0) continue;
    for (const auto& n : nums) {
      if (!same_value(n.value, iv.hi)) continue;
      if (suffix_match(text.substr(0, n.span.begin), upper_only_lead()) == std::string::npos) {
        continue;
      }
      bool inside = false;
      for (const auto& s : spans) inside = inside || (s.begin <= n.span.begin && n.span.end <= s.end);
      if (!inside) extend(n.span.begin, n.span.end);
    }
  }
  return spans;
}

struct Comparison {
  Span span;
  bool downward = false;
};

std::vector<Comparison> numerical_spans(const std::string& text, const Alignment& a) {
  std::vector<Comparison> out;
  for (const auto& n : find_numbers(text)) {
    bool aligned = false;
    for (const auto& atom : a.atoms) aligned = aligned || same_value(n.value, atom.threshold);
    if (!aligned) continue;
    const std::string before = text.substr(0, n.span.begin);
    const std::size_t lead = suffix_match(before, comparison_lead());
    if (lead == std::string::npos) continue;
    std::size_t start = lead;
    while (start < n.span.begin && std::isspace(static_cast<unsigned char>(text[start])) != 0) ++start;
    if (start == n.span.begin) continue;
    const std::size_t stop = n.span.end + prefix_match_length(text.substr(n.span.end), comparison_tail());
    const std::string cmp = text.substr(start, n.span.begin - start);
    out.push_back({{start, stop}, std::regex_search(cmp, downward_comparison())});
  }
  return out;
}

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<Span> word_occurrences(const std::string& haystack, const std::string& word) {
  std::vector<Span> out;
  if (word.empty()) return out;
  std::size_t pos = 0;
  while ((pos = haystack.find(word, pos)) != std::string::npos) {
    const std::size_t end = pos + word.size();
    const bool left = pos == 0 || !word_char(haystack[pos - 1]);
    const bool right = end >= haystack.size() || !word_char(haystack[end]);
    if (left && right) out.push_back({pos, end});
    pos = end;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<std::string> drop_conditional(const std::string& text,
                                            const PhraseLexicon& lex,
                                            const std::set<std::string>& vars) {
  static const std::regex then_re(R"(\s*,?\s*\bthen\b\s*)", std::regex::icase);
  const std::string low = lowercase(text);
  std::vector<Span> openers;
  for (const auto& p : lex.conditional) {
    for (const auto& s : word_occurrences(low, lowercase(p))) openers.push_back(s);
  }
  std::sort(openers.begin(), openers.end(),
            [](const Span& x, const Span& y) { return x.begin < y.begin; });
  for (const auto& op : openers) {
    const std::string rest = text.substr(op.end);
    std::string antecedent, consequent;
    std::smatch m;
    if (std::regex_search(rest, m, then_re)) {
      antecedent = rest.substr(0, static_cast<std::size_t>(m.position(0)));
      consequent = rest.substr(static_cast<std::size_t>(m.position(0) + m.length(0)));
    } else {
      const auto comma = rest.find(',');
      if (comma == std::string::npos) continue;
      antecedent = rest.substr(0, comma);
      consequent = rest.substr(comma + 1);
    }
    antecedent = trim(antecedent);
    consequent = trim(consequent);
    if (antecedent.empty() || consequent.empty() || antecedent.find(',') != std::string::npos) {
      continue;
    }
    std::string head = text.substr(0, op.begin);
    const bool opener_capital = std::isupper(static_cast<unsigned char>(text[op.begin])) != 0;
    if (op.begin == 0 && opener_capital) {
      std::size_t w = 0;
      while (w < antecedent.size() && word_char(antecedent[w])) ++w;
      const std::string first = antecedent.substr(0, w);
      const bool plain = std::all_of(first.begin(), first.end(),
                                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; });
      if (plain && vars.count(first) == 0) antecedent = capitalized(antecedent);
    }
    return head + antecedent + ", " + consequent;
  }
  return std::nullopt;
}

std::vector<Span> referential_spans(const std::string& text, const std::set<std::string>& vars) {
  static const std::regex signal_lead(R"((?:\bthe\s+)?\bsignal\s+$)", std::regex::icase);
  struct Mention {
    Span span;
    std::string var;
  };
  std::vector<Mention> mentions;
  for (const auto& v : vars) {
    for (const auto& s : word_occurrences(text, v)) {
      const std::size_t lead = suffix_match(text.substr(0, s.begin), signal_lead);
      mentions.push_back({{lead == std::string::npos ? s.begin : lead, s.end}, v});
    }
  }
  std::sort(mentions.begin(), mentions.end(),
            [](const Mention& a, const Mention& b) { return a.span.begin < b.span.begin; });
  std::vector<Span> repeated, later_distinct;
  std::set<std::string> seen;
  for (const auto& m : mentions) {
    if (seen.count(m.var) != 0) {
      repeated.push_back(m.span);
    } else {
      if (!seen.empty()) later_distinct.push_back(m.span);
      seen.insert(m.var);
    }
  }
  return repeated.empty() ? later_distinct : repeated;
}

DatasetRecord derive(const DatasetRecord& parent, DefectType t, Label label, std::string nl) {
  DatasetRecord out;
  out.id = parent.id + "-" + slug(t);
  out.nl = std::move(nl);
  out.stl = parent.stl;
  out.label = label;
  out.defect_types = parent.label == label ? parent.defect_types : std::set<DefectType>{};
  out.defect_types.insert(t);
  out.reference_query = std::nullopt;
  out.parent_id = parent.parent_id ? parent.parent_id : std::optional<std::string>(parent.id);
  out.extra = parent.extra;
  return out;
}

void accept_or_reject(const std::string& original, const std::string& mutated, const std::string& id) {
  if (mutated == original) throw MutationRejected(id + ": mutation left the text unchanged");
  const Validation v = validate_nl(mutated);
  if (!v) {
    std::string why;
    for (const auto& r : v.reasons) why += (why.empty() ? "" : "; ") + r;
    throw MutationRejected(id + ": '" + mutated + "' fails validation: " + why);
  }
}

const char* kSemanticInstruction =
    "Rewrite the requirement so that it admits more than one plausible STL interpretation, "
    "for example by making the scope of a time window or the order of conditions unclear. "
    "Keep every signal name, predicate and numeric value unchanged. Reply with the rewritten "
    "requirement only.";

const char* kSemanticDemos[][3] = {
    {"x2 should stay below 0.5 within 30 seconds after x1 exceeds 0.2",
     "within the next 30 seconds, if x1 exceeds 0.2, then x2 should stay below 0.5",
     "It is unclear whether the 30-second window starts now or when x1 exceeds 0.2."},
    {"If speed is above 45 then rpm stays below 2700 for 4 seconds",
     "rpm stays below 2700 for 4 seconds if speed is above 45 at some point",
     "It is unclear whether speed must be above 45 at the start or at any time."},
    {"Whenever x3 drops below 1, x4 must exceed 2 within 5 seconds",
     "x4 must exceed 2 within 5 seconds when x3 drops below 1",
     "It is unclear whether the obligation applies to every drop or only the first."},
};

} // namespace

std::uint64_t record_seed(std::uint64_t seed, std::string_view id, DefectType t) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed ^ h ^ (static_cast<std::uint64_t>(t) + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DatasetRecord mutate_vagueness(const DatasetRecord& record,
                               DefectType vtype,
                               const PhraseLexicon& lexicon,
                               std::uint64_t seed) {
  if (!is_vagueness(vtype)) {
    throw DatasetError(std::string(to_string(vtype)) + " is not a vagueness type");
  }
  if (record.label == Label::Ambiguous) {
    throw MutationNotApplicable(record.id + ": record is already ambiguous");
  }
  if (record.defect_types.count(vtype) != 0) {
    throw MutationNotApplicable(record.id + ": record already carries " + to_string(vtype));
  }
  const Alignment a = align(record);
  Rng rng(seed);
  const std::string& text = record.nl;
  std::string mutated;

  switch (vtype) {
    case DefectType::Temporal: {
      const auto spans = temporal_spans(text, a);
      if (spans.empty()) throw MutationNotApplicable(record.id + ": no time interval in the text");
      mutated = splice(text, pick(spans, rng), pick(lexicon.temporal, rng));
      if (!temporal_cue(mutated, lexicon)) {
        throw MutationRejected(record.id + ": mutant shows no temporal cue");
      }
      break;
    }
    case DefectType::Numerical: {
      const auto spans = numerical_spans(text, a);
      if (spans.empty()) throw MutationNotApplicable(record.id + ": no threshold comparison in the text");
      const Comparison& c = pick(spans, rng);
      std::vector<std::string> fitting;
      for (const auto& p : lexicon.numerical) {
        if (is_downward_phrase(p) == c.downward) fitting.push_back(p);
      }
      mutated = splice(text, c.span, pick(fitting.empty() ? lexicon.numerical : fitting, rng));
      if (!numerical_cue(mutated, lexicon)) {
        throw MutationRejected(record.id + ": mutant shows no numerical cue");
      }
      break;
    }
    case DefectType::ConditionalLogic: {
      if (!a.has_implication) throw MutationNotApplicable(record.id + ": formula has no implication");
      auto out = drop_conditional(text, lexicon, stl::variables(a.formula));
      if (!out) throw MutationNotApplicable(record.id + ": no conditional connective in the text");
      mutated = std::move(*out);
      if (!conditional_cue(mutated, lexicon)) {
        throw MutationRejected(record.id + ": mutant shows no conditional cue");
      }
      break;
    }
    default:
      break;
  }
  accept_or_reject(text, mutated, record.id);
  return derive(record, vtype, Label::Vague, std::move(mutated));
}

DatasetRecord mutate_ambiguity(const DatasetRecord& record,
                               DefectType atype,
                               const PhraseLexicon& lexicon,
                               llm::CompletionBackend* backend,
                               std::uint64_t seed) {
  if (is_vagueness(atype)) {
    throw DatasetError(std::string(to_string(atype)) + " is not an ambiguity type");
  }
  if (record.label == Label::Vague) {
    throw MutationNotApplicable(record.id + ": record is already vague");
  }
  if (record.defect_types.count(atype) != 0) {
    throw MutationNotApplicable(record.id + ": record already carries " + to_string(atype));
  }
  if (atype == DefectType::Semantic && backend == nullptr) {
    throw MutationModeError("semantic mutation needs a completion backend");
  }
  const Alignment a = align(record);
  const auto vars = stl::variables(a.formula);
  std::string mutated;

  if (atype == DefectType::Referential) {
    if (vars.size() < 2) {
      throw MutationNotApplicable(record.id + ": formula mentions fewer than two signals");
    }
    const auto spans = referential_spans(record.nl, vars);
    if (spans.empty()) throw MutationNotApplicable(record.id + ": no later signal mention in the text");
    Rng rng(seed);
    const Span s = pick(spans, rng);
    mutated = splice(record.nl, s, pick(lexicon.referential, rng));
  } else {
    llm::CompletionRequest req;
    req.operation_tag = "mutate_semantic";
    req.round = 0;
    std::string demos;
    for (const auto& d : kSemanticDemos) {
      demos += "Requirement: " + std::string(d[0]) + "\nAmbiguous rewrite: " + d[1] +
               "\nWhy it is ambiguous: " + d[2] + "\n\n";
    }
    req.messages = {{llm::Role::System, kSemanticInstruction},
                    {llm::Role::User, demos + "Requirement: " + record.nl + "\nAmbiguous rewrite:"}};
    mutated = trim(backend->complete(req));
    while (!mutated.empty() && (mutated.back() == '\n' || mutated.back() == '\r')) mutated.pop_back();
    if (mutated.size() >= 2 && mutated.front() == '"' && mutated.back() == '"') {
      mutated = mutated.substr(1, mutated.size() - 2);
    }
    for (const auto& v : vars) {
      if (word_occurrences(mutated, v).empty()) {
        throw MutationRejected(record.id + ": rewrite dropped signal " + v);
      }
    }
  }
  accept_or_reject(record.nl, mutated, record.id);
  return derive(record, atype, Label::Ambiguous, std::move(mutated));
}

nlohmann::ordered_json BuildReport::to_json() const {
  nlohmann::ordered_json j;
  j["partial"] = partial;
  auto types = nlohmann::ordered_json::object();
  for (const auto& [name, r] : per_type) {
    nlohmann::ordered_json t;
    t["requested"] = r.requested;
    t["applied"] = r.applied;
    t["not_applicable"] = r.not_applicable;
    t["rejected"] = r.rejected;
    t["skipped"] = r.skipped;
    if (!r.note.empty()) t["note"] = r.note;
    types[name] = std::move(t);
  }
  j["types"] = std::move(types);
  return j;
}

BuildResult build_dataset(const std::vector<DatasetRecord>& corpus,
                          const MutationPlan& plan,
                          const PhraseLexicon& lexicon,
                          llm::CompletionBackend* backend) {
  lexicon.validate();
  for (const auto& r : corpus) {
    if (r.label != Label::Clean) throw DatasetError(r.id + ": input records must be clean");
    if (r.stl.empty()) throw DatasetError(r.id + ": input record has no formula");
    const auto diags = stl::check_syntax(r.stl);
    if (!diags.empty()) throw DatasetError(r.id + ": formula does not parse: " + diags.front().message);
  }

  BuildResult result;
  result.records = corpus;
  auto order = [&](std::uint64_t salt) {
    std::vector<std::size_t> idx(corpus.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(plan.seed ^ (salt * 0x9E3779B97F4A7C15ULL));
    rng.shuffle(idx.begin(), idx.end());
    return idx;
  };

  for (DefectType t : kAllDefectTypes) {
    auto it = plan.counts.find(t);
    if (it == plan.counts.end() || it->second == 0) continue;
    TypeReport rep;
    rep.requested = it->second;
    const bool semantic = t == DefectType::Semantic;
    if (semantic && plan.mode == MutationMode::RuleOnly) {
      rep.skipped = rep.requested;
      rep.note = "semantic mutation needs llm-assisted mode";
      result.report.partial = true;
      result.report.per_type[to_string(t)] = rep;
      continue;
    }
    if (semantic && backend == nullptr) {
      throw MutationModeError("semantic mutation needs a completion backend");
    }
    for (std::size_t i : order(static_cast<std::uint64_t>(t) + 1)) {
      if (rep.applied == rep.requested) break;
      const auto& rec = corpus[i];
      const std::uint64_t s = record_seed(plan.seed, rec.id, t);
      try {
        result.records.push_back(is_vagueness(t)
                                     ? mutate_vagueness(rec, t, lexicon, s)
                                     : mutate_ambiguity(rec, t, lexicon, backend, s));
        ++rep.applied;
      } catch (const MutationNotApplicable&) {
        ++rep.not_applicable;
      } catch (const MutationRejected&) {
        ++rep.rejected;
      }
    }
    rep.skipped = rep.requested - rep.applied;
    result.report.partial = result.report.partial || rep.skipped > 0;
    result.report.per_type[to_string(t)] = rep;
  }

  if (plan.stacked > 0) {
    TypeReport rep;
    rep.requested = plan.stacked;
    for (std::size_t i : order(99)) {
      if (rep.applied == rep.requested) break;
      DatasetRecord cur = corpus[i];
      int layers = 0;
      for (DefectType t : {DefectType::Temporal, DefectType::Numerical, DefectType::ConditionalLogic}) {
        try {
          cur = mutate_vagueness(cur, t, lexicon, record_seed(plan.seed, cur.id, t));
          ++layers;
        } catch (const MutationNotApplicable&) {
        } catch (const MutationRejected&) {
          ++rep.rejected;
        }
      }
      if (layers >= 2) {
        result.records.push_back(std::move(cur));
        ++rep.applied;
      } else {
        ++rep.not_applicable;
      }
    }
    rep.skipped = rep.requested - rep.applied;
    result.report.partial = result.report.partial || rep.skipped > 0;
    result.report.per_type["stacked"] = rep;
  }
  return result;
}

} // namespace clarifystl::dataset
