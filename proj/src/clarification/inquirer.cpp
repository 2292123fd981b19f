#include "clarifystl/clarification/inquirer.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "clarifystl/stl/syntax.hpp"

namespace clarifystl::clarification {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool contains_ci(const std::string& hay, const std::string& needle) {
  return lower(hay).find(lower(needle)) != std::string::npos;
}

// Drops "Label:" when the label is one of `labels` (case-insensitive).
std::string strip_label(std::string s, std::initializer_list<const char*> labels) {
  s = trim(s);
  const auto colon = s.find(':');
  if (colon == std::string::npos) return s;
  const std::string head = lower(trim(std::string_view(s).substr(0, colon)));
  for (const char* l : labels) {
    if (head == l) return trim(std::string_view(s).substr(colon + 1));
  }
  return s;
}

std::string unquote(std::string s) {
  s = trim(s);
  while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'' || s.front() == '`') && s.back() == s.front()) {
    s = trim(std::string_view(s).substr(1, s.size() - 2));
  }
  return s;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (line.rfind("```", 0) == 0 || line.empty()) continue;
    out.push_back(line);
  }
  return out;
}

llm::CompletionRequest request(std::string tag, int round, std::string system, std::string user,
                               double temperature = llm::kDefaultTemperature) {
  llm::CompletionRequest r;
  r.operation_tag = std::move(tag);
  r.round = round;
  r.temperature = temperature;
  r.messages = {{llm::Role::System, std::move(system)}, {llm::Role::User, std::move(user)}};
  return r;
}

bool escape_reply(const std::string& reply, const char* phrase) {
  return contains_ci(reply, phrase);
}

struct VaguenessDemo {
  const char* requirement;
  const char* reason;
  const char* query;
};

std::vector<VaguenessDemo> vagueness_demos(DefectType t) {
  switch (t) {
    case DefectType::Temporal:
      return {{"After the door opens, the alarm sounds soon.",
               "The delay before the alarm is not bounded by any time value.",
               "Within how many seconds after the door opens must the alarm sound?"},
              {"The pressure stays below 3 for some time.",
               "The duration for which the bound must hold is missing.",
               "For how many seconds must the pressure stay below 3?"},
              {"If rpm exceeds 4000, the warning light turns on later.",
               "The time window in which the light must turn on is not given.",
               "Within which time interval after rpm exceeds 4000 must the warning light turn on?"}};
    case DefectType::Numerical:
      return {{"If the temperature is high, the fan starts within 5 seconds.",
               "The threshold that makes the temperature high is missing.",
               "Above which temperature value should the fan start?"},
              {"The speed drops considerably within 10 seconds.",
               "The amount by which the speed must drop is not stated.",
               "To which value must the speed drop within 10 seconds?"},
              {"Whenever the voltage is low, the backup engages within 2 seconds.",
               "No numeric bound defines a low voltage.",
               "Below which voltage value should the backup engage?"}};
    case DefectType::ConditionalLogic:
      return {{"speed > 50, brake activates within 2 seconds.",
               "The logical relation between the two clauses is missing.",
               "Should the brake activate only when speed exceeds 50, or must both hold independently?"},
              {"The door is open, the motor stops.",
               "It is unclear whether the open door is a precondition for stopping the motor.",
               "Must the motor stop whenever the door is open?"},
              {"x1 is above 3 within 5 seconds, x2 is below 1.",
               "The clauses are juxtaposed without a conditional or conjunctive link.",
               "Is x2 being below 1 required only if x1 is above 3 within 5 seconds?"}};
    default:
      throw ClarificationError(std::string("not a vagueness type: ") + dataset::to_string(t));
  }
}

const char* kTransformSystem =
    "Instruction: translate the natural language requirement into a Signal Temporal Logic "
    "formula. Use G[a,b], F[a,b] and U[a,b] for the temporal operators, !, &, | and -> for the "
    "connectives, and comparisons of signals with numbers as atoms. Output only the formula.";

const char* kTransformDemos =
    "Demonstrations:\n"
    "Requirement: The speed must always stay below 120 during the first 100 seconds.\n"
    "STL: G[0,100](speed < 120)\n"
    "Requirement: Within 10 seconds the pressure reaches at least 3.\n"
    "STL: F[0,10](pressure >= 3)\n"
    "Requirement: During 0-50 seconds, if rpm exceeds 4000 then within 5 seconds gear is above 2.\n"
    "STL: G[0,50](rpm > 4000 -> F[0,5](gear > 2))\n";

std::string atom_text(const stl::Atom& a) {
  std::string lhs;
  if (a.terms.size() == 1 && a.terms.front().coefficient == 1.0) {
    lhs = "signal " + a.terms.front().variable;
  } else {
    lhs = "the quantity ";
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
      if (i > 0) lhs += " + ";
      lhs += stl::format_number(a.terms[i].coefficient) + "*" + a.terms[i].variable;
    }
  }
  const char* rel = "above";
  switch (a.comparator) {
    case stl::Comparator::Less: rel = "below"; break;
    case stl::Comparator::LessEqual: rel = "at most"; break;
    case stl::Comparator::Greater: rel = "above"; break;
    case stl::Comparator::GreaterEqual: rel = "at least"; break;
  }
  return lhs + " is " + rel + " " + stl::format_number(a.threshold);
}

std::string interval_text(const stl::Interval& i) {
  return "[" + stl::format_number(i.lo) + ", " + stl::format_number(i.hi) + "] seconds";
}

bool simple(const stl::Formula& f) {
  return f.kind() == stl::Kind::Atom || f.kind() == stl::Kind::True || f.kind() == stl::Kind::False;
}

std::string describe(const stl::Formula& f);

// Operands of binary forms are bracketed unless atomic, which keeps the
// scheme injective.
std::string operand(const stl::Formula& f) {
  return simple(f) ? describe(f) : "(" + describe(f) + ")";
}

std::string describe(const stl::Formula& f) {
  using stl::Kind;
  switch (f.kind()) {
    case Kind::Atom: return atom_text(f.as_atom());
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Not: return "it is not the case that " + describe(f.operand());
    case Kind::And: return operand(f.lhs()) + " and " + operand(f.rhs());
    case Kind::Or: return operand(f.lhs()) + " or " + operand(f.rhs());
    case Kind::Implies: return "if " + operand(f.lhs()) + " then " + operand(f.rhs());
    case Kind::Globally: return "At every time in " + interval_text(f.interval()) + ", " + describe(f.operand());
    case Kind::Eventually: return "At some time in " + interval_text(f.interval()) + ", " + describe(f.operand());
    case Kind::Until:
      return operand(f.lhs()) + " holds from now until, at some time in " + interval_text(f.interval()) +
             ", " + operand(f.rhs());
  }
  throw std::logic_error("unhandled formula kind");
}

const char* kBackTranslateScheme =
    "Translation scheme: G[l,u] p -> \"At every time in [l, u] seconds, <p>\"; F[l,u] p -> \"At some "
    "time in [l, u] seconds, <p>\"; p U[l,u] q -> \"<p> holds from now until, at some time in [l, u] "
    "seconds, <q>\"; atoms -> \"signal <name> is above|below|at least|at most <c>\"; connectives -> "
    "\"and\", \"or\", \"if ... then ...\", \"it is not the case that\".";

} // namespace

const char* to_string(Stage s) { return s == Stage::Vagueness ? "Vagueness" : "Ambiguity"; }

std::string normalize_query(std::string_view raw) {
  std::string s = unquote(strip_label(trim(raw), {"query", "question", "clarification query", "reference query"}));
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || std::isspace(static_cast<unsigned char>(s.back())))) {
    s.pop_back();
  }
  if (s.empty()) throw ClarificationError("empty clarification query");
  if (s.back() != '?') s.push_back('?');
  return s;
}

Requirement Requirement::make(std::string id, std::string text) {
  if (trim(text).empty()) throw ClarificationError("requirement text is empty");
  Requirement r;
  r.id = std::move(id);
  r.original = std::move(text);
  return r;
}

const std::string& Requirement::text() const {
  return revisions.empty() ? original : revisions.back().text_after;
}

Requirement Requirement::revised(ClarificationQuery query, std::string answer, std::string text_after) const {
  Requirement r = *this;
  r.revisions.push_back(Revision{text(), std::move(query), std::move(answer), std::move(text_after)});
  return r;
}

void Requirement::validate() const {
  if (trim(original).empty()) throw ClarificationError("requirement text is empty");
  const std::string* prev = &original;
  for (std::size_t i = 0; i < revisions.size(); ++i) {
    const auto& rev = revisions[i];
    if (rev.text_before != *prev) {
      throw ClarificationError("revision " + std::to_string(i) + " does not continue the previous text");
    }
    if (rev.query.text.empty() || rev.answer.empty()) {
      throw ClarificationError("revision " + std::to_string(i) + " lacks a query or an answer");
    }
    prev = &rev.text_after;
  }
}

std::optional<stl::Formula> extract_formula(std::string_view reply) {
  const std::string whole = unquote(strip_label(trim(reply), {"stl", "formula", "stl formula", "output", "answer"}));
  if (!whole.empty() && stl::check_syntax(whole).empty()) return stl::parse(whole);
  for (const auto& line : lines_of(reply)) {
    const std::string cand = unquote(strip_label(line, {"stl", "formula", "stl formula", "output", "answer"}));
    if (!cand.empty() && stl::check_syntax(cand).empty()) return stl::parse(cand);
  }
  return std::nullopt;
}

std::optional<ClarificationQuery> generate_vagueness_query(const Requirement& requirement, DefectType vtype,
                                                           llm::CompletionBackend& backend) {
  const auto demos = vagueness_demos(vtype);
  std::string system =
      "Instruction: the requirement below is incomplete; it lacks " + std::string(dataset::to_string(vtype)) +
      " information needed to write an STL formula. Think step by step about what is missing, then ask "
      "the user one precise question that would supply it. Focus only on the " +
      dataset::to_string(vtype) +
      " vagueness type and ignore every other issue. If the requirement does not contain vagueness of "
      "this type, reply exactly: does not contain vagueness.\n"
      "Output: the question only.\n\nDemonstrations:\n";
  for (const auto& d : demos) {
    system += std::string("Reference Requirement: ") + d.requirement + "\nIncompleteness Reason: " + d.reason +
              "\nReference Query: " + d.query + "\n";
  }
  const std::string reply = backend.complete(
      request("vagueness_query", requirement.round(), std::move(system),
              "Requirement Input: " + requirement.text() + "\nVagueness type: " + dataset::to_string(vtype)));
  if (trim(reply).empty()) throw ClarificationError("empty reply from the vagueness inquirer");
  if (escape_reply(reply, "does not contain vagueness")) return std::nullopt;
  ClarificationQuery q;
  q.stage = Stage::Vagueness;
  q.text = normalize_query(reply);
  q.defect = vtype;
  return q;
}

CandidateSet sample_candidates(const Requirement& requirement, std::size_t n, llm::CompletionBackend& backend,
                               double temperature) {
  if (n == 0) throw ClarificationError("candidate count must be at least 1");
  const auto req = request("sample_candidates", requirement.round(),
                           std::string(kTransformSystem) + "\n" + kTransformDemos,
                           "Requirement Input: " + requirement.text(), temperature);
  CandidateSet set;
  set.n = n;
  for (std::size_t attempt = 0; attempt < 3 * n && set.formulas.size() < n; ++attempt) {
    if (auto f = extract_formula(backend.complete(req))) set.formulas.push_back(*f);
  }
  if (set.formulas.empty()) {
    throw ClarificationError("no parseable candidate among " + std::to_string(3 * n) + " samples");
  }
  return set;
}

std::string back_translate(const stl::Formula& formula) { return describe(formula); }

std::string back_translate(const stl::Formula& formula, llm::CompletionBackend& backend, int round) {
  const std::string reply = backend.complete(
      request("back_translate", round,
              std::string("Instruction: describe the STL formula in English using exactly this fixed scheme.\n") +
                  kBackTranslateScheme + "\nOutput: the description only.",
              "Formula: " + stl::render(formula)));
  const std::string text = unquote(strip_label(reply, {"description"}));
  if (text.empty()) throw ClarificationError("empty back-translation");
  return text;
}

DiscrepancyReport parse_discrepancy_report(const std::string& reply) {
  const auto open = reply.find_first_of("{[");
  const auto close = reply.find_last_of("}]");
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw ClarificationError("discrepancy report is not JSON");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply.substr(open, close - open + 1));
  } catch (const nlohmann::json::parse_error& e) {
    throw ClarificationError(std::string("malformed discrepancy report: ") + e.what());
  }
  const nlohmann::json* points = &j;
  if (j.is_object()) {
    if (!j.contains("divergence_points")) throw ClarificationError("report lacks 'divergence_points'");
    points = &j["divergence_points"];
  }
  if (!points->is_array()) throw ClarificationError("'divergence_points' must be an array");
  DiscrepancyReport report;
  for (const auto& p : *points) {
    if (!p.is_object() || !p.contains("aspect") || !p["aspect"].is_string() || !p.contains("interpretations") ||
        !p["interpretations"].is_array()) {
      throw ClarificationError("divergence point needs 'aspect' and 'interpretations'");
    }
    DivergencePoint dp;
    dp.aspect = trim(p["aspect"].get<std::string>());
    for (const auto& i : p["interpretations"]) {
      if (!i.is_string()) throw ClarificationError("interpretations must be strings");
      std::string s = trim(i.get<std::string>());
      if (std::find(dp.interpretations.begin(), dp.interpretations.end(), s) == dp.interpretations.end()) {
        dp.interpretations.push_back(std::move(s));
      }
    }
    if (dp.aspect.empty()) throw ClarificationError("divergence point has an empty aspect");
    if (dp.interpretations.size() < 2) {
      throw ClarificationError("divergence point '" + dp.aspect + "' has fewer than two distinct interpretations");
    }
    report.divergence_points.push_back(std::move(dp));
  }
  return report;
}

DiscrepancyReport analyze_discrepancies(const Requirement& requirement, const std::vector<std::string>& descriptions,
                                        llm::CompletionBackend& backend) {
  if (descriptions.empty()) throw ClarificationError("no candidate descriptions to analyze");
  if (std::all_of(descriptions.begin(), descriptions.end(),
                  [&](const std::string& d) { return d == descriptions.front(); })) {
    return {};
  }
  std::string user = "Requirement Input: " + requirement.text() + "\nCandidate descriptions:\n";
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    user += std::to_string(i + 1) + ". " + descriptions[i] + "\n";
  }
  const std::string reply = backend.complete(request(
      "analyze_discrepancies", requirement.round(),
      "Instruction: the descriptions below were produced from different candidate formalizations of the "
      "same requirement. Identify every point where they diverge and state, for each, the aspect of the "
      "requirement it concerns and the competing interpretations.\n"
      "Output: a JSON object {\"divergence_points\": [{\"aspect\": \"...\", \"interpretations\": [\"...\", "
      "\"...\"]}]}; an empty list when they agree.",
      std::move(user)));
  return parse_discrepancy_report(reply);
}

std::optional<ClarificationQuery> generate_ambiguity_query(const Requirement& requirement,
                                                           const DiscrepancyReport& report,
                                                           llm::CompletionBackend& backend) {
  if (report.empty()) throw ClarificationError("ambiguity query needs a non-empty discrepancy report");
  std::string user = "Requirement Input: " + requirement.text() + "\nDivergence points:\n";
  for (std::size_t i = 0; i < report.divergence_points.size(); ++i) {
    const auto& p = report.divergence_points[i];
    user += std::to_string(i + 1) + ". " + p.aspect + ":";
    for (const auto& s : p.interpretations) user += " [" + s + "]";
    user += "\n";
  }
  const std::string reply = backend.complete(request(
      "ambiguity_query", requirement.round(),
      "Instruction: ask the user one precise question that resolves the divergence points identified in "
      "the analysis below. Only ask about those divergence points, and name the aspect you ask about. If "
      "the requirement does not contain ambiguity, reply exactly: does not contain ambiguity.\n"
      "Output: the question only.",
      std::move(user)));
  if (trim(reply).empty()) throw ClarificationError("empty reply from the ambiguity inquirer");
  if (escape_reply(reply, "does not contain ambiguity")) return std::nullopt;
  ClarificationQuery q;
  q.stage = Stage::Ambiguity;
  q.text = normalize_query(reply);
  for (std::size_t i = 0; i < report.divergence_points.size(); ++i) {
    if (contains_ci(q.text, report.divergence_points[i].aspect)) {
      q.divergence_point = i;
      break;
    }
  }
  if (!q.divergence_point) {
    q.divergence_point = 0;
    q.text = "Regarding " + report.divergence_points.front().aspect + ": " + q.text;
  }
  return q;
}

Requirement refine_requirement(const Requirement& requirement, const ClarificationQuery& query,
                               const std::string& answer, llm::CompletionBackend& backend) {
  if (trim(answer).empty()) throw ClarificationError("answer is empty");
  const std::string reply = backend.complete(request(
      "refine", requirement.round(),
      "Instruction: rewrite the requirement so that it incorporates the user's answer to the query. "
      "Conditions: (1) preserve all original content; (2) modify only the fragment the user clarified; "
      "(3) introduce no constraint the user did not confirm. If the answer does not address the query, "
      "reply exactly: RESTATE.\n"
      "Output: the revised requirement only.",
      "Requirement Input: " + requirement.text() + "\nQuery: " + query.text + "\nAnswer: " + trim(answer)));
  const std::string text = unquote(strip_label(reply, {"revised requirement", "requirement", "output"}));
  if (text == "RESTATE" || text.rfind("RESTATE", 0) == 0) {
    throw UnusableAnswer("the answer does not address the query; please restate it");
  }
  if (text.empty()) throw ClarificationError("empty reply from the refiner");
  return requirement.revised(query, trim(answer), text);
}

stl::Formula transform_to_stl(const Requirement& requirement, llm::CompletionBackend& backend) {
  const auto req = request("transform", requirement.round(), std::string(kTransformSystem) + "\n" + kTransformDemos,
                           "Requirement Input: " + requirement.text());
  std::string last;
  for (int attempt = 0; attempt < 2; ++attempt) {
    last = backend.complete(req);
    if (auto f = extract_formula(last)) return *f;
  }
  throw ClarificationError("transformation reply is not a valid STL formula after retry: '" + trim(last) + "'");
}

} // namespace clarifystl::clarification
