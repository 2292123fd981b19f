#include "clarifystl/detection/detection.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

namespace clarifystl::detection {

namespace {

std::string trim_lower(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\"'`.");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n\"'`.");
  std::string out(s.substr(b, e - b + 1));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<DefectType> type_name(std::string word) {
  word.erase(std::remove_if(word.begin(), word.end(),
                            [](unsigned char c) { return std::isspace(c) != 0 || c == '_' || c == '-'; }),
             word.end());
  std::string low = word;
  for (char& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low == "temporal") return DefectType::Temporal;
  if (low == "numerical" || low == "numeric") return DefectType::Numerical;
  if (low == "conditional" || low == "conditionallogic" || low == "logic") return DefectType::ConditionalLogic;
  if (low == "referential") return DefectType::Referential;
  if (low == "semantic") return DefectType::Semantic;
  return std::nullopt;
}

DetectionResult finish(bool defective, std::set<DefectType> types, bool ambiguity,
                       std::optional<std::string> rationale) {
  for (DefectType t : types) {
    if (dataset::is_vagueness(t) == ambiguity) {
      throw DetectionParseError(std::string("type ") + dataset::to_string(t) +
                                " does not belong to this detector");
    }
  }
  DetectionResult r;
  r.is_defective = defective;
  if (defective) r.types = std::move(types);
  r.confidence = defective ? 1.0 : 0.0;
  r.rationale = std::move(rationale);
  return r;
}

const char* kVaguenessInstruction =
    "Instruction: determine whether the natural language requirement below is incomplete, "
    "i.e. whether information needed to write it as an STL formula is missing. If it is, "
    "classify the type of vagueness as one or more of Temporal (missing or imprecise time "
    "bounds), Numerical (missing or imprecise thresholds) and ConditionalLogic (missing or "
    "unclear logical relationship between conditions).\n"
    "Output: a JSON object {\"vague\": true|false, \"types\": [...], \"rationale\": \"...\"}.";

const char* kAmbiguityInstruction =
    "Instruction: determine whether the natural language requirement below admits two or more "
    "distinct plausible STL interpretations. If it does, classify the ambiguity as Referential "
    "(unclear which signal is meant) and/or Semantic (unclear meaning or scope).\n"
    "Output: a JSON object {\"ambiguous\": true|false, \"types\": [...], \"rationale\": \"...\"}.";

DetectionResult ask(const std::string& requirement, llm::CompletionBackend& backend, int round,
                    bool ambiguity) {
  llm::CompletionRequest req;
  req.operation_tag = ambiguity ? "detect_ambiguity" : "detect_vagueness";
  req.round = round;
  req.messages = {{llm::Role::System, ambiguity ? kAmbiguityInstruction : kVaguenessInstruction},
                  {llm::Role::User, "Requirement Input: " + requirement}};
  std::string last;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = backend.complete(req);
    try {
      return parse_detection_reply(reply, ambiguity);
    } catch (const DetectionParseError& e) {
      last = e.what();
    }
  }
  throw DetectionParseError("unreadable detector reply after retry: " + last);
}

} // namespace

DetectionResult parse_detection_reply(const std::string& reply, bool ambiguity) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(reply.substr(open, close - open + 1));
    } catch (const nlohmann::json::parse_error& e) {
      throw DetectionParseError(std::string("malformed JSON verdict: ") + e.what());
    }
    const char* key = ambiguity ? "ambiguous" : "vague";
    const char* flag = j.contains(key) ? key : (j.contains("defective") ? "defective" : nullptr);
    if (flag == nullptr || !j[flag].is_boolean()) {
      throw DetectionParseError(std::string("verdict lacks a boolean '") + key + "' field");
    }
    std::set<DefectType> types;
    if (j.contains("types")) {
      if (!j["types"].is_array()) throw DetectionParseError("'types' must be an array");
      for (const auto& t : j["types"]) {
        if (!t.is_string()) throw DetectionParseError("type names must be strings");
        auto ty = type_name(t.get<std::string>());
        if (!ty) throw DetectionParseError("unknown type '" + t.get<std::string>() + "'");
        types.insert(*ty);
      }
    }
    std::optional<std::string> rationale;
    if (j.contains("rationale") && j["rationale"].is_string()) rationale = j["rationale"].get<std::string>();
    return finish(j[flag].get<bool>(), j[flag].get<bool>() ? types : std::set<DefectType>{},
                  ambiguity, rationale);
  }

  const std::string text = trim_lower(reply);
  static const char* const negatives[] = {"complete", "none", "no", "clean", "not vague",
                                          "no vagueness", "not ambiguous", "no ambiguity",
                                          "unambiguous", "does not contain vagueness",
                                          "does not contain ambiguity"};
  for (const char* n : negatives) {
    if (text == n) return finish(false, {}, ambiguity, std::nullopt);
  }
  std::set<DefectType> types;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    auto t = type_name(word);
    if (!t) throw DetectionParseError("unreadable detector reply: '" + reply + "'");
    types.insert(*t);
    word.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ';' || c == '/' || c == '\n' || c == ' ') {
      flush();
    } else {
      word.push_back(c);
    }
  }
  flush();
  if (types.empty()) throw DetectionParseError("empty detector reply");
  return finish(true, types, ambiguity, std::nullopt);
}

DetectionResult rule_detect_vagueness(std::string_view requirement, const dataset::PhraseLexicon& lex) {
  std::set<DefectType> types;
  if (dataset::temporal_cue(requirement, lex)) types.insert(DefectType::Temporal);
  if (dataset::numerical_cue(requirement, lex)) types.insert(DefectType::Numerical);
  if (dataset::conditional_cue(requirement, lex)) types.insert(DefectType::ConditionalLogic);
  DetectionResult r;
  r.is_defective = !types.empty();
  r.confidence = r.is_defective ? 1.0 : 0.0;
  r.types = std::move(types);
  return r;
}

DetectionResult rule_detect_ambiguity(std::string_view requirement, const dataset::PhraseLexicon& lex) {
  DetectionResult r;
  for (const auto& p : lex.referential) {
    if (dataset::contains_phrase(requirement, p)) {
      r.is_defective = true;
      r.types = {DefectType::Referential};
      r.confidence = 1.0;
      r.rationale = "referring expression '" + p + "'";
      break;
    }
  }
  return r;
}

DetectionResult detect_vagueness(const std::string& requirement, llm::CompletionBackend& backend, int round) {
  return ask(requirement, backend, round, false);
}

DetectionResult detect_ambiguity(const std::string& requirement, llm::CompletionBackend& backend, int round) {
  return ask(requirement, backend, round, true);
}

} // namespace clarifystl::detection
