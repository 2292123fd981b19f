#include "clarifystl/llm/backend.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "clarifystl/llm/scripted.hpp"

namespace clarifystl::llm {

const char* to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

void CompletionRequest::validate() const {
  if (messages.empty()) throw BackendError("completion request has no messages");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw BackendError("temperature must lie in [0, 2]");
  }
  if (max_tokens <= 0) throw BackendError("max_tokens must be positive");
}

// ---------------------------------------------------------------------------
// Scripted fixtures

void ScriptedFixture::add(std::string tag, int round, std::string reply) {
  entries[{std::move(tag), round}].push_back(std::move(reply));
}

std::size_t ScriptedFixture::size() const {
  std::size_t n = 0;
  for (const auto& [key, replies] : entries) n += replies.size();
  return n;
}

ScriptedFixture parse_fixture(std::istream& in) {
  ScriptedFixture fx;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw BackendError("fixture line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("tag") || !j["tag"].is_string() ||
        !j.contains("reply") || !j["reply"].is_string() ||
        (j.contains("round") && !j["round"].is_number_integer())) {
      throw BackendError("fixture line " + std::to_string(lineno) +
                         ": expected {\"tag\": string, \"round\": int, \"reply\": string}");
    }
    fx.add(j["tag"].get<std::string>(), j.value("round", 0), j["reply"].get<std::string>());
  }
  return fx;
}

ScriptedFixture load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendError("cannot open fixture " + path.string());
  return parse_fixture(in);
}

void write_fixture(std::ostream& out, const ScriptedFixture& fixture) {
  for (const auto& [key, replies] : fixture.entries) {
    for (const auto& reply : replies) {
      nlohmann::ordered_json j;
      j["tag"] = key.first;
      j["round"] = key.second;
      j["reply"] = reply;
      out << j.dump() << '\n';
    }
  }
}

ScriptedBackend::ScriptedBackend(ScriptedFixture fixture) : fixture_(std::move(fixture)) {}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  request.validate();
  std::lock_guard lock(mu_);
  ++calls_;
  ++calls_by_tag_[request.operation_tag];
  const ScriptedFixture::Key key{request.operation_tag, request.round};
  auto it = fixture_.entries.find(key);
  if (it == fixture_.entries.end()) {
    throw FixtureMiss("no scripted reply for tag '" + request.operation_tag + "' round " +
                      std::to_string(request.round));
  }
  std::size_t& cur = cursor_[key];
  if (cur >= it->second.size()) {
    throw FixtureMiss("scripted replies exhausted for tag '" + request.operation_tag +
                      "' round " + std::to_string(request.round));
  }
  return it->second[cur++];
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t ScriptedBackend::calls(const std::string& tag) const {
  std::lock_guard lock(mu_);
  auto it = calls_by_tag_.find(tag);
  return it == calls_by_tag_.end() ? 0 : it->second;
}

} // namespace clarifystl::llm
