#include "clarifystl/clarification/server.hpp"

#include <httplib.h>

#include "clarifystl/stl/syntax.hpp"

namespace clarifystl::clarification {

using nlohmann::ordered_json;

namespace {

ApiResponse error(int status, const std::string& message) { return {status, {{"error", message}}}; }

std::optional<ordered_json> parse_body(const std::string& body) {
  try {
    auto j = ordered_json::parse(body);
    if (j.is_object()) return j;
  } catch (const ordered_json::parse_error&) {
  }
  return std::nullopt;
}

ordered_json pending_json(const Session& s) {
  return s.pending_query() ? ordered_json(s.pending_query()->text) : ordered_json(nullptr);
}

} // namespace

ordered_json session_state_json(const std::string& id, const Session& s) {
  ordered_json revisions = ordered_json::array();
  for (const auto& r : s.requirement().revisions) {
    revisions.push_back({{"text_before", r.text_before},
                         {"query", r.query.text},
                         {"stage", to_string(r.query.stage)},
                         {"answer", r.answer},
                         {"text_after", r.text_after}});
  }
  ordered_json j{{"session_id", id},
                 {"phase", to_string(s.phase())},
                 {"iterations",
                  {{"vagueness", s.iterations(Stage::Vagueness)}, {"ambiguity", s.iterations(Stage::Ambiguity)}}},
                 {"requirement", s.requirement().text()},
                 {"original_requirement", s.requirement().original},
                 {"revisions", revisions},
                 {"pending_query", pending_json(s)}};
  j["pending_stage"] = s.pending_query() ? ordered_json(to_string(s.pending_query()->stage)) : ordered_json(nullptr);
  const auto& t = s.transcript();
  j["transcript"] = {{"events", t.size()}, {"last_kind", t.empty() ? ordered_json(nullptr) : ordered_json(t.back().kind)}};
  j["stl"] = s.formula() ? ordered_json(stl::render(*s.formula())) : ordered_json(nullptr);
  j["error"] = s.error() ? ordered_json(*s.error()) : ordered_json(nullptr);
  return j;
}

std::shared_ptr<SessionRegistry::Entry> SessionRegistry::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

ApiResponse SessionRegistry::create(const std::string& body) {
  auto j = parse_body(body);
  if (!j) return error(400, "body must be a JSON object");
  if (!j->contains("requirement") || !(*j)["requirement"].is_string()) {
    return error(422, "field 'requirement' (string) is required");
  }
  const std::string text = (*j)["requirement"].get<std::string>();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return error(422, "requirement is empty");

  std::string id;
  {
    std::lock_guard lock(mu_);
    id = "s" + std::to_string(next_id_++);
  }
  auto entry = std::make_shared<Entry>();
  try {
    entry->hosted = factory_(Requirement::make(id, text));
  } catch (const std::exception& e) {
    return error(500, std::string("could not start session: ") + e.what());
  }
  std::lock_guard entry_lock(entry->mu);
  {
    std::lock_guard lock(mu_);
    sessions_[id] = entry;
  }
  Session& s = *entry->hosted.session;
  s.advance();
  return {201, {{"session_id", id}, {"phase", to_string(s.phase())}, {"pending_query", pending_json(s)}}};
}

ApiResponse SessionRegistry::state(const std::string& id) {
  auto e = find(id);
  if (!e) return error(404, "unknown session '" + id + "'");
  std::lock_guard lock(e->mu);
  return {200, session_state_json(id, *e->hosted.session)};
}

ApiResponse SessionRegistry::answer(const std::string& id, const std::string& body) {
  auto e = find(id);
  if (!e) return error(404, "unknown session '" + id + "'");
  auto j = parse_body(body);
  if (!j) return error(400, "body must be a JSON object");
  if (!j->contains("answer") || !(*j)["answer"].is_string()) return error(422, "field 'answer' (string) is required");
  std::lock_guard lock(e->mu);
  Session& s = *e->hosted.session;
  try {
    s.answer((*j)["answer"].get<std::string>());
  } catch (const NoPendingQuery& ex) {
    return error(409, ex.what());
  } catch (const ClarificationError& ex) {
    return error(422, ex.what());
  }
  return {200, session_state_json(id, s)};
}

ApiResponse SessionRegistry::result(const std::string& id) {
  auto e = find(id);
  if (!e) return error(404, "unknown session '" + id + "'");
  std::lock_guard lock(e->mu);
  const Session& s = *e->hosted.session;
  if (s.phase() != Phase::Done) {
    ApiResponse r = error(409, std::string("session is ") + to_string(s.phase()));
    r.body["phase"] = to_string(s.phase());
    return r;
  }
  return {200, {{"final_requirement", s.requirement().text()}, {"stl", stl::render(*s.formula())}}};
}

void install_routes(httplib::Server& server, SessionRegistry& registry) {
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/api/sessions", [&registry, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, registry.create(req.body));
  });
  server.Get(R"(/api/sessions/([^/]+))", [&registry, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, registry.state(req.matches[1]));
  });
  server.Post(R"(/api/sessions/([^/]+)/answer)",
              [&registry, reply](const httplib::Request& req, httplib::Response& res) {
                reply(res, registry.answer(req.matches[1], req.body));
              });
  server.Get(R"(/api/sessions/([^/]+)/result)",
             [&registry, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, registry.result(req.matches[1]));
             });
}

} // namespace clarifystl::clarification
