#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "clarifystl/clarification/session.hpp"

namespace httplib {
class Server;
}

namespace clarifystl::clarification {

/// A session together with the collaborators it borrows. `owned` is kept
/// alive for the session's lifetime.
struct HostedSession {
  std::shared_ptr<void> owned;
  std::unique_ptr<Session> session;
};

/// Builds a fresh session (and its detectors/backends) for a requirement.
using SessionFactory = std::function<HostedSession(Requirement)>;

struct ApiResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

/**
 * Transport-independent session API. Distinct sessions proceed
 * concurrently; calls on one session are serialized.
 *
 *   create(body)          201 {session_id, phase, pending_query} | 400 | 422
 *   state(id)             200 full state | 404
 *   answer(id, body)      200 state | 400 | 404 | 409 no pending query | 422 empty answer
 *   result(id)            200 {final_requirement, stl} | 404 | 409 not Done
 */
class SessionRegistry {
 public:
  explicit SessionRegistry(SessionFactory factory) : factory_(std::move(factory)) {}

  ApiResponse create(const std::string& body);
  ApiResponse state(const std::string& id);
  ApiResponse answer(const std::string& id, const std::string& body);
  ApiResponse result(const std::string& id);

  std::size_t size() const;

 private:
  struct Entry {
    std::mutex mu;
    HostedSession hosted;
  };
  std::shared_ptr<Entry> find(const std::string& id) const;

  SessionFactory factory_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t next_id_ = 1;
};

nlohmann::ordered_json session_state_json(const std::string& id, const Session& s);

/// Mounts the registry under /api/sessions.
void install_routes(httplib::Server& server, SessionRegistry& registry);

} // namespace clarifystl::clarification
