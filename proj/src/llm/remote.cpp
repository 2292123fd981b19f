#include "clarifystl/llm/remote.hpp"

#include <atomic>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace clarifystl::llm {

namespace {

std::atomic<std::uint64_t> g_requests{0};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw BackendError("malformed URL '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string trim_trailing_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

} // namespace

std::uint64_t network_request_count() { return g_requests.load(); }

HttplibTransport::HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttplibTransport::post(const std::string& url,
                                    const std::map<std::string, std::string>& headers,
                                    const std::string& body) {
  ++g_requests;
  SplitUrl u = split_url(url);
  httplib::Client client(u.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(u.path, h, body, "application/json");
  if (!res) return HttpResponse{0, "", httplib::to_string(res.error())};
  return HttpResponse{res->status, res->body, ""};
}

RemoteConfig RemoteConfig::from_environment() {
  RemoteConfig c;
  if (const char* url = std::getenv(kBaseUrlEnv); url && *url) c.base_url = url;
  if (const char* key = std::getenv(kApiKeyEnv); key) c.api_key = key;
  return c;
}

std::string chat_completions_body(const CompletionRequest& request) {
  nlohmann::ordered_json body;
  body["model"] = request.model_id;
  body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : request.messages) {
    nlohmann::ordered_json msg;
    msg["role"] = to_string(m.role);
    msg["content"] = m.content;
    body["messages"].push_back(std::move(msg));
  }
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  return body.dump();
}

RemoteBackend::RemoteBackend(RemoteConfig config,
                             std::shared_ptr<HttpTransport> transport,
                             Sleeper sleeper)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : std::make_shared<HttplibTransport>()),
      sleep_(sleeper ? std::move(sleeper)
                     : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {
  if (config_.max_retries < 0 || config_.max_retries > 3) {
    throw BackendError("max_retries must lie in [0, 3]");
  }
}

std::string RemoteBackend::complete(const CompletionRequest& request) {
  request.validate();
  const std::string url = trim_trailing_slash(config_.base_url) + "/v1/chat/completions";
  const std::string body = chat_completions_body(request);
  std::map<std::string, std::string> headers;
  if (!config_.api_key.empty()) headers["Authorization"] = "Bearer " + config_.api_key;

  std::chrono::milliseconds delay = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleep_(delay);
      delay *= 2;
    }
    HttpResponse res = transport_->post(url, headers, body);
    if (res.status >= 200 && res.status < 300) {
      try {
        auto j = nlohmann::json::parse(res.body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("malformed completion response: ") + e.what());
      }
    }
    const bool transient = res.status == 0 || res.status == 429 || res.status >= 500;
    last_error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status);
    if (!transient) throw BackendError("completion request failed: " + last_error);
  }
  throw BackendError("completion request failed after " + std::to_string(config_.max_retries) +
                     " retries: " + last_error);
}

} // namespace clarifystl::llm
