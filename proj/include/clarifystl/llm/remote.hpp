#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "clarifystl/llm/backend.hpp"

namespace clarifystl::llm {

struct HttpResponse {
  /// 0 when the request never produced a status (connect failure, timeout).
  int status = 0;
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url,
                            const std::map<std::string, std::string>& headers,
                            const std::string& body) = 0;
};

/// cpp-httplib transport; http and https URLs.
class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(60));
  HttpResponse post(const std::string& url,
                    const std::map<std::string, std::string>& headers,
                    const std::string& body) override;

 private:
  std::chrono::seconds timeout_;
};

/// Requests issued by HttplibTransport in this process.
std::uint64_t network_request_count();

inline constexpr const char* kApiKeyEnv = "CLARIFYSTL_API_KEY";
inline constexpr const char* kBaseUrlEnv = "CLARIFYSTL_BASE_URL";
inline constexpr const char* kDefaultBaseUrl = "https://api.openai.com";

struct RemoteConfig {
  std::string base_url = kDefaultBaseUrl;
  std::string api_key;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};

  /// Reads CLARIFYSTL_BASE_URL and CLARIFYSTL_API_KEY.
  static RemoteConfig from_environment();
};

/// Canonical chat-completions body: model, messages, temperature,
/// max_tokens in that order. Byte-stable for equal requests.
std::string chat_completions_body(const CompletionRequest& request);

/// Client for an OpenAI-compatible `POST {base}/v1/chat/completions`.
///
/// Transport failures, 429 and 5xx are retried up to max_retries times with
/// doubling delays. Other statuses fail immediately.
class RemoteBackend : public CompletionBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit RemoteBackend(RemoteConfig config,
                         std::shared_ptr<HttpTransport> transport = nullptr,
                         Sleeper sleeper = nullptr);

  std::string complete(const CompletionRequest& request) override;

 private:
  RemoteConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleep_;
};

} // namespace clarifystl::llm
