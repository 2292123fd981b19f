#pragma once

#include <string>
#include <vector>

#include "clarifystl/error.hpp"

namespace clarifystl::llm {

class BackendError : public Error {
 public:
  using Error::Error;
};

/// Scripted lookup found no reply for the requested key.
class FixtureMiss : public BackendError {
 public:
  using BackendError::BackendError;
};

enum class Role { System, User, Assistant };

const char* to_string(Role r);

struct Message {
  Role role = Role::User;
  std::string content;

  bool operator==(const Message&) const = default;
};

inline constexpr double kDefaultTemperature = 0.0;
inline constexpr int kDefaultMaxTokens = 300;
inline constexpr double kSamplingTemperature = 0.9;

struct CompletionRequest {
  /// Names the calling operation ("transform", "refine", ...).
  std::string operation_tag;
  /// Clarification round the call belongs to. Used only for scripted
  /// matching; never sent over the wire.
  int round = 0;
  std::vector<Message> messages;
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;
  std::string model_id = "gpt-4o";

  /// Throws BackendError on empty messages or out-of-range settings.
  void validate() const;
};

/// Text completion provider. Implementations must be safe to call from
/// several threads for independent requests.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

} // namespace clarifystl::llm
