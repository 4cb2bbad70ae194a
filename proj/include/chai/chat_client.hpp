// OpenAI-compatible chat-completion client with retry/backoff and a JSONL
// audit log of every call.

#ifndef CHAI_CHAT_CLIENT_HPP_
#define CHAI_CHAT_CLIENT_HPP_

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "chai/text.hpp"

namespace chai::annotator {

/// Network failure that persisted through every retry, or an unusable
/// response body.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Non-retryable 4xx response (bad key, unknown model, malformed request).
class RequestRejected : public ConfigError {
 public:
  RequestRejected(int status, const std::string& msg) : ConfigError(msg), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

/// Anything that can answer a chat-completion request.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages, double temperature) = 0;
  virtual std::string model_name() const = 0;
};

/// Thread-safe append-only JSONL log.
class AuditLog {
 public:
  explicit AuditLog(const std::string& path);
  void append(const std::string& json_line);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

struct HttpClientOptions {
  std::string endpoint_url;  // e.g. https://api.openai.com/v1
  std::string model_name;
  std::string api_key_env = "OPENAI_API_KEY";
  int max_retries = 5;
  std::chrono::milliseconds backoff_initial{500};
  double backoff_multiplier = 2.0;
  std::chrono::seconds timeout{60};
  std::uint64_t jitter_seed = 0;
};

/// POST {endpoint}/chat/completions with a bearer token read from the
/// configured environment variable. 429 and 5xx responses and connection
/// failures are retried with exponential backoff and jitter; other 4xx
/// responses are raised immediately as RequestRejected.
class HttpChatClient : public ChatBackend {
 public:
  /// Throws ConfigError naming the variable when the API key is unset.
  explicit HttpChatClient(HttpClientOptions options, std::shared_ptr<AuditLog> audit = nullptr);

  std::string complete(const std::vector<ChatMessage>& messages, double temperature) override;
  std::string model_name() const override { return options_.model_name; }

  /// Replaces the sleep used between retries (tests).
  void set_sleep(std::function<void(std::chrono::milliseconds)> sleep) { sleep_ = std::move(sleep); }

 private:
  HttpClientOptions options_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string base_path_;
  std::shared_ptr<AuditLog> audit_;
  std::function<void(std::chrono::milliseconds)> sleep_;
  std::mutex jitter_mu_;
  std::uint64_t jitter_state_;
};

/// Builds the JSON request body.
std::string chat_request_body(const std::string& model, const std::vector<ChatMessage>& messages,
                              double temperature);

/// Extracts choices[0].message.content; throws TransportError when absent.
std::string parse_chat_response(const std::string& body);

std::string utc_timestamp();

}  // namespace chai::annotator

#endif  // CHAI_CHAT_CLIENT_HPP_
