#include "chai/chat_client.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <thread>

#include "chai/rng.hpp"

namespace chai::annotator {

using json = nlohmann::json;

AuditLog::AuditLog(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open audit log: " + path);
}

void AuditLog::append(const std::string& json_line) {
  std::lock_guard lock(mu_);
  out_ << json_line << '\n';
  out_.flush();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

std::string chat_request_body(const std::string& model, const std::vector<ChatMessage>& messages,
                              double temperature) {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model", model}, {"messages", msgs}, {"temperature", temperature}}.dump();
}

std::string parse_chat_response(const std::string& body) {
  try {
    const json j = json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("unusable chat-completion response: ") + e.what());
  }
}

HttpChatClient::HttpChatClient(HttpClientOptions options, std::shared_ptr<AuditLog> audit)
    : options_(std::move(options)),
      audit_(std::move(audit)),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      jitter_state_(options_.jitter_seed) {
  const char* key = std::getenv(options_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("API key environment variable '" + options_.api_key_env + "' is not set");
  }
  api_key_ = key;

  const std::string& url = options_.endpoint_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint_url must include a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages, double temperature) {
  const std::string body = chat_request_body(options_.model_name, messages, temperature);
  const std::string path = base_path_ + "/chat/completions";

  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  const httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

  auto log = [&](int attempt, int status, const std::string& response, const std::string& error) {
    if (!audit_) return;
    json entry{{"timestamp", utc_timestamp()}, {"model", options_.model_name},
               {"temperature", temperature}, {"attempt", attempt},
               {"request", json::parse(body)}, {"status", status},
               {"response", response}};
    if (!error.empty()) entry["error"] = error;
    audit_->append(entry.dump());
  };

  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      double jitter;
      {
        std::lock_guard lock(jitter_mu_);
        Rng rng(derive_seed(jitter_state_++, "backoff"));
        jitter = 0.5 + 0.5 * rng.uniform();
      }
      const double delay = static_cast<double>(options_.backoff_initial.count()) *
                           std::pow(options_.backoff_multiplier, attempt - 1) * jitter;
      sleep_(std::chrono::milliseconds(static_cast<long long>(std::llround(delay))));
    }
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      log(attempt, 0, "", last_error);
      continue;
    }
    const int status = res->status;
    if (status == 200) {
      std::string content;
      try {
        content = parse_chat_response(res->body);
      } catch (const TransportError& e) {
        log(attempt, status, res->body, e.what());
        throw;
      }
      log(attempt, status, content, "");
      return content;
    }
    log(attempt, status, res->body, "");
    if (status == 429 || status >= 500) {
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    throw RequestRejected(status, "chat endpoint rejected request with HTTP " +
                                      std::to_string(status) + ": " + res->body);
  }
  throw TransportError("chat request failed after " + std::to_string(options_.max_retries + 1) +
                       " attempts: " + last_error);
}

}  // namespace chai::annotator
