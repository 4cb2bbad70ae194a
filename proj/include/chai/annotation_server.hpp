// HTTP JSON API over an AnnotationStore, authenticated with static bearer
// tokens. Task payloads carry only what an annotator needs to see.

#ifndef CHAI_ANNOTATION_SERVER_HPP_
#define CHAI_ANNOTATION_SERVER_HPP_

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <string>
#include <thread>

#include "chai/annotation_store.hpp"

namespace chai::service {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 = any free port
  std::map<std::string, std::string> annotator_tokens;  // token -> annotator id
  std::string admin_token;
  std::string static_dir;  // served at / when set

  /// Throws ConfigError.
  void validate() const;
};

ServerConfig server_config_from_json(const json& j);

/// The task as sent to a client.
json client_payload(const AnnotationTask& task, const ProgressEntry& progress,
                    const std::string& rubric, const std::string& rubric_version);

class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, ServerConfig config);
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chai::service

#endif  // CHAI_ANNOTATION_SERVER_HPP_
