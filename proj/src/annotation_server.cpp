#include "chai/annotation_server.hpp"

#include <httplib.h>

#include <filesystem>

namespace chai::service {
namespace {

struct Caller {
  bool admin = false;
  std::string annotator_id;  // empty for the admin token
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

}  // namespace

void ServerConfig::validate() const {
  if (port < 0 || port > 65535) throw ConfigError("port must be in [0, 65535]");
  if (annotator_tokens.empty()) throw ConfigError("at least one annotator token is required");
  for (const auto& [token, id] : annotator_tokens) {
    if (token.empty() || id.empty()) throw ConfigError("annotator tokens and ids must be non-empty");
    if (token == admin_token) throw ConfigError("admin token must differ from annotator tokens");
  }
  if (admin_token.empty()) throw ConfigError("admin_token is required");
}

ServerConfig server_config_from_json(const json& j) {
  ServerConfig c;
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  c.admin_token = j.value("admin_token", "");
  c.static_dir = j.value("static_dir", "");
  if (j.contains("annotators")) {
    for (const auto& [id, token] : j.at("annotators").items()) c.annotator_tokens[token.get<std::string>()] = id;
  }
  c.validate();
  return c;
}

json client_payload(const AnnotationTask& task, const ProgressEntry& progress, const std::string& rubric,
                    const std::string& rubric_version) {
  return json{{"task_id", task.task_id},
              {"source_text", task.source_text},
              {"option_first", task.displayed_first()},
              {"option_second", task.displayed_second()},
              {"rubric_text", rubric},
              {"rubric_version", rubric_version},
              {"progress", {{"done", progress.done}, {"total", progress.total}}}};
}

struct AnnotationServer::Impl {
  AnnotationStore& store;
  ServerConfig config;
  httplib::Server server;
  std::thread thread;

  Impl(AnnotationStore& s, ServerConfig c) : store(s), config(std::move(c)) {}

  std::vector<std::string> annotators() const {
    std::vector<std::string> ids;
    for (const auto& [token, id] : config.annotator_tokens) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

  std::optional<Caller> authenticate(const httplib::Request& req) const {
    const std::string header = req.get_header_value("Authorization");
    constexpr std::string_view kPrefix = "Bearer ";
    if (header.size() <= kPrefix.size() || header.compare(0, kPrefix.size(), kPrefix) != 0) return std::nullopt;
    const std::string token = header.substr(kPrefix.size());
    if (token == config.admin_token) return Caller{true, ""};
    auto it = config.annotator_tokens.find(token);
    if (it == config.annotator_tokens.end()) return std::nullopt;
    return Caller{false, it->second};
  }

  // Wraps a handler with authentication and error mapping.
  template <typename F>
  httplib::Server::Handler guarded(F handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      const auto caller = authenticate(req);
      if (!caller) {
        res.set_header("WWW-Authenticate", "Bearer");
        send_error(res, 401, "missing or invalid bearer token");
        return;
      }
      try {
        handler(*caller, req, res);
      } catch (const InvalidRequest& e) {
        send_error(res, 400, e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, std::string("malformed request: ") + e.what());
      } catch (const NotFound& e) {
        send_error(res, 404, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  void routes() {
    server.Get("/api/tasks/next", guarded([this](const Caller& caller, const httplib::Request& req,
                                                 httplib::Response& res) {
      std::string id = req.has_param("annotator") ? req.get_param_value("annotator") : caller.annotator_id;
      if (caller.admin) return send_error(res, 403, "the admin token cannot annotate");
      if (id != caller.annotator_id) return send_error(res, 403, "token does not belong to annotator '" + id + "'");
      const auto task = store.next_task(id);
      if (!task) {
        res.status = 204;
        return;
      }
      const auto progress = store.progress({id}).at(id);
      send_json(res, 200, client_payload(*task, progress, rubric_text(), store.rubric_version()));
    }));

    server.Post("/api/labels", guarded([this](const Caller& caller, const httplib::Request& req,
                                              httplib::Response& res) {
      const json body = json::parse(req.body);
      if (!body.is_object()) throw InvalidRequest("body must be a JSON object");
      const std::string task_id = body.at("task_id").get<std::string>();
      const std::string annotator_id = body.value("annotator_id", caller.annotator_id);
      if (caller.admin) return send_error(res, 403, "the admin token cannot annotate");
      if (annotator_id != caller.annotator_id) {
        return send_error(res, 403, "token does not belong to annotator '" + annotator_id + "'");
      }
      const auto choice = parse_display_choice(body.at("choice").get<std::string>());
      const auto ack = store.submit_label(task_id, annotator_id, choice);
      // The canonical choice stays server-side: with the displayed choice it
      // would reveal the display order.
      send_json(res, 200, json{{"status", "stored"},
                               {"task_id", ack.task_id},
                               {"annotator_id", ack.annotator_id},
                               {"choice", to_string(choice)},
                               {"replaced", ack.replaced},
                               {"duplicate", ack.duplicate}});
    }));

    server.Get("/api/progress", guarded([this](const Caller& caller, const httplib::Request&,
                                               httplib::Response& res) {
      json per = json::object();
      for (const auto& [id, p] : store.progress(annotators())) {
        if (caller.admin || id == caller.annotator_id) per[id] = {{"done", p.done}, {"total", p.total}};
      }
      send_json(res, 200, json{{"annotators", per}, {"tasks", store.tasks().size()}});
    }));

    server.Get("/api/export", guarded([this](const Caller& caller, const httplib::Request&,
                                             httplib::Response& res) {
      if (!caller.admin) return send_error(res, 403, "export requires the admin token");
      res.status = 200;
      res.set_content(store.aggregated_jsonl(), "application/x-ndjson");
    }));

    if (!config.static_dir.empty()) {
      if (!std::filesystem::is_directory(config.static_dir)) {
        throw ConfigError("static_dir '" + config.static_dir + "' is not a directory");
      }
      server.set_mount_point("/", config.static_dir);
    }
  }
};

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerConfig config)
    : impl_(std::make_unique<Impl>(store, std::move(config))) {
  impl_->config.validate();
  impl_->routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::start() {
  int port = impl_->config.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(impl_->config.host);
  } else if (!impl_->server.bind_to_port(impl_->config.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error("cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void AnnotationServer::run() {
  if (!impl_->server.listen(impl_->config.host, impl_->config.port)) {
    throw Error("cannot listen on " + impl_->config.host + ":" + std::to_string(impl_->config.port));
  }
}

void AnnotationServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace chai::service
