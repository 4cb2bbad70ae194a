#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <thread>

#include "chai/chat_client.hpp"
#include "test_util.hpp"

namespace chai::annotator {
namespace {

// Local OpenAI-style endpoint answering with a scripted status sequence.
class ScriptedServer {
 public:
  explicit ScriptedServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      auth_ = req.get_header_value("Authorization");
      body_ = req.body;
      const int status = calls_ < statuses_.size() ? statuses_[calls_] : 200;
      ++calls_;
      res.status = status;
      if (status == 200) {
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"My preference is: 1"}}]})",
                        "application/json");
      } else {
        res.set_content(R"({"error":"scripted"})", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ScriptedServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::size_t calls() {
    std::lock_guard lock(mu_);
    return calls_;
  }
  std::string auth() {
    std::lock_guard lock(mu_);
    return auth_;
  }
  std::string body() {
    std::lock_guard lock(mu_);
    return body_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<int> statuses_;
  std::size_t calls_ = 0;
  std::string auth_;
  std::string body_;
};

HttpClientOptions options_for(const ScriptedServer& s) {
  ::setenv("CHAI_TEST_KEY", "sk-test", 1);
  HttpClientOptions o;
  o.endpoint_url = s.url();
  o.model_name = "m";
  o.api_key_env = "CHAI_TEST_KEY";
  o.max_retries = 3;
  o.backoff_initial = std::chrono::milliseconds(100);
  o.timeout = std::chrono::seconds(5);
  return o;
}

TEST(HttpChatClientTest, RetriesTransientFailuresWithGrowingBackoff) {
  ScriptedServer server({429, 500, 503});
  chai::testing::TempDir dir;
  auto audit = std::make_shared<AuditLog>(dir.file("calls.jsonl"));
  HttpChatClient client(options_for(server), audit);
  std::vector<std::chrono::milliseconds> sleeps;
  client.set_sleep([&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  EXPECT_EQ(client.complete({{"user", "hi"}}, 0.3), "My preference is: 1");
  EXPECT_EQ(server.calls(), 4u);
  ASSERT_EQ(sleeps.size(), 3u);
  EXPECT_LT(sleeps[0], sleeps[2]);
  EXPECT_EQ(server.auth(), "Bearer sk-test");
  const auto body = nlohmann::json::parse(server.body());
  EXPECT_EQ(body["model"], "m");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.3);
  EXPECT_EQ(body["messages"][0]["content"], "hi");
  std::size_t lines = 0;
  std::istringstream in(chai::testing::slurp(dir.file("calls.jsonl")));
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 4u);
}

TEST(HttpChatClientTest, GivesUpAfterMaxRetries) {
  ScriptedServer server({500, 500, 500, 500, 500});
  HttpChatClient client(options_for(server));
  client.set_sleep([](std::chrono::milliseconds) {});
  EXPECT_THROW(client.complete({{"user", "hi"}}, 0.1), TransportError);
  EXPECT_EQ(server.calls(), 4u);
}

TEST(HttpChatClientTest, ClientErrorsAreNotRetried) {
  ScriptedServer server({401});
  HttpChatClient client(options_for(server));
  client.set_sleep([](std::chrono::milliseconds) {});
  try {
    client.complete({{"user", "hi"}}, 0.1);
    FAIL() << "expected RequestRejected";
  } catch (const RequestRejected& e) {
    EXPECT_EQ(e.status(), 401);
  }
  EXPECT_EQ(server.calls(), 1u);
}

TEST(HttpChatClientTest, MissingKeyNamesTheVariable) {
  ::unsetenv("CHAI_TEST_MISSING_KEY");
  HttpClientOptions o;
  o.endpoint_url = "http://127.0.0.1:1/v1";
  o.api_key_env = "CHAI_TEST_MISSING_KEY";
  try {
    HttpChatClient client(o);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("CHAI_TEST_MISSING_KEY"), std::string::npos);
  }
}

TEST(ChatResponseTest, ParsesContentOrThrows) {
  EXPECT_EQ(parse_chat_response(R"({"choices":[{"message":{"content":"x"}}]})"), "x");
  EXPECT_THROW(parse_chat_response(R"({"choices":[]})"), TransportError);
  EXPECT_THROW(parse_chat_response("not json"), TransportError);
}

}  // namespace
}  // namespace chai::annotator
