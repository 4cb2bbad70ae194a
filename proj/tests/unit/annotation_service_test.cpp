#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>

#include "chai/annotation_server.hpp"
#include "chai/annotation_store.hpp"
#include "test_util.hpp"

namespace chai::service {
namespace {

using chai::testing::TempDir;

std::vector<TaskSpec> specs(int n) {
  std::vector<TaskSpec> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({"r" + std::to_string(i) + ":0-1", "Good night " + std::to_string(i),
                   "shubh ratri " + std::to_string(i), "good raat " + std::to_string(i)});
  }
  return out;
}

StoreOptions options(const TempDir& dir) {
  StoreOptions o;
  o.directory = dir.path();
  o.display_seed = 42;
  o.rubric_version = rubric_version();
  o.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  return o;
}

TEST(DisplayChoiceTest, CanonicalMapping) {
  EXPECT_EQ(canonical_choice(DisplayChoice::kFirst, false), 0);
  EXPECT_EQ(canonical_choice(DisplayChoice::kFirst, true), 1);
  EXPECT_EQ(canonical_choice(DisplayChoice::kSecond, true), 0);
  EXPECT_EQ(parse_display_choice("second"), DisplayChoice::kSecond);
  EXPECT_THROW(parse_display_choice("1"), InvalidRequest);
}

HumanLabel label(const std::string& annotator, int canonical) {
  HumanLabel l;
  l.task_id = "t";
  l.annotator_id = annotator;
  l.canonical_choice = canonical;
  return l;
}

TEST(AggregateTest, MajorityTieAndIncomplete) {
  auto a = aggregate("p", {label("x", 1), label("y", 1), label("z", 0)});
  EXPECT_EQ(a.status, AggregateStatus::kMajority);
  EXPECT_EQ(a.majority, 1);
  a = aggregate("p", {label("w", 1), label("x", 1), label("y", 0), label("z", 0)});
  EXPECT_EQ(a.status, AggregateStatus::kUnresolved);
  EXPECT_FALSE(a.majority);
  a = aggregate("p", {label("x", 1), label("y", 1)});
  EXPECT_EQ(a.status, AggregateStatus::kIncomplete);
  EXPECT_EQ(a.labels_count, 2u);
  EXPECT_FALSE(a.majority);
}

TEST(AnnotationStoreTest, QueueAndDisplayOrder) {
  TempDir dir;
  AnnotationStore store(options(dir));
  EXPECT_EQ(store.add_tasks(specs(40)), 40u);
  EXPECT_EQ(store.add_tasks(specs(40)), 0u);
  std::size_t swapped = 0;
  for (const auto& t : store.tasks()) swapped += t.display_swap;
  EXPECT_GT(swapped, 5u);
  EXPECT_LT(swapped, 35u);
  const auto first = store.next_task("ann1");
  ASSERT_TRUE(first);
  EXPECT_EQ(first->pair_id, "r0:0-1");
  store.submit_label(first->task_id, "ann1", DisplayChoice::kFirst);
  EXPECT_EQ(store.next_task("ann1")->pair_id, "r1:0-1");
  EXPECT_EQ(store.next_task("ann2")->pair_id, "r0:0-1");
  EXPECT_THROW(store.submit_label("nope", "ann1", DisplayChoice::kFirst), NotFound);
}

TEST(AnnotationStoreTest, IdempotentResubmissionAndReplacement) {
  TempDir dir;
  AnnotationStore store(options(dir));
  store.add_tasks(specs(1));
  const auto t = *store.next_task("a");
  auto ack = store.submit_label(t.task_id, "a", DisplayChoice::kFirst);
  EXPECT_FALSE(ack.replaced);
  EXPECT_FALSE(ack.duplicate);
  EXPECT_EQ(ack.canonical_choice, t.display_swap ? 1 : 0);
  ack = store.submit_label(t.task_id, "a", DisplayChoice::kFirst);
  EXPECT_TRUE(ack.duplicate);
  ack = store.submit_label(t.task_id, "a", DisplayChoice::kSecond);
  EXPECT_TRUE(ack.replaced);
  ASSERT_EQ(store.labels().size(), 1u);
  EXPECT_EQ(store.labels()[0].choice, DisplayChoice::kSecond);
  EXPECT_EQ(store.labels()[0].canonical_choice, t.display_swap ? 0 : 1);
  // Two events written; the duplicate was not.
  const auto audit = store.audit_jsonl();
  EXPECT_EQ(std::count(audit.begin(), audit.end(), '\n'), 3);
}

TEST(AnnotationStoreTest, SurvivesRestartAndTornLines) {
  TempDir dir;
  std::string task_id;
  {
    AnnotationStore store(options(dir));
    store.add_tasks(specs(3));
    task_id = store.next_task("a")->task_id;
    store.submit_label(task_id, "a", DisplayChoice::kSecond);
  }
  {
    std::ofstream out(dir.file("labels.jsonl"), std::ios::app);
    out << R"({"task_id":")" << task_id << R"(","annotator_id":"b","cho)";
  }
  AnnotationStore store(options(dir));
  EXPECT_EQ(store.tasks().size(), 3u);
  ASSERT_EQ(store.labels().size(), 1u);
  EXPECT_EQ(store.labels()[0].annotator_id, "a");
  EXPECT_NE(store.next_task("a")->task_id, task_id);
  store.submit_label(task_id, "b", DisplayChoice::kFirst);
  AnnotationStore again(options(dir));
  EXPECT_EQ(again.labels().size(), 2u);
}

TEST(AnnotationStoreTest, ExportIsByteIdenticalAcrossReplays) {
  TempDir dir;
  {
    AnnotationStore store(options(dir));
    store.add_tasks(specs(4));
    for (const char* a : {"a", "b", "c"}) {
      while (auto t = store.next_task(a)) {
        store.submit_label(t->task_id, a, t->pair_id[1] == '0' ? DisplayChoice::kFirst : DisplayChoice::kSecond);
      }
    }
  }
  AnnotationStore first(options(dir));
  AnnotationStore second(options(dir));
  EXPECT_EQ(first.aggregated_jsonl(), second.aggregated_jsonl());
  EXPECT_EQ(first.audit_jsonl(), second.audit_jsonl());
  TempDir out;
  first.export_labels(out.path());
  EXPECT_EQ(chai::testing::slurp(out.file("aggregated_labels.jsonl")), first.aggregated_jsonl());
  const auto agg = first.aggregate_labels();
  ASSERT_EQ(agg.size(), 4u);
  for (const auto& a : agg) {
    EXPECT_EQ(a.status, AggregateStatus::kMajority);
    EXPECT_EQ(a.labels_count, 3u);
  }
  const auto progress = first.progress({"a", "z"});
  EXPECT_EQ(progress.at("a").done, 4u);
  EXPECT_EQ(progress.at("z").done, 0u);
  EXPECT_EQ(progress.at("z").total, 4u);
}

TEST(ClientPayloadTest, HidesPairIdentityAndDisplayOrder) {
  AnnotationTask t{"t1", "r:0-1", "s", "first", "second", true};
  const auto j = client_payload(t, {1, 2}, rubric_text(), rubric_version());
  EXPECT_EQ(j["option_first"], "second");
  EXPECT_EQ(j["option_second"], "first");
  for (const char* hidden : {"pair_id", "display_swap", "canonical_first", "canonical_second", "canonical_choice"}) {
    EXPECT_FALSE(j.contains(hidden)) << hidden;
  }
  const auto dumped = j.dump();
  EXPECT_EQ(dumped.find("r:0-1"), std::string::npos);
  EXPECT_EQ(j["progress"]["total"], 2);
}

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    store_ = std::make_unique<AnnotationStore>(options(dir_));
    store_->add_tasks(specs(2));
    ServerConfig c;
    c.port = 0;
    c.annotator_tokens = {{"tok-a", "ann_a"}, {"tok-b", "ann_b"}};
    c.admin_token = "tok-admin";
    server_ = std::make_unique<AnnotationServer>(*store_, c);
    port_ = server_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { server_->stop(); }

  httplib::Headers auth(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }
  httplib::Result post_label(const std::string& token, const nlohmann::json& body) {
    return client_->Post("/api/labels", auth(token), body.dump(), "application/json");
  }

  TempDir dir_;
  std::unique_ptr<AnnotationStore> store_;
  std::unique_ptr<AnnotationServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(ServerTest, FullAnnotationFlow) {
  for (int i = 0; i < 2; ++i) {
    auto res = client_->Get("/api/tasks/next", auth("tok-a"));
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    const auto task = nlohmann::json::parse(res->body);
    EXPECT_FALSE(task.contains("pair_id"));
    EXPECT_EQ(task["rubric_version"], rubric_version());
    EXPECT_EQ(task["progress"]["done"], i);
    res = post_label("tok-a", {{"task_id", task["task_id"]}, {"choice", "first"}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    const auto ack = nlohmann::json::parse(res->body);
    EXPECT_EQ(ack["status"], "stored");
    EXPECT_FALSE(ack.contains("canonical_choice"));
  }
  auto res = client_->Get("/api/tasks/next", auth("tok-a"));
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  res = client_->Get("/api/progress", auth("tok-admin"));
  ASSERT_TRUE(res);
  const auto progress = nlohmann::json::parse(res->body);
  EXPECT_EQ(progress["annotators"]["ann_a"]["done"], 2);
  EXPECT_EQ(progress["annotators"]["ann_b"]["done"], 0);
}

TEST_F(ServerTest, AuthenticationAndAuthorization) {
  auto res = client_->Get("/api/tasks/next");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 401);
  res = client_->Get("/api/tasks/next", auth("wrong"));
  EXPECT_EQ(res->status, 401);
  res = client_->Get("/api/tasks/next?annotator=ann_b", auth("tok-a"));
  EXPECT_EQ(res->status, 403);
  const auto task_id = store_->next_task("ann_a")->task_id;
  res = post_label("tok-a", {{"task_id", task_id}, {"annotator_id", "ann_b"}, {"choice", "first"}});
  EXPECT_EQ(res->status, 403);
  res = post_label("tok-admin", {{"task_id", task_id}, {"choice", "first"}});
  EXPECT_EQ(res->status, 403);
  res = client_->Get("/api/export", auth("tok-a"));
  EXPECT_EQ(res->status, 403);
  EXPECT_TRUE(store_->labels().empty());
}

TEST_F(ServerTest, BadRequests) {
  auto res = post_label("tok-a", {{"task_id", "missing"}, {"choice", "first"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  const auto task_id = store_->next_task("ann_a")->task_id;
  res = post_label("tok-a", {{"task_id", task_id}, {"choice", "0"}});
  EXPECT_EQ(res->status, 400);
  res = client_->Post("/api/labels", auth("tok-a"), "not json", "application/json");
  EXPECT_EQ(res->status, 400);
  res = post_label("tok-a", {{"choice", "first"}});
  EXPECT_EQ(res->status, 400);
}

TEST_F(ServerTest, AdminExportMatchesStore) {
  for (const char* tok : {"tok-a", "tok-b"}) {
    auto res = client_->Get("/api/tasks/next", auth(tok));
    const auto task = nlohmann::json::parse(res->body);
    post_label(tok, {{"task_id", task["task_id"]}, {"choice", "second"}});
  }
  auto res = client_->Get("/api/export", auth("tok-admin"));
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->body, store_->aggregated_jsonl());
  EXPECT_NE(res->body.find("incomplete"), std::string::npos);
}

TEST(ServerConfigTest, Validation) {
  ServerConfig c;
  c.admin_token = "x";
  c.annotator_tokens = {{"x", "a"}};
  EXPECT_THROW(c.validate(), ConfigError);
  const auto parsed = server_config_from_json(
      {{"port", 0}, {"admin_token", "adm"}, {"annotators", {{"ann1", "t1"}}}});
  EXPECT_EQ(parsed.annotator_tokens.at("t1"), "ann1");
}

}  // namespace
}  // namespace chai::service
