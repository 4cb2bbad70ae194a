#include "chai/annotation_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <sstream>

#include "chai/chat_client.hpp"
#include "chai/prompt_template.hpp"
#include "chai/rng.hpp"

namespace chai::service {
namespace fs = std::filesystem;

namespace {

constexpr const char* kTasksFile = "tasks.jsonl";
constexpr const char* kLabelsFile = "labels.jsonl";

// Lines of a JSONL file. A torn final line (no trailing newline, e.g. after a
// crash mid-append) is cut off so the next append starts cleanly.
std::vector<json> replay(const fs::path& path) {
  std::vector<json> out;
  if (!fs::exists(path)) return out;
  std::string content = text::read_file(path.string());
  if (!content.empty() && content.back() != '\n') {
    const auto cut = content.rfind('\n');
    content.resize(cut == std::string::npos ? 0 : cut + 1);
    fs::resize_file(path, content.size());
  }
  std::istringstream in(content);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

HumanLabel label_from_json(const json& j) {
  HumanLabel l;
  l.task_id = j.at("task_id").get<std::string>();
  l.annotator_id = j.at("annotator_id").get<std::string>();
  l.choice = parse_display_choice(j.at("choice").get<std::string>());
  l.canonical_choice = j.at("canonical_choice").get<int>();
  l.rubric_version = j.value("rubric_version", "");
  l.submitted_at = j.value("submitted_at", "");
  return l;
}

}  // namespace

TaskSpec task_spec(const corpus::PreferencePair& pair) {
  const auto [first, second] = pair.canonical();
  return {pair.pair_id, pair.source_text, first, second};
}

DisplayChoice parse_display_choice(const std::string& s) {
  if (s == "first") return DisplayChoice::kFirst;
  if (s == "second") return DisplayChoice::kSecond;
  throw InvalidRequest("choice must be \"first\" or \"second\", got \"" + s + "\"");
}

std::string to_string(DisplayChoice c) { return c == DisplayChoice::kFirst ? "first" : "second"; }

int canonical_choice(DisplayChoice choice, bool display_swap) {
  const int shown = choice == DisplayChoice::kFirst ? 0 : 1;
  return display_swap ? 1 - shown : shown;
}

json to_json(const HumanLabel& l) {
  return json{{"task_id", l.task_id},
              {"annotator_id", l.annotator_id},
              {"choice", to_string(l.choice)},
              {"canonical_choice", l.canonical_choice},
              {"rubric_version", l.rubric_version},
              {"submitted_at", l.submitted_at}};
}

std::string to_string(AggregateStatus s) {
  switch (s) {
    case AggregateStatus::kMajority: return "majority";
    case AggregateStatus::kUnresolved: return "unresolved";
    case AggregateStatus::kIncomplete: break;
  }
  return "incomplete";
}

json to_json(const AggregatedLabel& a) {
  return json{{"pair_id", a.pair_id},
              {"labels_count", a.labels_count},
              {"status", to_string(a.status)},
              {"majority", a.majority ? json(*a.majority) : json(nullptr)},
              {"annotator_ids", a.annotator_ids}};
}

AggregatedLabel aggregate(const std::string& pair_id, const std::vector<HumanLabel>& labels,
                          std::size_t min_labels) {
  AggregatedLabel a;
  a.pair_id = pair_id;
  a.labels_count = labels.size();
  std::size_t votes[2] = {0, 0};
  for (const auto& l : labels) {
    ++votes[l.canonical_choice == 0 ? 0 : 1];
    a.annotator_ids.push_back(l.annotator_id);
  }
  std::sort(a.annotator_ids.begin(), a.annotator_ids.end());
  if (labels.size() < min_labels) {
    a.status = AggregateStatus::kIncomplete;
  } else if (votes[0] == votes[1]) {
    a.status = AggregateStatus::kUnresolved;
  } else {
    a.status = AggregateStatus::kMajority;
    a.majority = votes[0] > votes[1] ? 0 : 1;
  }
  return a;
}

const std::string& rubric_text() { return prompts::rules_text(); }

std::string rubric_version() { return "axes-" + text::sha256_hex(rubric_text()).substr(0, 12); }

AnnotationStore::AnnotationStore(StoreOptions options) : options_(std::move(options)) {
  if (options_.directory.empty()) throw ConfigError("annotation store directory must be set");
  if (options_.rubric_version.empty()) options_.rubric_version = rubric_version();
  if (!options_.clock) options_.clock = [] { return annotator::utc_timestamp(); };
  fs::create_directories(options_.directory);
  const fs::path dir(options_.directory);
  for (const auto& j : replay(dir / kTasksFile)) {
    AnnotationTask t;
    t.task_id = j.at("task_id").get<std::string>();
    t.pair_id = j.at("pair_id").get<std::string>();
    t.source_text = j.at("source_text").get<std::string>();
    t.canonical_first = j.at("canonical_first").get<std::string>();
    t.canonical_second = j.at("canonical_second").get<std::string>();
    t.display_swap = j.at("display_swap").get<bool>();
    task_index_[t.task_id] = tasks_.size();
    pair_ids_.insert(t.pair_id);
    tasks_.push_back(std::move(t));
  }
  for (const auto& j : replay(dir / kLabelsFile)) apply_label(label_from_json(j));
}

void AnnotationStore::append_line(const std::string& file, const std::string& line) {
  const std::string path = (fs::path(options_.directory) / file).string();
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error("cannot open " + path + ": " + std::strerror(errno));
  const std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = std::strerror(errno);
      ::close(fd);
      throw Error("write to " + path + " failed: " + err);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw Error("fsync of " + path + " failed: " + err);
  }
  ::close(fd);
}

void AnnotationStore::apply_label(const HumanLabel& l) {
  const auto key = std::make_pair(l.task_id, l.annotator_id);
  if (!current_.count(key)) label_order_.push_back(key);
  current_[key] = l;
  events_.push_back(l);
}

std::size_t AnnotationStore::add_tasks(const std::vector<TaskSpec>& specs) {
  std::unique_lock lock(mu_);
  std::size_t added = 0;
  for (const auto& s : specs) {
    if (pair_ids_.count(s.pair_id)) continue;
    if (s.first == s.second) throw InvalidRequest("task '" + s.pair_id + "' compares identical texts");
    AnnotationTask t;
    t.task_id = "task-" + std::to_string(tasks_.size() + 1);
    t.pair_id = s.pair_id;
    t.source_text = s.source_text;
    t.canonical_first = s.first;
    t.canonical_second = s.second;
    Rng rng(derive_seed(options_.display_seed, "display\x1f" + s.pair_id));
    t.display_swap = rng.bernoulli(0.5);
    append_line(kTasksFile, json{{"task_id", t.task_id},
                                 {"pair_id", t.pair_id},
                                 {"source_text", t.source_text},
                                 {"canonical_first", t.canonical_first},
                                 {"canonical_second", t.canonical_second},
                                 {"display_swap", t.display_swap}}
                                .dump());
    task_index_[t.task_id] = tasks_.size();
    pair_ids_.insert(t.pair_id);
    tasks_.push_back(std::move(t));
    ++added;
  }
  return added;
}

std::optional<AnnotationTask> AnnotationStore::next_task(const std::string& annotator_id) const {
  std::shared_lock lock(mu_);
  for (const auto& t : tasks_) {
    if (!current_.count({t.task_id, annotator_id})) return t;
  }
  return std::nullopt;
}

SubmitAck AnnotationStore::submit_label(const std::string& task_id, const std::string& annotator_id,
                                        DisplayChoice choice) {
  if (annotator_id.empty()) throw InvalidRequest("annotator_id must be non-empty");
  std::unique_lock lock(mu_);
  auto it = task_index_.find(task_id);
  if (it == task_index_.end()) throw NotFound("unknown task '" + task_id + "'");
  const AnnotationTask& t = tasks_[it->second];
  SubmitAck ack{task_id, annotator_id, canonical_choice(choice, t.display_swap), false, false};
  auto prev = current_.find({task_id, annotator_id});
  if (prev != current_.end()) {
    if (prev->second.choice == choice) {
      ack.duplicate = true;
      return ack;
    }
    ack.replaced = true;
  }
  HumanLabel l{task_id, annotator_id, choice, ack.canonical_choice, options_.rubric_version, options_.clock()};
  append_line(kLabelsFile, to_json(l).dump());
  apply_label(l);
  return ack;
}

std::vector<AggregatedLabel> AnnotationStore::aggregate_labels(const std::vector<std::string>& pair_ids) const {
  std::shared_lock lock(mu_);
  std::map<std::string, std::vector<HumanLabel>> by_pair;
  for (const auto& [key, label] : current_) by_pair[tasks_[task_index_.at(key.first)].pair_id].push_back(label);
  std::vector<AggregatedLabel> out;
  if (pair_ids.empty()) {
    for (const auto& t : tasks_) out.push_back(aggregate(t.pair_id, by_pair[t.pair_id]));
  } else {
    for (const auto& id : pair_ids) out.push_back(aggregate(id, by_pair[id]));
  }
  return out;
}

std::map<std::string, ProgressEntry> AnnotationStore::progress(const std::vector<std::string>& annotators) const {
  std::shared_lock lock(mu_);
  std::map<std::string, ProgressEntry> out;
  for (const auto& a : annotators) out[a] = {0, tasks_.size()};
  for (const auto& [key, label] : current_) {
    auto it = out.find(key.second);
    if (it != out.end()) ++it->second.done;
  }
  return out;
}

std::optional<AnnotationTask> AnnotationStore::task(const std::string& task_id) const {
  std::shared_lock lock(mu_);
  auto it = task_index_.find(task_id);
  if (it == task_index_.end()) return std::nullopt;
  return tasks_[it->second];
}

std::vector<AnnotationTask> AnnotationStore::tasks() const {
  std::shared_lock lock(mu_);
  return tasks_;
}

std::vector<HumanLabel> AnnotationStore::labels() const {
  std::shared_lock lock(mu_);
  std::vector<HumanLabel> out;
  for (const auto& key : label_order_) out.push_back(current_.at(key));
  return out;
}

std::string AnnotationStore::aggregated_jsonl() const {
  std::string out = json{{"format", "chai-aggregated-labels"},
                         {"version", 1},
                         {"rubric_version", options_.rubric_version},
                         {"min_labels", 3}}
                        .dump() +
                    "\n";
  for (const auto& a : aggregate_labels()) out += to_json(a).dump() + "\n";
  return out;
}

std::string AnnotationStore::audit_jsonl() const {
  std::string out = json{{"format", "chai-human-labels-audit"}, {"version", 1}}.dump() + "\n";
  std::shared_lock lock(mu_);
  for (const auto& e : events_) out += to_json(e).dump() + "\n";
  return out;
}

void AnnotationStore::export_labels(const std::string& dir) const {
  const std::string aggregated = aggregated_jsonl();
  const std::string audit = audit_jsonl();
  try {
    text::write_file((fs::path(dir) / "aggregated_labels.jsonl").string(), aggregated);
    text::write_file((fs::path(dir) / "human_labels_audit.jsonl").string(), audit);
  } catch (const fs::filesystem_error& e) {
    throw Error(std::string("export failed: ") + e.what());
  }
}

}  // namespace chai::service
