// Durable store behind the human annotation service. Tasks and labels live
// in append-only JSONL files under one directory; state is rebuilt by replay
// on open, with later labels for the same (task, annotator) replacing earlier
// ones.

#ifndef CHAI_ANNOTATION_STORE_HPP_
#define CHAI_ANNOTATION_STORE_HPP_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "chai/corpus.hpp"
#include "chai/text.hpp"

namespace chai::service {

using json = nlohmann::json;

class NotFound : public Error {
 public:
  using Error::Error;
};

class InvalidRequest : public Error {
 public:
  using Error::Error;
};

/// Something to compare: canonical first/second texts for one source.
struct TaskSpec {
  std::string pair_id;
  std::string source_text;
  std::string first;   // canonical order
  std::string second;
};

TaskSpec task_spec(const corpus::PreferencePair& pair);

struct AnnotationTask {
  std::string task_id;
  std::string pair_id;
  std::string source_text;
  std::string canonical_first;
  std::string canonical_second;
  bool display_swap = false;  // server-side only

  const std::string& displayed_first() const { return display_swap ? canonical_second : canonical_first; }
  const std::string& displayed_second() const { return display_swap ? canonical_first : canonical_second; }
};

enum class DisplayChoice { kFirst, kSecond };

DisplayChoice parse_display_choice(const std::string& s);  // "first"/"second", else InvalidRequest
std::string to_string(DisplayChoice c);

/// Canonical label (0 = canonical first) for a choice in display terms.
int canonical_choice(DisplayChoice choice, bool display_swap);

struct HumanLabel {
  std::string task_id;
  std::string annotator_id;
  DisplayChoice choice = DisplayChoice::kFirst;
  int canonical_choice = 0;
  std::string rubric_version;
  std::string submitted_at;
};

json to_json(const HumanLabel& l);

enum class AggregateStatus { kMajority, kUnresolved, kIncomplete };

std::string to_string(AggregateStatus s);

struct AggregatedLabel {
  std::string pair_id;
  std::size_t labels_count = 0;
  AggregateStatus status = AggregateStatus::kIncomplete;
  std::optional<int> majority;  // canonical label when status is kMajority
  std::vector<std::string> annotator_ids;
};

json to_json(const AggregatedLabel& a);

/// Strict majority over canonical choices; fewer than min_labels labels is
/// incomplete, a tie is unresolved.
AggregatedLabel aggregate(const std::string& pair_id, const std::vector<HumanLabel>& labels,
                          std::size_t min_labels = 3);

struct SubmitAck {
  std::string task_id;
  std::string annotator_id;
  int canonical_choice = 0;
  bool replaced = false;   // an earlier, different label was superseded
  bool duplicate = false;  // identical resubmission; nothing written
};

struct ProgressEntry {
  std::size_t done = 0;
  std::size_t total = 0;
};

struct StoreOptions {
  std::string directory;
  std::uint64_t display_seed = 0;
  std::string rubric_version;
  /// Timestamp source for submitted_at; defaults to UTC wall clock.
  std::function<std::string()> clock;
};

class AnnotationStore {
 public:
  /// Opens (creating if needed) the store and replays its files.
  explicit AnnotationStore(StoreOptions options);

  /// Adds tasks for specs whose pair_id is not already queued. Display order
  /// per task is drawn from (display_seed, pair_id). Returns the number added.
  std::size_t add_tasks(const std::vector<TaskSpec>& specs);

  /// Oldest task the annotator has not labeled.
  std::optional<AnnotationTask> next_task(const std::string& annotator_id) const;

  /// Durable (fsync'd) before returning. Throws NotFound for an unknown task.
  SubmitAck submit_label(const std::string& task_id, const std::string& annotator_id,
                         DisplayChoice choice);

  std::vector<AggregatedLabel> aggregate_labels(const std::vector<std::string>& pair_ids = {}) const;

  std::map<std::string, ProgressEntry> progress(const std::vector<std::string>& annotators) const;

  std::optional<AnnotationTask> task(const std::string& task_id) const;
  std::vector<AnnotationTask> tasks() const;
  /// Current labels (after replacement), in first-submission order.
  std::vector<HumanLabel> labels() const;

  /// Aggregated JSONL with a header line.
  std::string aggregated_jsonl() const;
  /// Every label event ever appended, with a header line.
  std::string audit_jsonl() const;

  /// Writes aggregated_labels.jsonl and human_labels_audit.jsonl into dir.
  void export_labels(const std::string& dir) const;

  const std::string& rubric_version() const { return options_.rubric_version; }

 private:
  void append_line(const std::string& file, const std::string& line);
  void apply_label(const HumanLabel& l);

  StoreOptions options_;
  mutable std::shared_mutex mu_;
  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::size_t> task_index_;  // task_id -> position
  std::set<std::string> pair_ids_;
  std::vector<HumanLabel> events_;  // raw append order
  std::vector<std::pair<std::string, std::string>> label_order_;  // (task, annotator) first seen
  std::map<std::pair<std::string, std::string>, HumanLabel> current_;
};

/// Rubric shown to annotators and its version tag.
const std::string& rubric_text();
std::string rubric_version();

}  // namespace chai::service

#endif  // CHAI_ANNOTATION_STORE_HPP_
