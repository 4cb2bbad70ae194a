// Preference verdicts from LLM annotators: per-temperature requests, strict
// majority aggregation, positional-bias audit and alignment with human labels.

#ifndef CHAI_ANNOTATOR_HPP_
#define CHAI_ANNOTATOR_HPP_

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chai/chat_client.hpp"
#include "chai/corpus.hpp"
#include "chai/prompt_template.hpp"

namespace chai::annotator {

using json = nlohmann::json;

struct AnnotatorConfig {
  std::string endpoint_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o-2024-11-20";
  std::string api_key_env = "OPENAI_API_KEY";
  std::vector<double> temperatures{0.1, 0.3, 0.5};
  int max_retries = 5;
  int backoff_initial_ms = 500;
  double backoff_multiplier = 2.0;
  int parallelism = 4;
  int timeout_seconds = 60;

  /// Throws ConfigError: temperatures must be non-empty, odd in count and
  /// each in (0, 2].
  void validate() const;

  HttpClientOptions client_options() const;
};

json to_json(const AnnotatorConfig& c);
AnnotatorConfig annotator_config_from_json(const json& j);

/// One annotator response. Values 0/1 refer to display positions.
enum class Choice { kFirst = 0, kSecond = 1, kUnparseable = 2 };

/// Binary label (0 = first, 1 = second) or unresolved.
using Label = std::optional<int>;

/// Strict majority among parseable choices; unresolved on ties (including
/// zero parseable choices).
Label majority_vote(std::span<const Choice> choices);

/// Finds the first "My preference is:" (case-insensitive, whitespace
/// tolerant) followed by 0 or 1. A response consisting of a bare 0 or 1 is
/// also accepted, as k-shot prompts ask for exactly that.
Choice parse_preference(std::string_view response);

struct Verdict {
  std::string pair_id;
  std::vector<Choice> choices;
  Label majority_label;
  Label canonical_label;  // majority_label XOR swap_applied
  std::vector<std::string> raw_responses;
  std::string annotator_id;
  std::string model_name;
  std::string template_name;
  std::vector<std::string> timestamps;
};

/// Fills majority and canonical labels from the choices.
void resolve(Verdict& v, bool swap_applied);

json to_json(const Verdict& v);
Verdict verdict_from_json(const json& j);
std::vector<Verdict> load_verdicts(const std::string& path);
void save_verdicts(const std::string& path, const std::vector<Verdict>& verdicts);

struct ChoiceResult {
  Choice choice = Choice::kUnparseable;
  std::string raw;  // preference response (rationale prepended for cot)
};

/// Sends one preference request. For chain-of-thought prompts the rationale
/// request is issued first and its answer bound into the preference prompt.
ChoiceResult request_choice(const prompts::PreferencePrompt& prompt, double temperature,
                            ChatBackend& backend);

/// One request per configured temperature, then majority and canonical
/// labels.
Verdict annotate_pair(const corpus::PreferencePair& pair, const AnnotatorConfig& config,
                      const prompts::PromptTemplate& tmpl, ChatBackend& backend,
                      const std::vector<prompts::Exemplar>& shots = {});

/// Annotates many pairs with up to config.parallelism requests in flight.
/// Output order matches input order.
std::vector<Verdict> annotate_pairs(const std::vector<corpus::PreferencePair>& pairs,
                                    const AnnotatorConfig& config,
                                    const prompts::PromptTemplate& tmpl, ChatBackend& backend,
                                    const std::vector<prompts::Exemplar>& shots = {});

// ---------------------------------------------------------------------------
// Positional-bias audit

using AnnotateFn = std::function<Verdict(const corpus::PreferencePair&)>;

struct BiasDetail {
  std::string pair_id;
  Label original_label;  // display position chosen, original order
  Label swapped_label;   // display position chosen, swapped order
  bool resolved = false;
  bool biased = false;
};

struct BiasReport {
  std::size_t biased_count = 0;
  std::size_t total = 0;       // pairs resolved in both runs
  std::size_t unresolved = 0;  // excluded from total
  double bias_rate = 0.0;
  std::vector<BiasDetail> details;
};

/// Annotates each pair as displayed and again with candidates swapped. A pair
/// is biased when the same display position wins both runs.
BiasReport audit_positional_bias(const std::vector<corpus::PreferencePair>& pairs,
                                 const AnnotateFn& annotate);

json to_json(const BiasReport& r, bool include_details = false);

// ---------------------------------------------------------------------------
// Alignment with human labels

struct AlignmentResult {
  std::optional<double> score;  // empty when no verdict is resolved
  std::size_t matched = 0;
  std::size_t resolved = 0;
  std::size_t unresolved = 0;
};

/// Fraction of resolved verdicts whose canonical label equals the human
/// canonical label. Throws chai::Error when a pair has no human label.
AlignmentResult alignment_score(const std::vector<Verdict>& verdicts,
                                const std::map<std::string, int>& human_labels);

/// Reads {pair_id, label} JSONL.
std::map<std::string, int> load_human_labels(const std::string& path);

json to_json(const AlignmentResult& r);

}  // namespace chai::annotator

#endif  // CHAI_ANNOTATOR_HPP_
