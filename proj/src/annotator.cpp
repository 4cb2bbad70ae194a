#include "chai/annotator.hpp"

#include <atomic>
#include <regex>
#include <thread>

#include "chai/jsonl.hpp"

namespace chai::annotator {

void AnnotatorConfig::validate() const {
  if (temperatures.empty()) throw ConfigError("annotator temperatures must be non-empty");
  if (temperatures.size() % 2 == 0) {
    throw ConfigError("annotator temperatures must have odd length for a majority vote");
  }
  for (double t : temperatures) {
    if (!(t > 0.0 && t <= 2.0)) throw ConfigError("annotator temperature out of (0, 2]: " + std::to_string(t));
  }
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (backoff_multiplier < 1.0) throw ConfigError("backoff_multiplier must be >= 1");
}

HttpClientOptions AnnotatorConfig::client_options() const {
  HttpClientOptions o;
  o.endpoint_url = endpoint_url;
  o.model_name = model_name;
  o.api_key_env = api_key_env;
  o.max_retries = max_retries;
  o.backoff_initial = std::chrono::milliseconds(backoff_initial_ms);
  o.backoff_multiplier = backoff_multiplier;
  o.timeout = std::chrono::seconds(timeout_seconds);
  return o;
}

json to_json(const AnnotatorConfig& c) {
  return json{{"endpoint_url", c.endpoint_url},
              {"model_name", c.model_name},
              {"api_key_env", c.api_key_env},
              {"temperatures", c.temperatures},
              {"max_retries", c.max_retries},
              {"backoff_initial_ms", c.backoff_initial_ms},
              {"backoff_multiplier", c.backoff_multiplier},
              {"parallelism", c.parallelism},
              {"timeout_seconds", c.timeout_seconds}};
}

AnnotatorConfig annotator_config_from_json(const json& j) {
  AnnotatorConfig c;
  c.endpoint_url = j.value("endpoint_url", c.endpoint_url);
  c.model_name = j.value("model_name", c.model_name);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.temperatures = j.value("temperatures", c.temperatures);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_initial_ms = j.value("backoff_initial_ms", c.backoff_initial_ms);
  c.backoff_multiplier = j.value("backoff_multiplier", c.backoff_multiplier);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  return c;
}

Label majority_vote(std::span<const Choice> choices) {
  int first = 0;
  int second = 0;
  for (auto c : choices) {
    if (c == Choice::kFirst) ++first;
    if (c == Choice::kSecond) ++second;
  }
  if (first > second) return 0;
  if (second > first) return 1;
  return std::nullopt;
}

Choice parse_preference(std::string_view response) {
  static const std::regex kLabel(R"(my\s+preference\s+is\s*:\s*[*"'`]*\s*([01])(?![0-9]))",
                                 std::regex::icase | std::regex::ECMAScript);
  static const std::regex kBare(R"(^\s*([01])\s*\.?\s*$)");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(response.begin(), response.end(), m, kLabel)) {
    return m[1].str() == "0" ? Choice::kFirst : Choice::kSecond;
  }
  if (std::regex_match(response.begin(), response.end(), m, kBare)) {
    return m[1].str() == "0" ? Choice::kFirst : Choice::kSecond;
  }
  return Choice::kUnparseable;
}

void resolve(Verdict& v, bool swap_applied) {
  v.majority_label = majority_vote(v.choices);
  v.canonical_label.reset();
  if (v.majority_label) v.canonical_label = *v.majority_label ^ (swap_applied ? 1 : 0);
}

namespace {

json label_json(const Label& l) { return l ? json(*l) : json(nullptr); }

Label label_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<int>();
}

json choice_json(Choice c) { return c == Choice::kUnparseable ? json("unparseable") : json(static_cast<int>(c)); }

Choice choice_from(const json& j) {
  if (j.is_number_integer()) {
    const int v = j.get<int>();
    if (v == 0) return Choice::kFirst;
    if (v == 1) return Choice::kSecond;
  }
  return Choice::kUnparseable;
}

}  // namespace

json to_json(const Verdict& v) {
  json choices = json::array();
  for (auto c : v.choices) choices.push_back(choice_json(c));
  json j{{"pair_id", v.pair_id},
         {"choices", choices},
         {"majority_label", label_json(v.majority_label)},
         {"canonical_label", label_json(v.canonical_label)},
         {"annotator_id", v.annotator_id},
         {"model_name", v.model_name},
         {"template_name", v.template_name},
         {"raw_responses", v.raw_responses},
         {"timestamps", v.timestamps}};
  return j;
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  try {
    v.pair_id = j.at("pair_id").get<std::string>();
    for (const auto& c : j.at("choices")) v.choices.push_back(choice_from(c));
    v.majority_label = label_from(j.at("majority_label"));
    v.canonical_label = label_from(j.at("canonical_label"));
    v.annotator_id = j.value("annotator_id", "");
    v.model_name = j.value("model_name", "");
    v.template_name = j.value("template_name", "");
    v.raw_responses = j.value("raw_responses", std::vector<std::string>{});
    v.timestamps = j.value("timestamps", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(std::string("malformed verdict: ") + e.what());
  }
  return v;
}

std::vector<Verdict> load_verdicts(const std::string& path) {
  std::vector<Verdict> out;
  jsonl::for_each(path, [&](std::size_t line_no, const json& j) {
    try {
      out.push_back(verdict_from_json(j));
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

void save_verdicts(const std::string& path, const std::vector<Verdict>& verdicts) {
  std::vector<json> out;
  out.reserve(verdicts.size());
  for (const auto& v : verdicts) out.push_back(to_json(v));
  jsonl::write(path, out);
}

ChoiceResult request_choice(const prompts::PreferencePrompt& prompt, double temperature,
                            ChatBackend& backend) {
  ChoiceResult out;
  if (prompt.is_cot()) {
    std::string rationale = backend.complete({{"user", *prompt.rationale_prompt}}, temperature);
    std::string_view r = rationale;
    // The rationale prompt asks for a "Rationale:" prefix; the preference
    // prompt supplies its own.
    const auto trimmed = text::trim(r);
    std::string body = trimmed;
    if (text::lowercase(body.substr(0, 10)) == "rationale:") body = text::trim(body.substr(10));
    const std::string reply = backend.complete({{"user", prompt.preference_text(body)}}, temperature);
    out.raw = "Rationale: " + body + "\n" + reply;
    out.choice = parse_preference(reply);
    return out;
  }
  out.raw = backend.complete({{"user", prompt.preference_text()}}, temperature);
  out.choice = parse_preference(out.raw);
  return out;
}

Verdict annotate_pair(const corpus::PreferencePair& pair, const AnnotatorConfig& config,
                      const prompts::PromptTemplate& tmpl, ChatBackend& backend,
                      const std::vector<prompts::Exemplar>& shots) {
  auto out = annotate_pairs({pair}, config, tmpl, backend, shots);
  return std::move(out.front());
}

std::vector<Verdict> annotate_pairs(const std::vector<corpus::PreferencePair>& pairs,
                                    const AnnotatorConfig& config,
                                    const prompts::PromptTemplate& tmpl, ChatBackend& backend,
                                    const std::vector<prompts::Exemplar>& shots) {
  config.validate();
  std::vector<prompts::PreferencePrompt> rendered;
  rendered.reserve(pairs.size());
  for (const auto& p : pairs) rendered.push_back(prompts::render_preference_prompt(p, tmpl, shots));

  const std::size_t n_temp = config.temperatures.size();
  const std::size_t n_jobs = pairs.size() * n_temp;
  std::vector<ChoiceResult> results(n_jobs);
  std::vector<std::string> stamps(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= n_jobs || failed.load()) return;
      const std::size_t pi = job / n_temp;
      const std::size_t ti = job % n_temp;
      try {
        stamps[job] = utc_timestamp();
        results[job] = request_choice(rendered[pi], config.temperatures[ti], backend);
      } catch (...) {
        errors[job] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), std::max<std::size_t>(n_jobs, 1));
  {
    std::vector<std::jthread> threads;
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<Verdict> out;
  out.reserve(pairs.size());
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    Verdict v;
    v.pair_id = pairs[pi].pair_id;
    v.annotator_id = backend.model_name();
    v.model_name = backend.model_name();
    v.template_name = tmpl.name;
    for (std::size_t ti = 0; ti < n_temp; ++ti) {
      auto& r = results[pi * n_temp + ti];
      v.choices.push_back(r.choice);
      v.raw_responses.push_back(std::move(r.raw));
      v.timestamps.push_back(std::move(stamps[pi * n_temp + ti]));
    }
    resolve(v, pairs[pi].swap_applied);
    out.push_back(std::move(v));
  }
  return out;
}

BiasReport audit_positional_bias(const std::vector<corpus::PreferencePair>& pairs,
                                 const AnnotateFn& annotate) {
  BiasReport report;
  for (const auto& p : pairs) {
    BiasDetail d;
    d.pair_id = p.pair_id;
    d.original_label = annotate(p).majority_label;
    d.swapped_label = annotate(p.swapped()).majority_label;
    d.resolved = d.original_label.has_value() && d.swapped_label.has_value();
    if (d.resolved) {
      ++report.total;
      d.biased = *d.original_label == *d.swapped_label;
      if (d.biased) ++report.biased_count;
    } else {
      ++report.unresolved;
    }
    report.details.push_back(std::move(d));
  }
  report.bias_rate = report.total == 0 ? 0.0
                                       : static_cast<double>(report.biased_count) /
                                             static_cast<double>(report.total);
  return report;
}

json to_json(const BiasReport& r, bool include_details) {
  json j{{"biased_count", r.biased_count},
         {"total", r.total},
         {"unresolved", r.unresolved},
         {"bias_rate", r.bias_rate}};
  if (include_details) {
    json d = json::array();
    for (const auto& x : r.details) {
      d.push_back({{"pair_id", x.pair_id},
                   {"original_label", label_json(x.original_label)},
                   {"swapped_label", label_json(x.swapped_label)},
                   {"resolved", x.resolved},
                   {"biased", x.biased}});
    }
    j["details"] = std::move(d);
  }
  return j;
}

AlignmentResult alignment_score(const std::vector<Verdict>& verdicts,
                                const std::map<std::string, int>& human_labels) {
  AlignmentResult r;
  for (const auto& v : verdicts) {
    auto it = human_labels.find(v.pair_id);
    if (it == human_labels.end()) throw Error("no human label for pair '" + v.pair_id + "'");
    if (!v.canonical_label) {
      ++r.unresolved;
      continue;
    }
    ++r.resolved;
    if (*v.canonical_label == it->second) ++r.matched;
  }
  if (r.resolved > 0) r.score = static_cast<double>(r.matched) / static_cast<double>(r.resolved);
  return r;
}

std::map<std::string, int> load_human_labels(const std::string& path) {
  std::map<std::string, int> out;
  jsonl::for_each(path, [&](std::size_t line_no, const json& j) {
    if (!j.contains("pair_id")) return;  // export header lines
    const json* label = nullptr;
    if (j.contains("label")) label = &j.at("label");
    else if (j.contains("majority")) label = &j.at("majority");
    if (label == nullptr) throw Error(path + ":" + std::to_string(line_no) + ": missing label");
    if (label->is_null()) return;  // unresolved human majority
    const int v = label->get<int>();
    if (v != 0 && v != 1) throw Error(path + ":" + std::to_string(line_no) + ": label must be 0 or 1");
    out[j.at("pair_id").get<std::string>()] = v;
  });
  return out;
}

json to_json(const AlignmentResult& r) {
  return json{{"score", r.score ? json(*r.score) : json(nullptr)},
              {"matched", r.matched},
              {"resolved", r.resolved},
              {"unresolved", r.unresolved}};
}

}  // namespace chai::annotator
