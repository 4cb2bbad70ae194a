#include "chai/pipeline.hpp"

#include <filesystem>
#include <set>
#include <sstream>

#include "chai/classification.hpp"
#include "chai/code_switching.hpp"
#include "chai/jsonl.hpp"
#include "chai/judge.hpp"
#include "chai/oracle.hpp"
#include "chai/prompt_template.hpp"
#include "chai/rng.hpp"

namespace chai::pipeline {
namespace fs = std::filesystem;

namespace {

json read_json(const std::string& path) {
  try {
    return json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) { text::write_file(path, j.dump(2) + "\n"); }

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

// Runs `fn` on j[key] when present, prefixing errors with the field name.
template <typename F>
void section(const json& j, const std::string& key, const std::string& prefix, F fn) {
  if (!j.contains(key)) return;
  const std::string name = prefix.empty() ? key : prefix + "." + key;
  try {
    fn(j.at(key));
  } catch (const json::exception& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

PipelineConfig PipelineConfig::from_json(const json& j, const std::string& base_dir) {
  PipelineConfig c;
  reject_unknown(j, {"seed", "held_out_fraction", "paths", "pairing", "annotation", "reward", "policy",
                     "evaluation", "service"},
                 "config");
  section(j, "seed", "", [&](const json& v) { c.seed = v.get<std::uint64_t>(); });
  section(j, "held_out_fraction", "", [&](const json& v) {
    c.held_out_fraction = v.get<double>();
    if (c.held_out_fraction < 0.0 || c.held_out_fraction >= 1.0) throw ConfigError("must be in [0, 1)");
  });

  section(j, "paths", "", [&](const json& p) {
    reject_unknown(p, {"corpus", "corpus_format", "work_dir", "lexicons", "oracle_weights", "sft_policy",
                       "human_labels", "exemplars", "static_dir"},
                   "paths");
    auto path = [&](const char* key) { return resolve(base_dir, p.value(key, "")); };
    c.paths.corpus = path("corpus");
    c.paths.corpus_format = p.value("corpus_format", c.paths.corpus_format);
    corpus::parse_corpus_format(c.paths.corpus_format);
    c.paths.work_dir = path("work_dir");
    c.paths.oracle_weights = path("oracle_weights");
    c.paths.sft_policy = path("sft_policy");
    c.paths.human_labels = path("human_labels");
    c.paths.exemplars = path("exemplars");
    c.paths.static_dir = path("static_dir");
    if (p.contains("lexicons")) {
      for (const auto& [lang, file] : p.at("lexicons").items()) {
        c.paths.lexicons[lang] = resolve(base_dir, file.get<std::string>());
      }
    }
  });

  section(j, "pairing", "", [&](const json& p) {
    reject_unknown(p, {"mode", "n"}, "pairing");
    c.pairing = p.value("mode", c.pairing);
    c.sample_pairs = p.value("n", c.sample_pairs);
    if (c.pairing != "all_pairs" && c.pairing != "sampled") throw ConfigError("mode must be all_pairs or sampled");
    if (c.pairing == "sampled" && c.sample_pairs < 1) throw ConfigError("pairing.n must be >= 1");
  });

  section(j, "annotation", "", [&](const json& a) {
    reject_unknown(a, {"backend", "template", "shots", "audit_max_pairs", "llm", "oracle"}, "annotation");
    c.backend = a.value("backend", c.backend);
    if (c.backend != "oracle" && c.backend != "llm") throw ConfigError("backend must be oracle or llm");
    c.template_strategy = a.value("template", c.template_strategy);
    prompts::parse_strategy(c.template_strategy);
    c.shots = a.value("shots", c.shots);
    if (c.shots < 0) throw ConfigError("shots must be >= 0");
    c.audit_max_pairs = a.value("audit_max_pairs", c.audit_max_pairs);
    section(a, "llm", "annotation", [&](const json& v) { c.annotator = annotator::annotator_config_from_json(v); });
    section(a, "oracle", "annotation", [&](const json& o) {
      reject_unknown(o, {"decisiveness", "positional_bias", "preferred_position"}, "annotation.oracle");
      c.oracle.decisiveness = o.value("decisiveness", c.oracle.decisiveness);
      c.oracle.positional_bias = o.value("positional_bias", c.oracle.positional_bias);
      c.oracle.preferred_position = o.value("preferred_position", c.oracle.preferred_position);
      if (c.oracle.positional_bias < 0 || c.oracle.positional_bias > 1) {
        throw ConfigError("positional_bias must be in [0, 1]");
      }
      if (c.oracle.preferred_position != 0 && c.oracle.preferred_position != 1) {
        throw ConfigError("preferred_position must be 0 or 1");
      }
    });
  });
  c.annotator.validate();

  c.reward.seed = c.seed;
  section(j, "reward", "", [&](const json& r) {
    json with_seed = r;
    if (!with_seed.contains("seed")) with_seed["seed"] = c.seed;
    c.reward = reward::reward_train_config_from_json(with_seed);
  });

  c.ppo.seed = c.seed;
  c.dpo.seed = c.seed;
  section(j, "policy", "", [&](const json& p) {
    reject_unknown(p, {"algo", "include_sft_reference", "temperature", "top_p", "ppo", "dpo"}, "policy");
    c.algo = p.value("algo", c.algo);
    if (c.algo != "ppo" && c.algo != "dpo") throw ConfigError("algo must be ppo or dpo");
    c.include_sft_reference = p.value("include_sft_reference", c.include_sft_reference);
    c.policy_temperature = p.value("temperature", c.policy_temperature);
    c.policy_top_p = p.value("top_p", c.policy_top_p);
    if (!(c.policy_temperature > 0)) throw ConfigError("temperature must be > 0");
    if (!(c.policy_top_p > 0 && c.policy_top_p <= 1)) throw ConfigError("top_p must be in (0, 1]");
    auto seeded = [&](json v) {
      if (!v.contains("seed")) v["seed"] = c.seed;
      return v;
    };
    section(p, "ppo", "policy", [&](const json& v) { c.ppo = policy::ppo_config_from_json(seeded(v)); });
    section(p, "dpo", "policy", [&](const json& v) { c.dpo = policy::dpo_config_from_json(seeded(v)); });
  });
  c.ppo.validate();
  c.dpo.validate();

  section(j, "evaluation", "", [&](const json& e) {
    reject_unknown(e, {"chrf", "judge_backend", "judge", "temperature_grid", "input"}, "evaluation");
    section(e, "chrf", "evaluation", [&](const json& v) { c.chrf = metrics::chrf_config_from_json(v); });
    c.judge_backend = e.value("judge_backend", c.judge_backend);
    if (c.judge_backend != "oracle" && c.judge_backend != "llm") {
      throw ConfigError("judge_backend must be oracle or llm");
    }
    section(e, "judge", "evaluation", [&](const json& v) { c.judge = annotator::annotator_config_from_json(v); });
    c.temperature_grid = e.value("temperature_grid", c.temperature_grid);
    for (double t : c.temperature_grid) {
      if (!(t > 0)) throw ConfigError("temperature_grid values must be > 0");
    }
    c.eval_input = resolve(base_dir, e.value("input", ""));
  });
  c.judge.validate();

  section(j, "service", "", [&](const json& s) {
    json resolved = s;
    if (resolved.contains("static_dir")) {
      resolved["static_dir"] = resolve(base_dir, resolved["static_dir"].get<std::string>());
    }
    c.service = service::server_config_from_json(resolved);
  });

  if (c.include_sft_reference && c.paths.sft_policy.empty()) {
    throw ConfigError("policy.include_sft_reference requires paths.sft_policy");
  }
  if (c.paths.work_dir.empty()) throw ConfigError("paths.work_dir is required");
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return from_json(j, fs::path(path).parent_path().string());
}

json PipelineConfig::snapshot() const {
  json oracle{{"decisiveness", this->oracle.decisiveness},
              {"positional_bias", this->oracle.positional_bias},
              {"preferred_position", this->oracle.preferred_position}};
  return json{{"seed", seed},
              {"held_out_fraction", held_out_fraction},
              {"pairing", {{"mode", pairing}, {"n", sample_pairs}}},
              {"annotation",
               {{"backend", backend},
                {"template", template_strategy},
                {"shots", shots},
                {"audit_max_pairs", audit_max_pairs},
                {"llm", annotator::to_json(annotator)},
                {"oracle", oracle}}},
              {"reward", reward::to_json(reward)},
              {"policy",
               {{"algo", algo},
                {"include_sft_reference", include_sft_reference},
                {"temperature", policy_temperature},
                {"top_p", policy_top_p},
                {"ppo", policy::to_json(ppo)},
                {"dpo", policy::to_json(dpo)}}},
              {"evaluation",
               {{"chrf", metrics::to_json(chrf)},
                {"judge_backend", judge_backend},
                {"judge", annotator::to_json(judge)},
                {"temperature_grid", temperature_grid}}}};
}

annotator::ScoreFn load_weight_scorer(const std::string& path) {
  const json j = read_json(path);
  if (!j.is_object()) throw ConfigError(path + ": expected an object of word weights");
  auto weights = std::make_shared<std::map<std::string, double>>();
  for (const auto& [w, v] : j.items()) (*weights)[text::lowercase(w)] = v.get<double>();
  return [weights](const std::string&, const std::string& candidate) {
    double s = 0.0;
    for (const auto& tok : text::split_whitespace(text::lowercase(candidate))) {
      auto it = weights->find(tok);
      if (it != weights->end()) s += it->second;
    }
    return s;
  };
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  fs::create_directories(config_.paths.work_dir);
}

std::string Pipeline::work_path(const std::string& name) const {
  return (fs::path(config_.paths.work_dir) / name).string();
}

void Pipeline::require(const std::string& path, const std::string& what) const {
  if (path.empty()) throw ConfigError(what + " is not configured");
  if (!fs::exists(path)) throw ConfigError(what + " not found: " + path);
}

void Pipeline::write_manifest(const std::string& stage, const std::map<std::string, std::string>& inputs,
                              const std::vector<std::string>& outputs, const json& config) const {
  json in = json::object();
  for (const auto& [name, path] : inputs) {
    in[name] = {{"file", fs::path(path).filename().string()}, {"sha256", text::sha256_hex(text::read_file(path))}};
  }
  json out = json::object();
  for (const auto& path : outputs) out[fs::path(path).filename().string()] = text::sha256_hex(text::read_file(path));
  write_json(work_path("manifests/" + stage + ".json"),
             json{{"stage", stage}, {"seed", config_.seed}, {"inputs", in}, {"outputs", out}, {"config", config}});
}

annotator::OracleAnnotator Pipeline::make_oracle(const std::string& stream) const {
  require(config_.paths.oracle_weights, "paths.oracle_weights");
  annotator::OracleAnnotator o;
  o.true_score = load_weight_scorer(config_.paths.oracle_weights);
  o.decisiveness = config_.oracle.decisiveness;
  o.positional_bias = config_.oracle.positional_bias;
  o.preferred_position = config_.oracle.preferred_position;
  o.seed = derive_seed(config_.seed, stream);
  o.id = "oracle";
  return o;
}

policy::ReferencePolicy Pipeline::reference_policy() const {
  if (!config_.include_sft_reference) return policy::ReferencePolicy::uniform();
  require(config_.paths.sft_policy, "paths.sft_policy");
  return policy::ReferencePolicy::frozen(policy::load_policy(config_.paths.sft_policy));
}

std::vector<policy::CandidateSet> Pipeline::candidate_sets(bool held_out) const {
  require(work_path("corpus.jsonl"), "corpus.jsonl (run ingest)");
  require(work_path("split.json"), "split.json (run ingest)");
  const auto corpus = corpus::load_corpus(work_path("corpus.jsonl"), corpus::CorpusFormat::kJsonl);
  const json split = read_json(work_path("split.json"));
  const auto ids = split.at(held_out ? "held_out" : "train").get<std::vector<std::string>>();
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<policy::CandidateSet> out;
  for (const auto& row : corpus.rows) {
    if (!wanted.count(row.row_id) || row.translations.size() < 2) continue;
    out.push_back({row.source_text, row.translations});
  }
  return out;
}

policy::RankingPolicy Pipeline::load_trained_policy() const {
  const std::string path = work_path("policy_" + config_.algo + ".json");
  require(path, path + " (run train-policy)");
  auto p = policy::load_policy(path);
  p.temperature = config_.policy_temperature;
  p.top_p = config_.policy_top_p;
  return p;
}

StageResult Pipeline::ingest() {
  require(config_.paths.corpus, "paths.corpus");
  const auto corpus = corpus::load_corpus(config_.paths.corpus, corpus::parse_corpus_format(config_.paths.corpus_format));
  const std::string corpus_out = work_path("corpus.jsonl");
  corpus::save_corpus_jsonl(corpus_out, corpus);

  json train = json::array();
  json held_out = json::array();
  for (const auto& row : corpus.rows) {
    Rng rng(derive_seed(config_.seed, "split\x1f" + row.row_id));
    (rng.uniform() < config_.held_out_fraction ? held_out : train).push_back(row.row_id);
  }
  const std::string split_out = work_path("split.json");
  write_json(split_out, json{{"train", train}, {"held_out", held_out}});

  // SFT rows over the training split.
  std::vector<corpus::ParallelRow> train_rows;
  const auto train_list = train.get<std::vector<std::string>>();
  const std::set<std::string> train_ids(train_list.begin(), train_list.end());
  for (const auto& row : corpus.rows) {
    if (train_ids.count(row.row_id)) train_rows.push_back(row);
  }
  std::vector<json> sft;
  for (const auto& ex : prompts::expand_sft(corpus::make_corpus(train_rows), prompts::sft_template())) {
    sft.push_back(corpus::to_json(ex));
  }
  const std::string sft_out = work_path("sft.jsonl");
  jsonl::write(sft_out, sft);

  std::vector<std::string> outputs{corpus_out, split_out, sft_out};
  write_manifest("ingest", {{"corpus", config_.paths.corpus}}, outputs,
                 json{{"corpus_format", config_.paths.corpus_format},
                      {"held_out_fraction", config_.held_out_fraction}});
  json summary = corpus::to_json(corpus.report);
  summary["pairs"] = corpus.pair_count();
  summary["train_rows"] = train.size();
  summary["held_out_rows"] = held_out.size();
  summary["sft_examples"] = sft.size();
  return {"ingest", outputs, summary};
}

StageResult Pipeline::make_pairs() {
  require(work_path("corpus.jsonl"), "corpus.jsonl (run ingest)");
  require(work_path("split.json"), "split.json (run ingest)");
  const auto corpus = corpus::load_corpus(work_path("corpus.jsonl"), corpus::CorpusFormat::kJsonl);
  const auto train = read_json(work_path("split.json")).at("train").get<std::vector<std::string>>();
  const std::set<std::string> ids(train.begin(), train.end());
  std::vector<corpus::ParallelRow> rows;
  for (const auto& r : corpus.rows) {
    if (ids.count(r.row_id)) rows.push_back(r);
  }
  const auto mode = config_.pairing == "sampled" ? corpus::PairingMode::sampled(config_.sample_pairs)
                                                 : corpus::PairingMode::all_pairs();
  const auto result = corpus::make_preference_pairs(corpus::make_corpus(std::move(rows)), mode, config_.seed);
  const std::string out = work_path("pairs.jsonl");
  corpus::save_pairs(out, result.pairs);
  write_manifest("make-pairs", {{"corpus", work_path("corpus.jsonl")}, {"split", work_path("split.json")}}, {out},
                 json{{"mode", config_.pairing}, {"n", config_.sample_pairs}});
  std::size_t swapped = 0;
  for (const auto& p : result.pairs) swapped += p.swap_applied ? 1 : 0;
  return {"make-pairs", {out},
          json{{"pairs", result.pairs.size()}, {"skipped_rows", result.skipped_rows}, {"swapped", swapped}}};
}

namespace {

std::unique_ptr<annotator::HttpChatClient> make_client(const annotator::AnnotatorConfig& config,
                                                       const std::string& audit_path) {
  config.validate();
  auto audit = std::make_shared<annotator::AuditLog>(audit_path);
  return std::make_unique<annotator::HttpChatClient>(config.client_options(), audit);
}

}  // namespace

StageResult Pipeline::annotate(const std::string& backend) {
  if (backend != "oracle" && backend != "llm") throw ConfigError("unknown backend '" + backend + "'");
  std::unique_ptr<annotator::HttpChatClient> client;
  if (backend == "llm") client = make_client(config_.annotator, work_path("annotator_calls.jsonl"));
  require(work_path("pairs.jsonl"), "pairs.jsonl (run make-pairs)");
  const auto pairs = corpus::load_pairs(work_path("pairs.jsonl"));
  std::map<std::string, std::string> inputs{{"pairs", work_path("pairs.jsonl")}};

  std::vector<annotator::Verdict> verdicts;
  json stage_config{{"backend", backend}, {"temperatures", config_.annotator.temperatures}};
  if (backend == "llm") {
    const auto tmpl = prompts::preference_template(prompts::parse_strategy(config_.template_strategy), config_.shots);
    std::vector<prompts::Exemplar> shots;
    if (config_.shots > 0) {
      require(config_.paths.exemplars, "paths.exemplars");
      shots = prompts::load_exemplars(config_.paths.exemplars);
      inputs["exemplars"] = config_.paths.exemplars;
    }
    verdicts = annotator::annotate_pairs(pairs, config_.annotator, tmpl, *client, shots);
    stage_config["llm"] = annotator::to_json(config_.annotator);
    stage_config["template"] = tmpl.name;
  } else {
    const auto oracle = make_oracle("annotate");
    inputs["oracle_weights"] = config_.paths.oracle_weights;
    for (const auto& p : pairs) verdicts.push_back(annotator::oracle_annotate(p, oracle, config_.annotator.temperatures.size()));
    stage_config["oracle"] = config_.snapshot()["annotation"]["oracle"];
  }
  const std::string verdicts_out = work_path("verdicts.jsonl");
  annotator::save_verdicts(verdicts_out, verdicts);
  const auto dataset = reward::build_dataset(pairs, verdicts);
  const std::string prefs_out = work_path("preferences.jsonl");
  reward::save_dataset(prefs_out, dataset);
  write_manifest("annotate", inputs, {verdicts_out, prefs_out}, stage_config);
  return {"annotate", {verdicts_out, prefs_out},
          json{{"verdicts", verdicts.size()},
               {"resolved", dataset.size()},
               {"unresolved", verdicts.size() - dataset.size()}}};
}

StageResult Pipeline::audit_bias(const std::string& backend) {
  if (backend != "oracle" && backend != "llm") throw ConfigError("unknown backend '" + backend + "'");
  std::unique_ptr<annotator::HttpChatClient> client;
  if (backend == "llm") client = make_client(config_.annotator, work_path("annotator_calls.jsonl"));
  require(work_path("pairs.jsonl"), "pairs.jsonl (run make-pairs)");
  auto pairs = corpus::load_pairs(work_path("pairs.jsonl"));
  if (config_.audit_max_pairs > 0 && pairs.size() > config_.audit_max_pairs) pairs.resize(config_.audit_max_pairs);
  std::map<std::string, std::string> inputs{{"pairs", work_path("pairs.jsonl")}};

  annotator::AnnotateFn fn;
  std::optional<annotator::OracleAnnotator> oracle;
  std::optional<prompts::PromptTemplate> tmpl;
  if (backend == "llm") {
    tmpl = prompts::preference_template(prompts::parse_strategy(config_.template_strategy), config_.shots);
    fn = [&](const corpus::PreferencePair& p) { return annotator::annotate_pair(p, config_.annotator, *tmpl, *client); };
  } else {
    oracle = make_oracle("audit");
    inputs["oracle_weights"] = config_.paths.oracle_weights;
    const std::size_t draws = config_.annotator.temperatures.size();
    fn = [&, draws](const corpus::PreferencePair& p) { return annotator::oracle_annotate(p, *oracle, draws); };
  }
  const auto report = annotator::audit_positional_bias(pairs, fn);
  const std::string out = work_path("bias_report.json");
  write_json(out, annotator::to_json(report, true));
  write_manifest("audit-bias", inputs, {out}, json{{"backend", backend}, {"max_pairs", config_.audit_max_pairs}});
  return {"audit-bias", {out}, annotator::to_json(report, false)};
}

StageResult Pipeline::align_score() {
  require(work_path("verdicts.jsonl"), "verdicts.jsonl (run annotate)");
  require(config_.paths.human_labels, "paths.human_labels");
  const auto human = annotator::load_human_labels(config_.paths.human_labels);
  std::vector<annotator::Verdict> covered;
  std::size_t uncovered = 0;
  for (auto& v : annotator::load_verdicts(work_path("verdicts.jsonl"))) {
    if (human.count(v.pair_id)) covered.push_back(std::move(v));
    else ++uncovered;
  }
  const auto result = annotator::alignment_score(covered, human);
  json summary = annotator::to_json(result);
  summary["verdicts_without_human_label"] = uncovered;
  const std::string out = work_path("alignment.json");
  write_json(out, summary);
  write_manifest("align-score", {{"verdicts", work_path("verdicts.jsonl")}, {"human_labels", config_.paths.human_labels}},
                 {out}, json::object());
  return {"align-score", {out}, summary};
}

StageResult Pipeline::compare_prompts(const std::string& backend) {
  if (backend != "oracle" && backend != "llm") throw ConfigError("unknown backend '" + backend + "'");
  std::unique_ptr<annotator::HttpChatClient> client;
  if (backend == "llm") client = make_client(config_.annotator, work_path("annotator_calls.jsonl"));
  require(work_path("pairs.jsonl"), "pairs.jsonl (run make-pairs)");
  require(config_.paths.human_labels, "paths.human_labels");
  const auto human = annotator::load_human_labels(config_.paths.human_labels);
  std::vector<corpus::PreferencePair> labeled;
  for (const auto& p : corpus::load_pairs(work_path("pairs.jsonl"))) {
    if (human.count(p.pair_id)) labeled.push_back(p);
  }
  std::map<std::string, std::string> inputs{{"pairs", work_path("pairs.jsonl")},
                                            {"human_labels", config_.paths.human_labels}};
  std::vector<prompts::Exemplar> exemplars;
  if (!config_.paths.exemplars.empty() && fs::exists(config_.paths.exemplars)) {
    exemplars = prompts::load_exemplars(config_.paths.exemplars);
    inputs["exemplars"] = config_.paths.exemplars;
  }
  const int k = config_.shots > 0 ? config_.shots : static_cast<int>(std::min<std::size_t>(exemplars.size(), 2));
  std::optional<annotator::OracleAnnotator> oracle;
  if (backend == "oracle") {
    oracle = make_oracle("compare-prompts");
    inputs["oracle_weights"] = config_.paths.oracle_weights;
  }

  json rows = json::array();
  using prompts::Strategy;
  for (Strategy s : {Strategy::kBasic, Strategy::kRuleAugmented, Strategy::kCot, Strategy::kKShot, Strategy::kRuleKShot,
                     Strategy::kRuleCotKShot}) {
    const bool kshot = s == Strategy::kKShot || s == Strategy::kRuleKShot || s == Strategy::kRuleCotKShot;
    json row{{"strategy", prompts::to_string(s)}, {"k", kshot ? k : 0}};
    if (kshot && (k == 0 || exemplars.size() < static_cast<std::size_t>(k))) {
      row["skipped"] = "not enough exemplars";
      rows.push_back(row);
      continue;
    }
    const std::vector<prompts::Exemplar> shots =
        kshot ? std::vector<prompts::Exemplar>(exemplars.begin(), exemplars.begin() + k) : std::vector<prompts::Exemplar>{};
    const auto tmpl = prompts::preference_template(s, kshot ? k : 0);
    std::vector<annotator::Verdict> verdicts;
    if (backend == "llm") {
      verdicts = annotator::annotate_pairs(labeled, config_.annotator, tmpl, *client, shots);
    } else {
      for (const auto& p : labeled) verdicts.push_back(annotator::oracle_annotate(p, *oracle, config_.annotator.temperatures.size()));
    }
    row["alignment"] = annotator::to_json(annotator::alignment_score(verdicts, human));
    rows.push_back(row);
  }
  const std::string out = work_path("prompt_comparison.json");
  write_json(out, json{{"backend", backend}, {"pairs", labeled.size()}, {"rows", rows}});
  write_manifest("compare-prompts", inputs, {out}, json{{"backend", backend}, {"k", k}});
  return {"compare-prompts", {out}, json{{"rows", rows}}};
}

StageResult Pipeline::train_reward() {
  require(work_path("preferences.jsonl"), "preferences.jsonl (run annotate)");
  const auto dataset = reward::load_dataset(work_path("preferences.jsonl"));
  const auto model = reward::train_reward(dataset, config_.reward);
  const std::string out = work_path("reward_model.json");
  reward::save_model(out, model);
  write_manifest("train-reward", {{"preferences", work_path("preferences.jsonl")}}, {out}, reward::to_json(config_.reward));
  return {"train-reward", {out},
          json{{"records", dataset.size()},
               {"loss_curve", model.training_meta.loss_curve},
               {"train_accuracy", reward::pairwise_accuracy(model, dataset)}}};
}

StageResult Pipeline::train_policy(const std::string& algo) {
  if (algo != "ppo" && algo != "dpo") throw ConfigError("unknown algo '" + algo + "'");
  const auto ref = reference_policy();
  std::map<std::string, std::string> inputs;
  if (config_.include_sft_reference) inputs["sft_policy"] = config_.paths.sft_policy;
  const std::string policy_out = work_path("policy_" + algo + ".json");
  const std::string history_out = work_path("policy_" + algo + "_history.jsonl");
  std::vector<json> history;
  json summary;
  json stage_config{{"algo", algo}, {"include_sft_reference", config_.include_sft_reference}};

  if (algo == "ppo") {
    require(work_path("reward_model.json"), "reward_model.json (run train-reward)");
    const auto model = reward::load_model(work_path("reward_model.json"));
    const auto prompts = candidate_sets(false);
    inputs["reward_model"] = work_path("reward_model.json");
    inputs["corpus"] = work_path("corpus.jsonl");
    inputs["split"] = work_path("split.json");
    auto result = policy::train_policy_ppo(prompts, ref, model, config_.ppo);
    result.policy.temperature = config_.policy_temperature;
    result.policy.top_p = config_.policy_top_p;
    policy::save_policy(policy_out, result.policy);
    for (const auto& h : result.history) {
      history.push_back(json{{"step", h.step},
                             {"epoch", h.epoch},
                             {"mean_reward", h.diagnostics.mean_reward},
                             {"mean_kl", h.diagnostics.mean_kl},
                             {"clip_fraction", h.diagnostics.clip_fraction}});
    }
    summary = json{{"prompts", prompts.size()},
                   {"epoch_expected_reward", result.epoch_expected_reward},
                   {"epoch_kl", result.epoch_kl}};
    stage_config["ppo"] = policy::to_json(config_.ppo);
  } else {
    require(work_path("preferences.jsonl"), "preferences.jsonl (run annotate)");
    const auto dataset = reward::load_dataset(work_path("preferences.jsonl"));
    inputs["preferences"] = work_path("preferences.jsonl");
    auto result = policy::train_policy_dpo(dataset, ref, config_.dpo, config_.reward.features);
    result.policy.temperature = config_.policy_temperature;
    result.policy.top_p = config_.policy_top_p;
    policy::save_policy(policy_out, result.policy);
    for (const auto& h : result.history) {
      history.push_back(json{{"step", h.step}, {"epoch", h.epoch}, {"loss", h.loss}, {"mean_margin", h.mean_margin}});
    }
    summary = json{{"records", dataset.size()},
                   {"final_loss", result.history.empty() ? json(nullptr) : json(result.history.back().loss)}};
    stage_config["dpo"] = policy::to_json(config_.dpo);
    stage_config["features"] = features::to_json(config_.reward.features);
  }
  jsonl::write(history_out, history);
  write_manifest("train-policy-" + algo, inputs, {policy_out, history_out}, stage_config);
  return {"train-policy", {policy_out, history_out}, summary};
}

namespace {

struct EvalRow {
  std::string item_id;
  std::string source;
  std::string hypothesis;
  std::vector<std::string> references;
};

// Policy selection per held-out prompt; the prompt's other translations are
// the references.
std::vector<EvalRow> selection_rows(const policy::RankingPolicy& pol, const std::vector<policy::CandidateSet>& sets,
                                    policy::SelectMode mode, Rng* rng) {
  std::vector<EvalRow> rows;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto sel = policy::select_translation(pol, sets[i], mode, rng);
    EvalRow r{"heldout-" + std::to_string(i + 1), sets[i].source, sel.candidate, {}};
    for (const auto& c : sets[i].candidates) {
      if (c != sel.candidate) r.references.push_back(c);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

json chrf_report(const std::string& metric, const metrics::ChrfConfig& cfg, const std::vector<EvalRow>& rows) {
  std::vector<metrics::ChrfItem> items;
  for (const auto& r : rows) items.push_back({r.hypothesis, r.references});
  const auto result = metrics::corpus_chrf(items, cfg);
  json per = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    per.push_back(json{{"item_id", rows[i].item_id},
                       {"hypothesis", rows[i].hypothesis},
                       {"score", result.sentence_scores[i]},
                       {"best_reference", result.best_reference[i]}});
  }
  return json{{"metric", metric},
              {"config", metrics::to_json(cfg)},
              {"corpus_score", result.corpus_score},
              {"mean_sentence_score", result.mean_sentence_score},
              {"items", per},
              {"unresolved", 0}};
}

}  // namespace

StageResult Pipeline::evaluate(const std::string& metric) {
  static const std::set<std::string> kMetrics{"chrf", "chrfpp", "winrate", "classify", "cs"};
  if (!kMetrics.count(metric)) throw ConfigError("unknown metric '" + metric + "'");
  std::map<std::string, std::string> inputs;
  const bool from_file = !config_.eval_input.empty();
  if (from_file) {
    require(config_.eval_input, "evaluation.input");
    inputs["input"] = config_.eval_input;
  }

  // Rows from the evaluation input or from the trained policy's selections.
  auto rows_for = [&]() {
    std::vector<EvalRow> rows;
    if (from_file) {
      jsonl::for_each(config_.eval_input, [&](std::size_t line_no, const json& j) {
        try {
          EvalRow r;
          r.item_id = j.at("item_id").get<std::string>();
          r.source = j.value("source", "");
          r.hypothesis = j.contains("hypothesis") ? j.at("hypothesis").get<std::string>() : j.at("sentence").get<std::string>();
          r.references = j.value("references", std::vector<std::string>{});
          rows.push_back(std::move(r));
        } catch (const json::exception& e) {
          throw Error(config_.eval_input + ":" + std::to_string(line_no) + ": " + e.what());
        }
      });
      return rows;
    }
    inputs["policy"] = work_path("policy_" + config_.algo + ".json");
    inputs["corpus"] = work_path("corpus.jsonl");
    inputs["split"] = work_path("split.json");
    return selection_rows(load_trained_policy(), candidate_sets(true), policy::SelectMode::kGreedy, nullptr);
  };

  json report;
  std::vector<std::string> outputs;
  if (metric == "chrf" || metric == "chrfpp") {
    auto cfg = config_.chrf;
    if (metric == "chrfpp" && cfg.max_word_order == 0) cfg.max_word_order = 2;
    if (metric == "chrf") cfg.max_word_order = 0;
    report = chrf_report(metric, cfg, rows_for());
  } else if (metric == "winrate") {
    std::vector<metrics::JudgeItem> items;
    std::string champion = "a";
    if (from_file) {
      jsonl::for_each(config_.eval_input, [&](std::size_t line_no, const json& j) {
        try {
          items.push_back({j.at("item_id").get<std::string>(), j.at("source").get<std::string>(), "a",
                           j.at("hypothesis_a").get<std::string>(), "b", j.at("hypothesis_b").get<std::string>()});
        } catch (const json::exception& e) {
          throw Error(config_.eval_input + ":" + std::to_string(line_no) + ": " + e.what());
        }
      });
    } else {
      champion = "policy";
      const auto sets = candidate_sets(true);
      const auto pol = load_trained_policy();
      inputs["policy"] = work_path("policy_" + config_.algo + ".json");
      inputs["corpus"] = work_path("corpus.jsonl");
      inputs["split"] = work_path("split.json");
      const auto ref = reference_policy();
      const auto baseline = ref.is_uniform() ? policy::RankingPolicy::zeros(pol.feature_config) : *ref.frozen_policy();
      for (std::size_t i = 0; i < sets.size(); ++i) {
        items.push_back({"heldout-" + std::to_string(i + 1), sets[i].source, "policy",
                         policy::select_translation(pol, sets[i], policy::SelectMode::kGreedy).candidate,
                         "baseline", policy::select_translation(baseline, sets[i], policy::SelectMode::kGreedy).candidate});
      }
    }
    std::unique_ptr<metrics::Judge> judge;
    std::unique_ptr<annotator::HttpChatClient> client;
    if (config_.judge_backend == "llm") {
      client = make_client(config_.judge, work_path("judge_calls.jsonl"));
      judge = std::make_unique<metrics::LlmJudge>(*client);
    } else {
      judge = std::make_unique<metrics::OracleJudge>(make_oracle("judge"));
      inputs["oracle_weights"] = config_.paths.oracle_weights;
    }
    const auto prefs = metrics::judge_pairs(items, *judge, config_.judge.temperatures,
                                            derive_seed(config_.seed, "judge"), config_.judge.parallelism);
    std::vector<json> lines;
    for (const auto& p : prefs) lines.push_back(metrics::to_json(p));
    const std::string prefs_out = work_path("judge_preferences.jsonl");
    jsonl::write(prefs_out, lines);
    outputs.push_back(prefs_out);
    const auto wr = metrics::win_rate(prefs, champion);
    report = json{{"metric", "winrate"},
                  {"config", {{"judge_backend", config_.judge_backend}, {"temperatures", config_.judge.temperatures}}},
                  {"champion", champion},
                  {"result", metrics::to_json(wr)},
                  {"unresolved", wr.unresolved}};
  } else if (metric == "classify") {
    if (!from_file) throw ConfigError("evaluate --metric classify requires evaluation.input");
    std::vector<std::string> preds, golds;
    jsonl::for_each(config_.eval_input, [&](std::size_t line_no, const json& j) {
      try {
        preds.push_back(j.at("prediction").get<std::string>());
        golds.push_back(j.at("gold").get<std::string>());
      } catch (const json::exception& e) {
        throw Error(config_.eval_input + ":" + std::to_string(line_no) + ": " + e.what());
      }
    });
    report = json{{"metric", "classify"},
                  {"config", {{"labels", metrics::kSentimentLabels}}},
                  {"result", metrics::to_json(metrics::classification_metrics(preds, golds))}};
  } else {
    if (config_.paths.lexicons.empty()) throw ConfigError("paths.lexicons is not configured");
    for (const auto& [lang, path] : config_.paths.lexicons) {
      require(path, "paths.lexicons." + lang);
      inputs["lexicon_" + lang] = path;
    }
    const auto lex = metrics::load_lexicons(config_.paths.lexicons);
    const auto rows = rows_for();
    json items = json::array();
    std::size_t correct = 0, reason_a = 0, reason_b = 0;
    for (const auto& r : rows) {
      const auto res = metrics::cs_correctness(r.hypothesis, lex);
      correct += res.correct ? 1 : 0;
      for (const auto& why : res.reasons) (why == "a" ? reason_a : reason_b)++;
      json item = metrics::to_json(res);
      item["item_id"] = r.item_id;
      item["sentence"] = r.hypothesis;
      items.push_back(item);
    }
    report = json{{"metric", "cs"},
                  {"config", {{"languages", [&] {
                                 std::vector<std::string> l;
                                 for (const auto& [k, v] : config_.paths.lexicons) l.push_back(k);
                                 return l;
                               }()}}},
                  {"correct", correct},
                  {"total", rows.size()},
                  {"correct_rate", rows.empty() ? json(nullptr) : json(static_cast<double>(correct) / rows.size())},
                  {"reason_a", reason_a},
                  {"reason_b", reason_b},
                  {"items", items}};
  }
  const std::string out = work_path("eval_" + metric + ".json");
  write_json(out, report);
  outputs.insert(outputs.begin(), out);
  write_manifest("evaluate-" + metric, inputs, outputs, report.at("config"));
  json summary = report;
  summary.erase("items");
  return {"evaluate-" + metric, outputs, summary};
}

StageResult Pipeline::sweep_temperature(const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("temperature grid is empty");
  for (double t : grid) {
    if (!(t > 0)) throw ConfigError("temperatures must be > 0");
  }
  auto pol = load_trained_policy();
  const auto sets = candidate_sets(true);
  auto chrf_cfg = config_.chrf;
  chrf_cfg.max_word_order = 0;
  auto chrfpp_cfg = config_.chrf;
  if (chrfpp_cfg.max_word_order == 0) chrfpp_cfg.max_word_order = 2;

  json rows = json::array();
  for (double t : grid) {
    pol.temperature = t;
    Rng rng(derive_seed(config_.seed, "sweep\x1f" + fmt_double(t)));
    const auto eval_rows = selection_rows(pol, sets, policy::SelectMode::kSample, &rng);
    std::vector<metrics::ChrfItem> items;
    for (const auto& r : eval_rows) items.push_back({r.hypothesis, r.references});
    const auto c = metrics::corpus_chrf(items, chrf_cfg);
    const auto cpp = metrics::corpus_chrf(items, chrfpp_cfg);
    rows.push_back(json{{"temperature", t},
                        {"chrf", c.corpus_score},
                        {"chrf_sentence_mean", c.mean_sentence_score},
                        {"chrfpp", cpp.corpus_score},
                        {"chrfpp_sentence_mean", cpp.mean_sentence_score}});
  }
  const std::string out = work_path("sweep_temperature.json");
  const json report{{"metric", "sweep-temperature"},
                    {"config", {{"top_p", pol.top_p}, {"grid", grid}, {"chrf", metrics::to_json(config_.chrf)}}},
                    {"rows", rows}};
  write_json(out, report);
  write_manifest("sweep-temperature",
                 {{"policy", work_path("policy_" + config_.algo + ".json")},
                  {"corpus", work_path("corpus.jsonl")},
                  {"split", work_path("split.json")}},
                 {out}, report.at("config"));
  return {"sweep-temperature", {out}, json{{"rows", rows}}};
}

StageResult Pipeline::report() {
  static const std::vector<std::string> kReports{
      "bias_report.json", "alignment.json",  "prompt_comparison.json", "eval_chrf.json", "eval_chrfpp.json",
      "eval_winrate.json", "eval_classify.json", "eval_cs.json",       "sweep_temperature.json"};
  json sections = json::object();
  std::map<std::string, std::string> inputs;
  for (const auto& name : kReports) {
    const std::string path = work_path(name);
    if (!fs::exists(path)) continue;
    json j = read_json(path);
    j.erase("items");
    j.erase("details");
    sections[fs::path(name).stem().string()] = j;
    inputs[fs::path(name).stem().string()] = path;
  }
  const std::string out = work_path("report.json");
  write_json(out, json{{"config", config_.snapshot()}, {"reports", sections}});
  write_manifest("report", inputs, {out}, json::object());
  return {"report", {out}, json{{"sections", sections.size()}}};
}

std::vector<StageResult> Pipeline::run_all() {
  // Validate every external input before the first stage runs.
  require(config_.paths.corpus, "paths.corpus");
  if (config_.backend == "oracle" || config_.judge_backend == "oracle") {
    require(config_.paths.oracle_weights, "paths.oracle_weights");
  }
  for (const auto& [lang, path] : config_.paths.lexicons) require(path, "paths.lexicons." + lang);
  if (config_.include_sft_reference) require(config_.paths.sft_policy, "paths.sft_policy");
  if (!config_.paths.human_labels.empty()) require(config_.paths.human_labels, "paths.human_labels");

  std::vector<StageResult> out;
  out.push_back(ingest());
  out.push_back(make_pairs());
  out.push_back(annotate(config_.backend));
  out.push_back(audit_bias(config_.backend));
  if (!config_.paths.human_labels.empty()) out.push_back(align_score());
  out.push_back(train_reward());
  out.push_back(train_policy(config_.algo));
  if (config_.eval_input.empty()) {
    out.push_back(evaluate("chrf"));
    out.push_back(evaluate("chrfpp"));
    out.push_back(evaluate("winrate"));
    if (!config_.paths.lexicons.empty()) out.push_back(evaluate("cs"));
  }
  out.push_back(sweep_temperature(config_.temperature_grid));
  out.push_back(report());
  return out;
}

void Pipeline::serve() {
  if (!config_.service) throw ConfigError("service section is not configured");
  require(work_path("pairs.jsonl"), "pairs.jsonl (run make-pairs)");
  service::AnnotationStore store({work_path("annotation"), derive_seed(config_.seed, "display"), "", nullptr});
  std::vector<service::TaskSpec> specs;
  for (const auto& p : corpus::load_pairs(work_path("pairs.jsonl"))) specs.push_back(service::task_spec(p));
  store.add_tasks(specs);
  auto server_config = *config_.service;
  if (server_config.static_dir.empty()) server_config.static_dir = config_.paths.static_dir;
  service::AnnotationServer server(store, server_config);
  server.run();
}

}  // namespace chai::pipeline
