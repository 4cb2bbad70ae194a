// Stage orchestration behind the command-line tool. Every stage reads its
// inputs from the work directory (or configured paths), writes its outputs
// there, and records a manifest of input hashes, the configuration it used
// and its seed.

#ifndef CHAI_PIPELINE_HPP_
#define CHAI_PIPELINE_HPP_

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chai/annotation_server.hpp"
#include "chai/annotator.hpp"
#include "chai/chrf.hpp"
#include "chai/oracle.hpp"
#include "chai/policy.hpp"
#include "chai/reward.hpp"

namespace chai::pipeline {

using json = nlohmann::json;

struct Paths {
  std::string corpus;
  std::string corpus_format = "jsonl";
  std::string work_dir;
  std::map<std::string, std::string> lexicons;  // language -> word list
  std::string oracle_weights;                   // JSON {word: weight}
  std::string sft_policy;                       // frozen reference policy
  std::string human_labels;
  std::string exemplars;
  std::string static_dir;
};

struct OracleSettings {
  double decisiveness = 2.0;
  double positional_bias = 0.1;
  int preferred_position = 0;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  Paths paths;
  double held_out_fraction = 0.2;

  std::string pairing = "all_pairs";  // or "sampled"
  std::size_t sample_pairs = 1;       // sampled mode: total pairs kept

  std::string backend = "oracle";  // or "llm"
  annotator::AnnotatorConfig annotator;
  std::string template_strategy = "basic";
  int shots = 0;
  OracleSettings oracle;
  std::size_t audit_max_pairs = 0;  // 0 = every pair

  reward::RewardTrainConfig reward;

  std::string algo = "ppo";
  policy::PPOConfig ppo;
  policy::DPOConfig dpo;
  bool include_sft_reference = false;
  double policy_temperature = 0.6;
  double policy_top_p = 0.9;

  metrics::ChrfConfig chrf;
  std::string judge_backend = "oracle";
  annotator::AnnotatorConfig judge;
  std::vector<double> temperature_grid{0.2, 0.4, 0.6, 0.8, 1.0};
  std::string eval_input;  // JSONL for classify/cs, optional for chrf/winrate

  std::optional<service::ServerConfig> service;

  /// Throws ConfigError with the offending field in the message. Relative
  /// paths resolve against base_dir.
  static PipelineConfig from_json(const json& j, const std::string& base_dir = ".");
  static PipelineConfig load(const std::string& path);

  /// Configuration echo for manifests: everything except paths and secrets.
  json snapshot() const;
};

struct StageResult {
  std::string stage;
  std::vector<std::string> outputs;  // paths written
  json summary;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  StageResult ingest();
  StageResult make_pairs();
  StageResult annotate(const std::string& backend);
  StageResult audit_bias(const std::string& backend);
  StageResult align_score();
  StageResult compare_prompts(const std::string& backend);
  StageResult train_reward();
  StageResult train_policy(const std::string& algo);
  StageResult evaluate(const std::string& metric);
  StageResult sweep_temperature(const std::vector<double>& grid);
  StageResult report();
  /// ingest .. report with the oracle backends.
  std::vector<StageResult> run_all();

  /// Starts the annotation service over the current pairs; blocks.
  void serve();

  const PipelineConfig& config() const { return config_; }
  std::string work_path(const std::string& name) const;

 private:
  void require(const std::string& path, const std::string& what) const;
  void write_manifest(const std::string& stage, const std::map<std::string, std::string>& inputs,
                      const std::vector<std::string>& outputs, const json& config) const;

  annotator::OracleAnnotator make_oracle(const std::string& stream) const;
  policy::ReferencePolicy reference_policy() const;
  std::vector<policy::CandidateSet> candidate_sets(bool held_out) const;
  policy::RankingPolicy load_trained_policy() const;

  PipelineConfig config_;
};

/// Reads {word: weight} and returns a summed-weight scorer over lowercased
/// whitespace tokens.
annotator::ScoreFn load_weight_scorer(const std::string& path);

}  // namespace chai::pipeline

#endif  // CHAI_PIPELINE_HPP_
