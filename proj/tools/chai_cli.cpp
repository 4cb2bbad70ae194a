// chai: command-line front end for the preference-data, reward, policy and
// evaluation stages. Exit codes: 0 success, 1 stage failure, 2 config error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>

#include "chai/jsonl.hpp"
#include "chai/pipeline.hpp"
#include "chai/prompt_template.hpp"
#include "chai/synthetic.hpp"

namespace {

using chai::pipeline::Pipeline;
using chai::pipeline::PipelineConfig;
using chai::pipeline::StageResult;
using nlohmann::json;

void print(const StageResult& r) {
  std::cout << json{{"stage", r.stage}, {"outputs", r.outputs}, {"summary", r.summary}}.dump() << "\n";
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw chai::ConfigError("--grid: '" + item + "' is not a number");
    }
  }
  return out;
}

void write_synthetic(const std::string& dir, std::size_t rows, std::size_t candidates, std::uint64_t seed) {
  namespace fs = std::filesystem;
  const auto world = chai::synthetic::make_world(seed);
  const auto corpus = chai::synthetic::make_corpus(world, rows, candidates, seed);
  chai::corpus::save_corpus_jsonl((fs::path(dir) / "corpus.jsonl").string(), corpus);
  json weights = json::object();
  for (const auto& [w, v] : world.weights) weights[w] = v;
  chai::text::write_file((fs::path(dir) / "oracle_weights.json").string(), weights.dump(2) + "\n");
  for (const auto& [lang, words] : chai::synthetic::lexicon_words(world)) {
    std::string body;
    for (const auto& w : words) body += w + "\n";
    chai::text::write_file((fs::path(dir) / ("lexicon_" + lang + ".txt")).string(), body);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-data, reward-model and policy pipeline for code-mixed translation"};
  app.require_subcommand(1);
  std::string config_path;
  std::string work_dir;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "pipeline configuration (JSON)")->required();
    sub->add_option("-w,--work-dir", work_dir, "override paths.work_dir");
  };

  std::string backend = "oracle";
  std::string algo;
  std::string metric;
  std::string grid;
  std::string out_dir;
  std::size_t rows = 200;
  std::size_t candidates = 4;
  std::uint64_t seed = 0;

  auto* ingest = app.add_subcommand("ingest", "load and normalize the parallel corpus, split, build SFT rows");
  auto* make_pairs = app.add_subcommand("make-pairs", "build preference pairs from the training split");
  auto* annotate = app.add_subcommand("annotate", "label preference pairs");
  annotate->add_option("--backend", backend)->check(CLI::IsMember({"llm", "oracle"}));
  auto* audit = app.add_subcommand("audit-bias", "positional-bias audit (original vs swapped order)");
  audit->add_option("--backend", backend)->check(CLI::IsMember({"llm", "oracle"}));
  auto* align = app.add_subcommand("align-score", "agreement of verdicts with human majority labels");
  auto* compare = app.add_subcommand("compare-prompts", "alignment per prompting strategy");
  compare->add_option("--backend", backend)->check(CLI::IsMember({"llm", "oracle"}));
  auto* train_reward = app.add_subcommand("train-reward", "fit the Bradley-Terry reward model");
  auto* train_policy = app.add_subcommand("train-policy", "optimize the re-ranking policy");
  train_policy->add_option("--algo", algo)->check(CLI::IsMember({"ppo", "dpo"}));
  auto* evaluate = app.add_subcommand("evaluate", "compute one metric report");
  evaluate->add_option("--metric", metric)->required()->check(CLI::IsMember({"chrf", "chrfpp", "winrate", "classify", "cs"}));
  auto* sweep = app.add_subcommand("sweep-temperature", "chrF/chrF++ over policy sampling temperatures");
  sweep->add_option("--grid", grid, "comma-separated temperatures");
  auto* serve = app.add_subcommand("serve", "run the human annotation service");
  auto* report = app.add_subcommand("report", "collect metric reports into report.json");
  auto* all = app.add_subcommand("pipeline", "run every offline stage in order");
  for (auto* s : {ingest, make_pairs, annotate, audit, align, compare, train_reward, train_policy, evaluate, sweep,
                  serve, report, all}) {
    add_config(s);
  }

  auto* templates = app.add_subcommand("templates", "write the built-in prompt templates");
  templates->add_option("--out", out_dir)->required();
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus, oracle weights and lexicons");
  synth->add_option("--out", out_dir)->required();
  synth->add_option("--rows", rows);
  synth->add_option("--candidates", candidates);
  synth->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (templates->parsed()) {
      for (const auto& [name, t] : chai::prompts::default_templates()) {
        chai::text::write_file((std::filesystem::path(out_dir) / (name + ".txt")).string(),
                               chai::prompts::serialize_template(t));
      }
      return 0;
    }
    if (synth->parsed()) {
      write_synthetic(out_dir, rows, candidates, seed);
      return 0;
    }

    auto config = PipelineConfig::load(config_path);
    if (!work_dir.empty()) config.paths.work_dir = work_dir;
    Pipeline p(config);
    if (ingest->parsed()) print(p.ingest());
    if (make_pairs->parsed()) print(p.make_pairs());
    if (annotate->parsed()) print(p.annotate(annotate->count("--backend") ? backend : config.backend));
    if (audit->parsed()) print(p.audit_bias(audit->count("--backend") ? backend : config.backend));
    if (align->parsed()) print(p.align_score());
    if (compare->parsed()) print(p.compare_prompts(compare->count("--backend") ? backend : config.backend));
    if (train_reward->parsed()) print(p.train_reward());
    if (train_policy->parsed()) print(p.train_policy(algo.empty() ? config.algo : algo));
    if (evaluate->parsed()) print(p.evaluate(metric));
    if (sweep->parsed()) print(p.sweep_temperature(grid.empty() ? config.temperature_grid : parse_grid(grid)));
    if (report->parsed()) print(p.report());
    if (all->parsed()) {
      for (const auto& r : p.run_all()) print(r);
    }
    if (serve->parsed()) p.serve();
    return 0;
  } catch (const chai::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
