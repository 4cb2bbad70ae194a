// Pairwise judging of two systems' outputs and win-rate aggregation.

#ifndef CHAI_JUDGE_HPP_
#define CHAI_JUDGE_HPP_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chai/annotator.hpp"
#include "chai/oracle.hpp"
#include "chai/prompt_template.hpp"

namespace chai::metrics {

using json = nlohmann::json;
using annotator::Choice;

/// "Translation_1" -> kFirst, "Translation_2" -> kSecond. Tolerates case,
/// surrounding quotes/punctuation and a single mention inside a longer reply;
/// replies naming both or neither are unparseable.
Choice parse_judge_choice(std::string_view response);

class Judge {
 public:
  virtual ~Judge() = default;
  /// `draw` numbers the repeated queries for one display (one per temperature).
  virtual Choice judge(const std::string& source, const std::string& first,
                       const std::string& second, double temperature, std::size_t draw,
                       std::string* raw) = 0;
  virtual std::string id() const = 0;
};

/// Judge backed by a chat model and the pairwise judge prompt.
class LlmJudge : public Judge {
 public:
  LlmJudge(annotator::ChatBackend& backend, prompts::JudgeLanguages languages = {},
           prompts::PromptTemplate tmpl = prompts::judge_template())
      : backend_(backend), languages_(std::move(languages)), tmpl_(std::move(tmpl)) {}

  Choice judge(const std::string& source, const std::string& first, const std::string& second,
               double temperature, std::size_t draw, std::string* raw) override;
  std::string id() const override { return backend_.model_name(); }

 private:
  annotator::ChatBackend& backend_;
  prompts::JudgeLanguages languages_;
  prompts::PromptTemplate tmpl_;
};

/// Judge backed by the synthetic oracle.
class OracleJudge : public Judge {
 public:
  explicit OracleJudge(annotator::OracleAnnotator oracle) : oracle_(std::move(oracle)) {}

  Choice judge(const std::string& source, const std::string& first, const std::string& second,
               double temperature, std::size_t draw, std::string* raw) override;
  std::string id() const override { return oracle_.id; }

 private:
  annotator::OracleAnnotator oracle_;
};

struct JudgeItem {
  std::string item_id;
  std::string source;
  std::string system_a_id;
  std::string translation_a;
  std::string system_b_id;
  std::string translation_b;
};

enum class Winner { kA, kB, kUnresolved };

std::string to_string(Winner w);

struct JudgePreference {
  std::string item_id;
  std::string system_a_id;
  std::string system_b_id;
  bool display_swap = false;  // true when b was shown as Translation_1
  std::vector<Choice> per_temperature_choices;  // display positions
  std::vector<std::string> raw_responses;
  Winner majority = Winner::kUnresolved;
  std::string judge_id;

  std::optional<std::string> winner_id() const;
};

json to_json(const JudgePreference& p);
JudgePreference judge_preference_from_json(const json& j);

/// Shows the two translations in an order drawn from (seed, item_id), queries
/// the judge once per temperature, majority-votes over display positions and
/// maps the result back to systems. Identical translations are a tie without
/// a query.
JudgePreference judge_pair(const JudgeItem& item, Judge& judge,
                           const std::vector<double>& temperatures, std::uint64_t seed);

/// judge_pair over many items, up to `parallelism` at a time, order kept.
std::vector<JudgePreference> judge_pairs(const std::vector<JudgeItem>& items, Judge& judge,
                                         const std::vector<double>& temperatures,
                                         std::uint64_t seed, int parallelism = 1);

struct WinRate {
  std::optional<double> win_rate;  // empty when nothing is resolved
  std::size_t wins = 0;
  std::size_t resolved = 0;
  std::size_t unresolved = 0;
};

/// wins(champion) / resolved. Throws chai::Error if a record does not
/// involve the champion.
WinRate win_rate(const std::vector<JudgePreference>& preferences, const std::string& champion);

json to_json(const WinRate& w);

}  // namespace chai::metrics

#endif  // CHAI_JUDGE_HPP_
