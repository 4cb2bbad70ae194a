#include "chai/judge.hpp"

#include <atomic>
#include <regex>
#include <thread>

#include "chai/rng.hpp"

namespace chai::metrics {

Choice parse_judge_choice(std::string_view response) {
  static const std::regex kMention(R"(translation[\s_-]*([12])(?![0-9]))", std::regex::icase);
  bool saw_first = false;
  bool saw_second = false;
  const std::string s(response);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kMention); it != std::sregex_iterator(); ++it) {
    ((*it)[1].str() == "1" ? saw_first : saw_second) = true;
  }
  if (saw_first == saw_second) return Choice::kUnparseable;
  return saw_first ? Choice::kFirst : Choice::kSecond;
}

Choice LlmJudge::judge(const std::string& source, const std::string& first, const std::string& second,
                       double temperature, std::size_t, std::string* raw) {
  const auto prompt = prompts::render_judge_prompt(source, first, second, languages_, tmpl_);
  const std::string reply =
      backend_.complete({{"system", prompt.system_text}, {"user", prompt.user_text}}, temperature);
  if (raw != nullptr) *raw = reply;
  return parse_judge_choice(reply);
}

Choice OracleJudge::judge(const std::string& source, const std::string& first, const std::string& second,
                          double, std::size_t draw, std::string* raw) {
  const Choice c = oracle_.draw(source, first, second, draw);
  if (raw != nullptr) *raw = c == Choice::kFirst ? "Translation_1" : "Translation_2";
  return c;
}

std::string to_string(Winner w) {
  switch (w) {
    case Winner::kA: return "a";
    case Winner::kB: return "b";
    case Winner::kUnresolved: break;
  }
  return "unresolved";
}

std::optional<std::string> JudgePreference::winner_id() const {
  if (majority == Winner::kA) return system_a_id;
  if (majority == Winner::kB) return system_b_id;
  return std::nullopt;
}

namespace {

std::string choice_name(Choice c) {
  if (c == Choice::kFirst) return "Translation_1";
  if (c == Choice::kSecond) return "Translation_2";
  return "unparseable";
}

Choice choice_from_name(const std::string& s) {
  if (s == "Translation_1") return Choice::kFirst;
  if (s == "Translation_2") return Choice::kSecond;
  if (s == "unparseable") return Choice::kUnparseable;
  throw Error("unknown judge choice '" + s + "'");
}

Winner winner_from_name(const std::string& s) {
  if (s == "a") return Winner::kA;
  if (s == "b") return Winner::kB;
  if (s == "unresolved") return Winner::kUnresolved;
  throw Error("unknown judge majority '" + s + "'");
}

bool display_swap_for(const JudgeItem& item, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "judge-order\x1f" + item.item_id));
  return rng.bernoulli(0.5);
}

void finish(JudgePreference& p) {
  const annotator::Label m = annotator::majority_vote(p.per_temperature_choices);
  if (!m) {
    p.majority = Winner::kUnresolved;
    return;
  }
  // Display position 0 holds system a unless swapped.
  const bool a_won = (*m == 0) != p.display_swap;
  p.majority = a_won ? Winner::kA : Winner::kB;
}

JudgePreference start(const JudgeItem& item, const Judge& judge, std::uint64_t seed) {
  if (item.system_a_id == item.system_b_id) throw Error("judge item compares a system with itself");
  JudgePreference p;
  p.item_id = item.item_id;
  p.system_a_id = item.system_a_id;
  p.system_b_id = item.system_b_id;
  p.display_swap = display_swap_for(item, seed);
  p.judge_id = judge.id();
  return p;
}

}  // namespace

json to_json(const JudgePreference& p) {
  json choices = json::array();
  for (auto c : p.per_temperature_choices) choices.push_back(choice_name(c));
  return json{{"item_id", p.item_id},
              {"system_a_id", p.system_a_id},
              {"system_b_id", p.system_b_id},
              {"display_swap", p.display_swap},
              {"per_temperature_choices", choices},
              {"raw_responses", p.raw_responses},
              {"majority", to_string(p.majority)},
              {"judge_id", p.judge_id}};
}

JudgePreference judge_preference_from_json(const json& j) {
  JudgePreference p;
  p.item_id = j.at("item_id").get<std::string>();
  p.system_a_id = j.at("system_a_id").get<std::string>();
  p.system_b_id = j.at("system_b_id").get<std::string>();
  p.display_swap = j.value("display_swap", false);
  for (const auto& c : j.value("per_temperature_choices", json::array())) {
    p.per_temperature_choices.push_back(choice_from_name(c.get<std::string>()));
  }
  p.raw_responses = j.value("raw_responses", std::vector<std::string>{});
  p.majority = winner_from_name(j.at("majority").get<std::string>());
  p.judge_id = j.value("judge_id", "");
  return p;
}

JudgePreference judge_pair(const JudgeItem& item, Judge& judge, const std::vector<double>& temperatures,
                           std::uint64_t seed) {
  if (temperatures.empty()) throw ConfigError("judge temperatures must be non-empty");
  JudgePreference p = start(item, judge, seed);
  if (item.translation_a == item.translation_b) return p;  // nothing to judge
  const std::string& first = p.display_swap ? item.translation_b : item.translation_a;
  const std::string& second = p.display_swap ? item.translation_a : item.translation_b;
  for (std::size_t i = 0; i < temperatures.size(); ++i) {
    std::string raw;
    p.per_temperature_choices.push_back(judge.judge(item.source, first, second, temperatures[i], i, &raw));
    p.raw_responses.push_back(std::move(raw));
  }
  finish(p);
  return p;
}

std::vector<JudgePreference> judge_pairs(const std::vector<JudgeItem>& items, Judge& judge,
                                         const std::vector<double>& temperatures, std::uint64_t seed,
                                         int parallelism) {
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  std::vector<JudgePreference> out(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size() || failed.load()) return;
      try {
        out[i] = judge_pair(items[i], judge, temperatures, seed);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(parallelism), std::max<std::size_t>(items.size(), 1));
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

WinRate win_rate(const std::vector<JudgePreference>& preferences, const std::string& champion) {
  WinRate w;
  for (const auto& p : preferences) {
    if (p.system_a_id != champion && p.system_b_id != champion) {
      throw Error("item '" + p.item_id + "' does not involve system '" + champion + "'");
    }
    const auto winner = p.winner_id();
    if (!winner) {
      ++w.unresolved;
      continue;
    }
    ++w.resolved;
    if (*winner == champion) ++w.wins;
  }
  if (w.resolved > 0) w.win_rate = static_cast<double>(w.wins) / static_cast<double>(w.resolved);
  return w;
}

json to_json(const WinRate& w) {
  return json{{"win_rate", w.win_rate ? json(*w.win_rate) : json(nullptr)},
              {"wins", w.wins},
              {"resolved", w.resolved},
              {"unresolved", w.unresolved}};
}

}  // namespace chai::metrics
