#include "chai/prompt_template.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "chai/jsonl.hpp"
#include "chai/text.hpp"

namespace chai::prompts {
namespace {

constexpr const char* kSpeakerIntro =
    "You are a fluent Hinglish speaker. Fluent Hinglish speakers are able to switch between Hindi "
    "and English in the same sentence effortlessly while having a conversation.";

constexpr const char* kPreferenceFormat =
    "The format of the output should be as follows: “My preference is:”,followed by the "
    "number 0 or 1 (which signifies the corresponding translated sentence) based on your "
    "preference.";

constexpr const char* kChoose =
    "Choose a translated statement that best aligns with how a fluent Hinglish speaker talks.";

constexpr const char* kQuery =
    "The English sentence is: {original_sent};\n"
    "Translated-sentence-0 is: {first_translation};\n"
    "Translated-sentence-1 is: {second_translation};";

constexpr const char* kAxisAccuracy =
    "1.Accuracy: It evaluates how effectively the translated sentence retains the meaning and "
    "information of the original sentence, while ensuring the correct usage of code-switched "
    "terms. For example, does the translation faithfully reflect the content of the original "
    "meaning? Is the key information missing, alternated or repeated in translated sentences? Does "
    "the translation introduce the new information which are not covered in original sentences?";

constexpr const char* kAxisNaturalness =
    "2.Naturalness: It assesses how natural and easy to understand the translated sentence is. For "
    "example, is the new translation elegant? Does the translated sentence seem difficult to "
    "understand, awkward, or contain unnatural phrasing?";

constexpr const char* kAxisSyntax =
    "3.Syntactic correctness: It considers grammar, syntax, and the seamless integration of "
    "code-switching in translated sentences. Are there any grammar or syntax issues in "
    "translation? Does code-mixing disrupt the flow of the sentence? Is it somewhat smooth but not "
    "perfectly integrated? Or is it smooth and seamless?";

constexpr const char* kAxisCodeSwitching =
    "4.Code-switching Correctness: It evaluates whether the given sentence is a correct instance "
    "of code-switching (CS). Specifically, we define a sentence as a correct CS sentence if it "
    "meets the following constraints: (a) it is not entirely in Hindi or English, and (b) no "
    "language other than Hindi or English is used.";

constexpr const char* kAxesHeader =
    "Below we define four evaluation axes for code-mixed translation quality: accuracy, "
    "naturalness, syntactic correctness, and Code-switching Correctness.";

const std::string& rule_preamble() {
  static const std::string text = std::string(
      "A good code-mixed translation seamlessly blends elements of two or more languages while "
      "maintaining the original meaning and context. \n"
      "It ensures clarity and fluency in both languages, allowing the message to be easily "
      "understood by speakers of all involved languages.\n") +
      kAxesHeader + "\n\n" + kAxisAccuracy + "\n\n" + kAxisNaturalness + "\n\n" + kAxisSyntax +
      "\n\n" + kAxisCodeSwitching;
  return text;
}

std::string basic_body() {
  return std::string(kSpeakerIntro) + "\n" +
         "You have an English sentence for which you’d like to choose the best Hinglish "
         "translation. \n" +
         kQuery + "\n\n" + kChoose + "\n" + kPreferenceFormat;
}

std::string cot_rationale_body() {
  return std::string(kSpeakerIntro) + "\n" +
         "You have an English sentence and two of its possible Hinglish translation. \n"
         "Explain the reason that which translation is better.\n"
         "The format of the output should be as follows: “Rationale:”,followed by the "
         "reasons in one paragraph.\n\n" +
         kQuery;
}

std::string cot_preference_body(bool with_examples) {
  return std::string(kSpeakerIntro) + "\n" +
         "You have an English sentence, two of its possible Hinglish translation, and "
         "corresponding rationale. \n" +
         kChoose + "\n" + kPreferenceFormat + "\n\n" + (with_examples ? "{examples}" : "") +
         kQuery + "\nRationale: {rationale}";
}

std::string kshot_body() {
  return std::string(kSpeakerIntro) + "\n" +
         "You have an English sentence for which you’d like to choose the best Hinglish "
         "translation. \n" +
         kChoose + "\n" +
         "You could only output 0 (if you prefers Translated-sentence-0) or output 1 (if you "
         "prefers Translated-sentence-1)\n\n"
         "{examples}" +
         kQuery + "\nMy preference is:";
}

constexpr const char* kExemplar =
    "»»»» Example »»»»\n"
    "The English sentence is: {original_sent};\n"
    "Translated-sentence-0 is: {first_translation};\n"
    "Translated-sentence-1 is: {second_translation};\n"
    "My preference is: {label}\n\n";

constexpr const char* kCotExemplar =
    "»»»» Example »»»»\n"
    "The English sentence is: {original_sent};\n"
    "Translated-sentence-0 is: {first_translation};\n"
    "Translated-sentence-1 is: {second_translation};\n"
    "Rationale: {rationale}\n"
    "My preference is: {label}\n\n";

constexpr const char* kExamplesFooter =
    "»»»» Follow the instructions and the example(s) above "
    "»»»»\n";

PromptTemplate make(std::string name, Strategy strategy, int k,
                    std::initializer_list<std::pair<const char*, std::string>> sections) {
  PromptTemplate t;
  t.name = std::move(name);
  t.strategy = strategy;
  t.k = k;
  for (const auto& [key, body] : sections) t.sections[key] = TemplateText::parse(body);
  return t;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  const std::string h = text::lowercase(haystack);
  const std::string n = text::lowercase(needle);
  return h.find(n) != std::string::npos;
}

// Markers that would let an input masquerade as prompt structure.
void reject_markers(std::string_view value, std::string_view what,
                    std::initializer_list<std::string_view> markers) {
  for (auto m : markers) {
    if (contains_ci(value, m)) {
      throw TemplateError(std::string(what) + " contains reserved template marker '" +
                          std::string(m) + "'");
    }
  }
}

void check_preference_input(std::string_view value, std::string_view what) {
  reject_markers(value, what,
                 {"Translated-sentence-", "My preference is", "The English sentence is:",
                  "»»»»"});
}

void check_judge_input(std::string_view value, std::string_view what) {
  reject_markers(value, what,
                 {"<Original>", "</Original>", "<Translation_1>", "</Translation_1>",
                  "<Translation_2>", "</Translation_2>"});
}

bool is_kshot(Strategy s) {
  return s == Strategy::kKShot || s == Strategy::kRuleKShot || s == Strategy::kRuleCotKShot;
}

bool is_cot(Strategy s) { return s == Strategy::kCot || s == Strategy::kRuleCotKShot; }

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kBasic: return "basic";
    case Strategy::kRuleAugmented: return "rule_augmented";
    case Strategy::kCot: return "cot";
    case Strategy::kKShot: return "kshot";
    case Strategy::kRuleKShot: return "rule_kshot";
    case Strategy::kRuleCotKShot: return "rule_cot_kshot";
  }
  return "basic";
}

Strategy parse_strategy(const std::string& s) {
  for (auto v : {Strategy::kBasic, Strategy::kRuleAugmented, Strategy::kCot, Strategy::kKShot,
                 Strategy::kRuleKShot, Strategy::kRuleCotKShot}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown prompt strategy '" + s + "'");
}

// ---------------------------------------------------------------------------
// TemplateText

TemplateText TemplateText::parse(std::string_view src) {
  TemplateText t;
  std::string literal;
  std::size_t i = 0;
  while (i < src.size()) {
    if (src[i] == '{') {
      const auto close = src.find('}', i + 1);
      if (close != std::string_view::npos && is_identifier(src.substr(i + 1, close - i - 1))) {
        if (!literal.empty()) t.segments_.push_back({false, std::move(literal)});
        literal.clear();
        t.segments_.push_back({true, std::string(src.substr(i + 1, close - i - 1))});
        i = close + 1;
        continue;
      }
    }
    literal.push_back(src[i]);
    ++i;
  }
  if (!literal.empty()) t.segments_.push_back({false, std::move(literal)});
  return t;
}

TemplateText TemplateText::bind(const Bindings& values) const {
  TemplateText out;
  for (const auto& seg : segments_) {
    Segment s = seg;
    if (seg.placeholder) {
      if (auto it = values.find(seg.text); it != values.end()) s = {false, it->second};
    }
    if (!s.placeholder && !out.segments_.empty() && !out.segments_.back().placeholder) {
      out.segments_.back().text += s.text;
    } else {
      out.segments_.push_back(std::move(s));
    }
  }
  return out;
}

std::string TemplateText::render(const Bindings& values) const {
  std::string out;
  for (const auto& seg : segments_) {
    if (!seg.placeholder) {
      out += seg.text;
      continue;
    }
    auto it = values.find(seg.text);
    if (it == values.end()) throw TemplateError("unbound placeholder {" + seg.text + "}");
    out += it->second;
  }
  return out;
}

std::set<std::string> TemplateText::placeholders() const {
  std::set<std::string> out;
  for (const auto& seg : segments_) {
    if (seg.placeholder) out.insert(seg.text);
  }
  return out;
}

bool TemplateText::has_placeholder(std::string_view name) const {
  return std::any_of(segments_.begin(), segments_.end(),
                     [&](const Segment& s) { return s.placeholder && s.text == name; });
}

std::string TemplateText::source() const {
  std::string out;
  for (const auto& seg : segments_) out += seg.placeholder ? "{" + seg.text + "}" : seg.text;
  return out;
}

// ---------------------------------------------------------------------------
// PromptTemplate

const TemplateText& PromptTemplate::section(const std::string& key) const {
  auto it = sections.find(key);
  if (it == sections.end()) throw TemplateError("template '" + name + "' has no section '" + key + "'");
  return it->second;
}

PromptTemplate parse_template(std::string_view contents) {
  PromptTemplate t;
  std::string current;
  std::string body;
  bool in_section = false;
  auto flush = [&] {
    if (!in_section) return;
    if (!body.empty() && body.back() == '\n') body.pop_back();
    t.sections[current] = TemplateText::parse(body);
    body.clear();
  };
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto nl = contents.find('\n', pos);
    const bool last = nl == std::string_view::npos;
    std::string_view line = contents.substr(pos, last ? std::string_view::npos : nl - pos);
    if (line.rfind("@@ ", 0) == 0) {
      std::istringstream ss{std::string(line.substr(3))};
      std::string key, value;
      ss >> key;
      std::getline(ss >> std::ws, value);
      if (key == "section") {
        flush();
        current = value;
        in_section = true;
      } else if (in_section) {
        throw TemplateError("header directive '" + key + "' after first section");
      } else if (key == "name") {
        t.name = value;
      } else if (key == "strategy") {
        t.strategy = parse_strategy(value);
      } else if (key == "k") {
        t.k = std::stoi(value);
      } else {
        throw TemplateError("unknown template directive '" + key + "'");
      }
    } else if (in_section) {
      body.append(line);
      if (!last) body.push_back('\n');
    } else if (!text::is_blank(line)) {
      throw TemplateError("text outside a section: " + std::string(line));
    }
    if (last) break;
    pos = nl + 1;
  }
  flush();
  if (t.sections.empty()) throw TemplateError("template has no sections");
  return t;
}

std::string serialize_template(const PromptTemplate& t) {
  std::string out = "@@ name " + t.name + "\n@@ strategy " + to_string(t.strategy) + "\n@@ k " +
                    std::to_string(t.k) + "\n";
  for (const auto& [key, body] : t.sections) out += "@@ section " + key + "\n" + body.source() + "\n";
  return out;
}

PromptTemplate load_template(const std::string& path) {
  try {
    return parse_template(text::read_file(path));
  } catch (const TemplateError& e) {
    throw TemplateError(path + ": " + e.what());
  }
}

const std::string& rules_text() { return rule_preamble(); }

PromptTemplate sft_template() {
  return make("sft", Strategy::kBasic, 0,
              {{"main", "Translate this from {Source} to {Target}:\n[Source]: {x}\n[Target]: "}});
}

PromptTemplate basic_preference_template() {
  return make("basic", Strategy::kBasic, 0, {{"main", basic_body()}});
}

PromptTemplate rule_preference_template() {
  return make("rule_augmented", Strategy::kRuleAugmented, 0,
              {{"main", rule_preamble() + "\n\n" + basic_body()}});
}

PromptTemplate cot_preference_template() {
  return make("cot", Strategy::kCot, 0,
              {{"rationale", cot_rationale_body()}, {"main", cot_preference_body(false)}});
}

PromptTemplate kshot_preference_template(int k) {
  return make("kshot_" + std::to_string(k), Strategy::kKShot, k,
              {{"main", kshot_body()}, {"exemplar", kExemplar}, {"examples_footer", kExamplesFooter}});
}

PromptTemplate rule_kshot_preference_template(int k) {
  return make("rule_kshot_" + std::to_string(k), Strategy::kRuleKShot, k,
              {{"main", rule_preamble() + "\n\n" + kshot_body()},
               {"exemplar", kExemplar},
               {"examples_footer", kExamplesFooter}});
}

PromptTemplate rule_cot_kshot_preference_template(int k) {
  return make("rule_cot_kshot_" + std::to_string(k), Strategy::kRuleCotKShot, k,
              {{"rationale", rule_preamble() + "\n\n" + cot_rationale_body()},
               {"main", rule_preamble() + "\n\n" + cot_preference_body(true)},
               {"exemplar", kCotExemplar},
               {"examples_footer", kExamplesFooter}});
}

PromptTemplate judge_template() {
  const std::string system =
      "You are a translation expert in {source_language}, {target_language}, code-mixing of "
      "{source_language} and {target_language}. I need your help in impartially judging the "
      "quality of two translations.";
  const std::string user =
      std::string(kAxesHeader) + "\n" + kAxisAccuracy + "\n" + kAxisNaturalness + "\n" + kAxisSyntax +
      "\n" + kAxisCodeSwitching +
      "\n\n"
      "Next, I will provide you with the original text under the <Original> tag, first "
      "translation under the <Translation_1>, and second translation under the <Translation_2>. \n"
      "Please let me know which one is better according to these criteria. Please give your "
      "judgment directly (output \"Translation_1\" or \"Translation_2\" only) and do not output "
      "additional explanations.\n"
      "<Original>\n{original_sent}\n</Original>\n\n"
      "<Translation_1>\n{first_translation}\n</Translation_1>\n\n"
      "<Translation_2>\n{second_translation}\n</Translation_2>";
  return make("judge", Strategy::kBasic, 0, {{"system", system}, {"main", user}});
}

std::map<std::string, PromptTemplate> default_templates() {
  std::map<std::string, PromptTemplate> out;
  for (auto t : {sft_template(), basic_preference_template(), rule_preference_template(),
                 cot_preference_template(), kshot_preference_template(1),
                 rule_kshot_preference_template(1), rule_cot_kshot_preference_template(1),
                 judge_template()}) {
    out.emplace(t.name, std::move(t));
  }
  return out;
}

PromptTemplate preference_template(Strategy strategy, int k) {
  switch (strategy) {
    case Strategy::kBasic: return basic_preference_template();
    case Strategy::kRuleAugmented: return rule_preference_template();
    case Strategy::kCot: return cot_preference_template();
    case Strategy::kKShot: return kshot_preference_template(k);
    case Strategy::kRuleKShot: return rule_kshot_preference_template(k);
    case Strategy::kRuleCotKShot: return rule_cot_kshot_preference_template(k);
  }
  return basic_preference_template();
}

// ---------------------------------------------------------------------------
// Rendering

std::string language_display_name(const std::string& tag) {
  const std::string t = text::lowercase(tag);
  if (t == "en" || t == "english") return "English";
  if (t == "hi" || t == "hindi") return "Hindi";
  if (t == "hinglish" || t == "hi-en" || t == "en-hi") return "Hinglish";
  std::string out = tag;
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::vector<corpus::SftExample> expand_sft(const corpus::ParallelCorpus& corpus,
                                           const PromptTemplate& tmpl) {
  if (tmpl.strategy != Strategy::kBasic) throw TemplateError("SFT template must use strategy basic");
  const TemplateText& main = tmpl.section("main");
  for (const char* p : {"Source", "Target", "x"}) {
    if (!main.has_placeholder(p)) {
      throw TemplateError(std::string("SFT template is missing placeholder {") + p + "}");
    }
  }
  std::vector<corpus::SftExample> out;
  out.reserve(corpus.pair_count());
  for (const auto& row : corpus.rows) {
    const std::string prompt = main.render({{"Source", language_display_name(row.source_lang)},
                                            {"Target", language_display_name(row.target_lang)},
                                            {"x", row.source_text}});
    for (const auto& t : row.translations) out.push_back({prompt, t, row.row_id});
  }
  return out;
}

std::vector<Exemplar> load_exemplars(const std::string& path) {
  std::vector<Exemplar> out;
  jsonl::for_each(path, [&](std::size_t line_no, const jsonl::json& j) {
    try {
      Exemplar e;
      e.source = j.at("source").get<std::string>();
      e.first = j.at("first").get<std::string>();
      e.second = j.at("second").get<std::string>();
      e.label = j.at("label").get<int>();
      e.rationale = j.value("rationale", "");
      if (e.label != 0 && e.label != 1) throw Error("label must be 0 or 1");
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw Error(path + ":" + std::to_string(line_no) + ": malformed exemplar: " + ex.what());
    }
  });
  return out;
}

std::string PreferencePrompt::preference_text(std::optional<std::string_view> rationale) const {
  Bindings b;
  if (rationale) b.emplace("rationale", std::string(*rationale));
  return preference.render(b);
}

PreferencePrompt render_preference_prompt(const corpus::PreferencePair& pair,
                                          const PromptTemplate& tmpl,
                                          const std::vector<Exemplar>& shots) {
  check_preference_input(pair.source_text, "source");
  check_preference_input(pair.candidate_a, "candidate_a");
  check_preference_input(pair.candidate_b, "candidate_b");

  Bindings query{{"original_sent", pair.source_text},
                 {"first_translation", pair.candidate_a},
                 {"second_translation", pair.candidate_b}};

  if (is_kshot(tmpl.strategy)) {
    if (static_cast<int>(shots.size()) != tmpl.k) {
      throw TemplateError("template '" + tmpl.name + "' expects " + std::to_string(tmpl.k) +
                          " shots, got " + std::to_string(shots.size()));
    }
    std::string examples;
    for (const auto& shot : shots) {
      check_preference_input(shot.source, "exemplar source");
      check_preference_input(shot.first, "exemplar first");
      check_preference_input(shot.second, "exemplar second");
      Bindings b{{"original_sent", shot.source},
                 {"first_translation", shot.first},
                 {"second_translation", shot.second},
                 {"label", std::to_string(shot.label)}};
      if (!shot.rationale.empty()) b.emplace("rationale", shot.rationale);
      examples += tmpl.section("exemplar").render(b);
    }
    if (!shots.empty()) examples += tmpl.section("examples_footer").render({});
    query.emplace("examples", std::move(examples));
  } else if (!shots.empty()) {
    throw TemplateError("template '" + tmpl.name + "' takes no shots");
  }

  PreferencePrompt out;
  if (is_cot(tmpl.strategy)) {
    out.rationale_prompt = tmpl.section("rationale").render(query);
    out.preference = tmpl.section("main").bind(query);
    const auto left = out.preference.placeholders();
    if (left != std::set<std::string>{"rationale"}) {
      throw TemplateError("chain-of-thought template must leave exactly {rationale} unbound");
    }
  } else {
    out.preference = tmpl.section("main").bind(query);
    if (!out.preference.placeholders().empty()) {
      throw TemplateError("unbound placeholder {" + *out.preference.placeholders().begin() + "}");
    }
  }
  return out;
}

JudgePrompt render_judge_prompt(std::string_view source, std::string_view translation_1,
                                std::string_view translation_2, const JudgeLanguages& languages,
                                const PromptTemplate& tmpl) {
  if (text::is_blank(source) || text::is_blank(translation_1) || text::is_blank(translation_2)) {
    throw TemplateError("judge prompt inputs must be non-empty");
  }
  check_judge_input(source, "source");
  check_judge_input(translation_1, "translation_1");
  check_judge_input(translation_2, "translation_2");
  const Bindings b{{"source_language", languages.source},
                   {"target_language", languages.target},
                   {"original_sent", std::string(source)},
                   {"first_translation", std::string(translation_1)},
                   {"second_translation", std::string(translation_2)}};
  return {tmpl.section("system").render(b), tmpl.section("main").render(b)};
}

}  // namespace chai::prompts
