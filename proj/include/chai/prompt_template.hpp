// Prompt templates for SFT rows, preference annotation and pairwise judging.
//
// A template is a set of named sections, each a sequence of literal text and
// {placeholder} segments. Which sections exist depends on the strategy:
//
//   basic, rule_augmented   main
//   cot                     rationale, main (main binds {rationale})
//   kshot, rule_kshot       main (binds {examples}), exemplar, examples_footer
//   rule_cot_kshot          rationale, main, exemplar, examples_footer
//   judge templates         system, main
//
// On-disk format: UTF-8 text with "@@ name <v>", "@@ strategy <v>",
// "@@ k <n>" header lines followed by "@@ section <name>" blocks.

#ifndef CHAI_PROMPT_TEMPLATE_HPP_
#define CHAI_PROMPT_TEMPLATE_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "chai/corpus.hpp"
#include "chai/text.hpp"

namespace chai::prompts {

enum class Strategy { kBasic, kRuleAugmented, kCot, kKShot, kRuleKShot, kRuleCotKShot };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

/// Raised when a template cannot be rendered: unbound placeholder, missing
/// section, shot-count mismatch or an input that carries template markers.
class TemplateError : public Error {
 public:
  using Error::Error;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

class TemplateText {
 public:
  struct Segment {
    bool placeholder = false;
    std::string text;  // literal text or placeholder name
    bool operator==(const Segment&) const = default;
  };

  TemplateText() = default;
  static TemplateText parse(std::string_view source);

  /// Substitutes the bound placeholders, keeping unbound ones.
  TemplateText bind(const Bindings& values) const;

  /// Substitutes every placeholder; throws TemplateError if any is unbound.
  std::string render(const Bindings& values) const;

  std::set<std::string> placeholders() const;
  bool has_placeholder(std::string_view name) const;

  /// Inverse of parse().
  std::string source() const;

  const std::vector<Segment>& segments() const { return segments_; }
  bool operator==(const TemplateText&) const = default;

 private:
  std::vector<Segment> segments_;
};

struct PromptTemplate {
  std::string name;
  Strategy strategy = Strategy::kBasic;
  int k = 0;
  std::map<std::string, TemplateText> sections;

  const TemplateText& section(const std::string& name) const;
  bool has_section(const std::string& name) const { return sections.count(name) > 0; }

  bool operator==(const PromptTemplate&) const = default;
};

PromptTemplate parse_template(std::string_view file_contents);
std::string serialize_template(const PromptTemplate& t);
PromptTemplate load_template(const std::string& path);

// Shipped defaults.
PromptTemplate sft_template();                    // parallel-corpus instruction
PromptTemplate basic_preference_template();       // zero-shot basic
PromptTemplate rule_preference_template();        // zero-shot with the four-axis rules
PromptTemplate cot_preference_template();         // two-prompt chain of thought
PromptTemplate kshot_preference_template(int k);  // basic k-shot
PromptTemplate rule_kshot_preference_template(int k);
PromptTemplate rule_cot_kshot_preference_template(int k);
PromptTemplate judge_template();

/// Every shipped default, keyed by file stem.
std::map<std::string, PromptTemplate> default_templates();

/// Preference template for a strategy name and shot count.
PromptTemplate preference_template(Strategy strategy, int k);

/// Four-axis rule text shown to annotators and embedded in rule prompts.
const std::string& rules_text();

// ---------------------------------------------------------------------------
// Rendering

std::string language_display_name(const std::string& tag);

/// One SFT example per (row, translation). The template must be basic and
/// bind {Source}, {Target} and {x}.
std::vector<corpus::SftExample> expand_sft(const corpus::ParallelCorpus& corpus,
                                           const PromptTemplate& tmpl);

/// A labeled demonstration for k-shot prompts. `label` is 0 or 1 and refers to
/// first/second as displayed.
struct Exemplar {
  std::string source;
  std::string first;
  std::string second;
  int label = 0;
  std::string rationale;
};

std::vector<Exemplar> load_exemplars(const std::string& path);

/// A rendered preference prompt. For chain-of-thought strategies the first
/// request is `rationale_prompt`; its answer is then bound into the second
/// prompt by preference_text().
struct PreferencePrompt {
  std::optional<std::string> rationale_prompt;
  TemplateText preference;

  bool is_cot() const { return rationale_prompt.has_value(); }

  /// Final preference prompt text. Cot prompts require a rationale.
  std::string preference_text(std::optional<std::string_view> rationale = std::nullopt) const;
};

PreferencePrompt render_preference_prompt(const corpus::PreferencePair& pair,
                                          const PromptTemplate& tmpl,
                                          const std::vector<Exemplar>& shots = {});

struct JudgePrompt {
  std::string system_text;
  std::string user_text;
};

struct JudgeLanguages {
  std::string source = "English";
  std::string target = "Hindi";
};

/// Renders the pairwise judge prompt. Inputs must be non-empty and must not
/// contain the <Original>/<Translation_N> tags.
JudgePrompt render_judge_prompt(std::string_view source, std::string_view translation_1,
                                std::string_view translation_2,
                                const JudgeLanguages& languages = {},
                                const PromptTemplate& tmpl = judge_template());

}  // namespace chai::prompts

#endif  // CHAI_PROMPT_TEMPLATE_HPP_
