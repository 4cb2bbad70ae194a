// Lexicon-driven word-level language tagging and the mechanized
// code-switching correctness check: a sentence is correct when it mixes
// English and Hindi and contains no word from any other language.

#ifndef CHAI_CODE_SWITCHING_HPP_
#define CHAI_CODE_SWITCHING_HPP_

#include <nlohmann/json.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace chai::metrics {

enum class WordTag { kEnglish, kHindi, kEither, kThirdLanguage, kUnknown };

std::string to_string(WordTag t);

/// language tag -> word forms. "english" and "hindi" are the target
/// languages; any other tag is a third language.
class LanguageLexicon {
 public:
  static constexpr const char* kEnglish = "english";
  static constexpr const char* kHindi = "hindi";

  /// Words are NFC-normalized and lowercased on insertion.
  void add(const std::string& language, const std::string& word);
  /// One word per line; blank lines and lines starting with '#' skipped.
  void load_file(const std::string& language, const std::string& path);

  /// Words present under more than one language.
  std::map<std::string, std::set<std::string>> overlaps() const;

  /// Languages containing the (already normalized) word.
  std::set<std::string> languages_of(const std::string& word) const;

  bool has(const std::string& language) const { return words_.count(language) > 0; }
  const std::map<std::string, std::set<std::string>>& words() const { return words_; }

 private:
  std::map<std::string, std::set<std::string>> words_;
};

/// Loads {language: path} pairs.
LanguageLexicon load_lexicons(const std::map<std::string, std::string>& paths);

/// english/hindi alone -> that tag; both, or one of them plus a third
/// language -> either; only third languages -> third_language; none -> unknown.
WordTag tag_word(const std::string& normalized_word, const LanguageLexicon& lexicon);

struct TaggedWord {
  std::string token;       // as written
  std::string normalized;  // lowercased, punctuation stripped
  WordTag tag = WordTag::kUnknown;
  std::vector<std::string> languages;
};

struct CsResult {
  bool correct = false;
  std::vector<TaggedWord> word_tags;
  /// "a": not a mix of English-only and Hindi-only words;
  /// "b": contains third-language words.
  std::vector<std::string> reasons;
  std::size_t unknown_count = 0;
};

/// Throws chai::Error on a blank sentence or a lexicon missing english or
/// hindi. Tokens that are pure punctuation are ignored.
CsResult cs_correctness(const std::string& sentence, const LanguageLexicon& lexicon);

nlohmann::json to_json(const CsResult& r);

}  // namespace chai::metrics

#endif  // CHAI_CODE_SWITCHING_HPP_
