#include "chai/code_switching.hpp"

#include <sstream>

#include "chai/text.hpp"

namespace chai::metrics {
namespace {

std::string normalize_word(const std::string& w) {
  return text::lowercase(text::strip_punctuation(text::nfc(text::trim(w))));
}

}  // namespace

std::string to_string(WordTag t) {
  switch (t) {
    case WordTag::kEnglish: return "english";
    case WordTag::kHindi: return "hindi";
    case WordTag::kEither: return "either";
    case WordTag::kThirdLanguage: return "third_language";
    case WordTag::kUnknown: break;
  }
  return "unknown";
}

void LanguageLexicon::add(const std::string& language, const std::string& word) {
  const std::string w = text::lowercase(text::nfc(text::trim(word)));
  if (language.empty()) throw Error("lexicon language tag must be non-empty");
  auto& set = words_[language];
  if (!w.empty()) set.insert(w);
}

void LanguageLexicon::load_file(const std::string& language, const std::string& path) {
  std::istringstream in(text::read_file(path));
  words_[language];
  for (std::string line; std::getline(in, line);) {
    const std::string w = text::trim(line);
    if (w.empty() || w[0] == '#') continue;
    add(language, w);
  }
}

std::map<std::string, std::set<std::string>> LanguageLexicon::overlaps() const {
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& [lang, ws] : words_) {
    for (const auto& w : ws) seen[w].insert(lang);
  }
  std::erase_if(seen, [](const auto& kv) { return kv.second.size() < 2; });
  return seen;
}

std::set<std::string> LanguageLexicon::languages_of(const std::string& word) const {
  std::set<std::string> out;
  for (const auto& [lang, ws] : words_) {
    if (ws.count(word)) out.insert(lang);
  }
  return out;
}

LanguageLexicon load_lexicons(const std::map<std::string, std::string>& paths) {
  LanguageLexicon lex;
  for (const auto& [lang, path] : paths) lex.load_file(lang, path);
  return lex;
}

WordTag tag_word(const std::string& word, const LanguageLexicon& lexicon) {
  const auto langs = lexicon.languages_of(word);
  const bool en = langs.count(LanguageLexicon::kEnglish) > 0;
  const bool hi = langs.count(LanguageLexicon::kHindi) > 0;
  const std::size_t others = langs.size() - (en ? 1 : 0) - (hi ? 1 : 0);
  if (langs.empty()) return WordTag::kUnknown;
  if (!en && !hi) return WordTag::kThirdLanguage;
  if (en && !hi && others == 0) return WordTag::kEnglish;
  if (hi && !en && others == 0) return WordTag::kHindi;
  return WordTag::kEither;
}

CsResult cs_correctness(const std::string& sentence, const LanguageLexicon& lexicon) {
  if (text::is_blank(sentence)) throw Error("cs_correctness: empty sentence");
  if (!lexicon.has(LanguageLexicon::kEnglish) || !lexicon.has(LanguageLexicon::kHindi)) {
    throw Error("cs_correctness: lexicon needs both english and hindi word lists");
  }
  CsResult r;
  bool any_en = false;
  bool any_hi = false;
  bool any_third = false;
  for (const auto& tok : text::split_whitespace(sentence)) {
    TaggedWord w;
    w.token = tok;
    w.normalized = normalize_word(tok);
    if (w.normalized.empty()) continue;
    w.tag = tag_word(w.normalized, lexicon);
    const auto langs = lexicon.languages_of(w.normalized);
    w.languages.assign(langs.begin(), langs.end());
    any_en |= w.tag == WordTag::kEnglish;
    any_hi |= w.tag == WordTag::kHindi;
    any_third |= w.tag == WordTag::kThirdLanguage;
    if (w.tag == WordTag::kUnknown) ++r.unknown_count;
    r.word_tags.push_back(std::move(w));
  }
  if (!(any_en && any_hi)) r.reasons.emplace_back("a");
  if (any_third) r.reasons.emplace_back("b");
  r.correct = r.reasons.empty();
  return r;
}

nlohmann::json to_json(const CsResult& r) {
  nlohmann::json tags = nlohmann::json::array();
  for (const auto& w : r.word_tags) {
    tags.push_back({{"token", w.token}, {"normalized", w.normalized}, {"tag", to_string(w.tag)},
                    {"languages", w.languages}});
  }
  return {{"correct", r.correct}, {"reasons", r.reasons}, {"unknown_count", r.unknown_count},
          {"word_tags", tags}};
}

}  // namespace chai::metrics
