#include "chai/chrf.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "chai/text.hpp"

namespace chai::metrics {
namespace {

using Counts = std::unordered_map<std::string, int>;

// All n-grams of each order 1..max over a token sequence; tokens are joined
// with a separator that cannot occur inside a token.
std::vector<Counts> ngram_counts(const std::vector<std::string>& tokens, int max_order) {
  std::vector<Counts> out(static_cast<std::size_t>(max_order));
  for (int n = 1; n <= max_order; ++n) {
    const auto order = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (std::size_t k = 1; k < order; ++k) {
        key += '\x1f';
        key += tokens[i + k];
      }
      ++out[order - 1][key];
    }
  }
  return out;
}

NgramStat compare(const Counts& hyp, const Counts& ref) {
  NgramStat s;
  for (const auto& [g, c] : hyp) {
    s.hyp += c;
    auto it = ref.find(g);
    if (it != ref.end()) s.match += std::min(c, it->second);
  }
  for (const auto& [g, c] : ref) s.ref += c;
  return s;
}

struct Prepared {
  std::vector<Counts> chars;
  std::vector<Counts> words;
};

Prepared prepare(const std::string& raw, const ChrfConfig& config) {
  const std::string s = config.lowercase ? text::lowercase(raw) : raw;
  Prepared p;
  const std::string chars = config.strip_whitespace_for_char_ngrams ? text::remove_whitespace(s) : s;
  p.chars = ngram_counts(text::code_points(chars), config.max_char_order);
  if (config.max_word_order > 0) p.words = ngram_counts(text::split_whitespace(s), config.max_word_order);
  return p;
}

ChrfStats stats_of(const Prepared& hyp, const Prepared& ref) {
  ChrfStats out;
  for (std::size_t i = 0; i < hyp.chars.size(); ++i) out.orders.push_back(compare(hyp.chars[i], ref.chars[i]));
  for (std::size_t i = 0; i < hyp.words.size(); ++i) out.orders.push_back(compare(hyp.words[i], ref.words[i]));
  return out;
}

}  // namespace

void ChrfConfig::validate() const {
  if (max_char_order < 1) throw ConfigError("max_char_order must be >= 1");
  if (max_word_order < 0) throw ConfigError("max_word_order must be >= 0");
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
}

json to_json(const ChrfConfig& c) {
  return json{{"max_char_order", c.max_char_order},
              {"max_word_order", c.max_word_order},
              {"beta", c.beta},
              {"strip_whitespace_for_char_ngrams", c.strip_whitespace_for_char_ngrams},
              {"lowercase", c.lowercase}};
}

ChrfConfig chrf_config_from_json(const json& j) {
  ChrfConfig c;
  c.max_char_order = j.value("max_char_order", c.max_char_order);
  c.max_word_order = j.value("max_word_order", c.max_word_order);
  c.beta = j.value("beta", c.beta);
  c.strip_whitespace_for_char_ngrams =
      j.value("strip_whitespace_for_char_ngrams", c.strip_whitespace_for_char_ngrams);
  c.lowercase = j.value("lowercase", c.lowercase);
  c.validate();
  return c;
}

ChrfStats& ChrfStats::operator+=(const ChrfStats& other) {
  if (orders.empty()) orders.resize(other.orders.size());
  if (orders.size() != other.orders.size()) throw Error("chrF statistics of different shapes");
  for (std::size_t i = 0; i < orders.size(); ++i) {
    orders[i].hyp += other.orders[i].hyp;
    orders[i].ref += other.orders[i].ref;
    orders[i].match += other.orders[i].match;
  }
  return *this;
}

ChrfStats chrf_stats(const std::string& hypothesis, const std::string& reference,
                     const ChrfConfig& config) {
  config.validate();
  return stats_of(prepare(hypothesis, config), prepare(reference, config));
}

double chrf_score(const ChrfStats& stats, double beta) {
  double p = 0.0;
  double r = 0.0;
  int effective = 0;
  for (const auto& s : stats.orders) {
    if (s.hyp > 0 && s.ref > 0) {
      p += s.match / s.hyp;
      r += s.match / s.ref;
      ++effective;
    }
  }
  if (effective == 0) return 0.0;
  p /= effective;
  r /= effective;
  if (p + r == 0.0) return 0.0;
  const double b2 = beta * beta;
  return 100.0 * (1.0 + b2) * p * r / (b2 * p + r);
}

double chrf(const std::string& hypothesis, const std::string& reference, const ChrfConfig& config) {
  return chrf_score(chrf_stats(hypothesis, reference, config), config.beta);
}

double chrf_pp(const std::string& hypothesis, const std::string& reference, ChrfConfig config) {
  if (config.max_word_order == 0) config.max_word_order = 2;
  return chrf(hypothesis, reference, config);
}

CorpusChrf corpus_chrf(std::span<const ChrfItem> items, const ChrfConfig& config) {
  config.validate();
  if (items.empty()) throw Error("corpus_chrf: no items");
  CorpusChrf out;
  ChrfStats pooled;
  for (const auto& item : items) {
    if (item.references.empty()) throw Error("corpus_chrf: item without references");
    const Prepared hyp = prepare(item.hypothesis, config);
    double best = -1.0;
    std::size_t best_i = 0;
    ChrfStats best_stats;
    for (std::size_t i = 0; i < item.references.size(); ++i) {
      ChrfStats s = stats_of(hyp, prepare(item.references[i], config));
      const double score = chrf_score(s, config.beta);
      if (score > best) {
        best = score;
        best_i = i;
        best_stats = std::move(s);
      }
    }
    pooled += best_stats;
    out.sentence_scores.push_back(best);
    out.best_reference.push_back(best_i);
  }
  out.corpus_score = chrf_score(pooled, config.beta);
  out.mean_sentence_score = std::accumulate(out.sentence_scores.begin(), out.sentence_scores.end(), 0.0) /
                            static_cast<double>(out.sentence_scores.size());
  return out;
}

}  // namespace chai::metrics
