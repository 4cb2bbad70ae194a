// chrF and chrF++: character (and optionally word) n-gram F-scores.
//
// Per order n the hypothesis and reference n-gram multisets give
// match = sum_g min(count_hyp(g), count_ref(g)), precision = match / |hyp| and
// recall = match / |ref|. Precision and recall are averaged over the orders
// that occur in both strings (an order longer than either string carries no
// information), then F_beta = (1 + b^2) P R / (b^2 P + R), scaled to 0..100.
// This matches sacrebleu's CHRF.

#ifndef CHAI_CHRF_HPP_
#define CHAI_CHRF_HPP_

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

namespace chai::metrics {

using json = nlohmann::json;

struct ChrfConfig {
  int max_char_order = 6;
  int max_word_order = 0;  // 2 for chrF++
  double beta = 2.0;
  bool strip_whitespace_for_char_ngrams = true;
  bool lowercase = false;

  static ChrfConfig chrf_pp() {
    ChrfConfig c;
    c.max_word_order = 2;
    return c;
  }

  /// Throws ConfigError.
  void validate() const;
};

json to_json(const ChrfConfig& c);
ChrfConfig chrf_config_from_json(const json& j);

struct NgramStat {
  double hyp = 0;    // n-grams in the hypothesis
  double ref = 0;    // n-grams in the reference
  double match = 0;  // clipped matches
};

/// Character orders 1..max_char_order followed by word orders.
struct ChrfStats {
  std::vector<NgramStat> orders;

  ChrfStats& operator+=(const ChrfStats& other);
};

ChrfStats chrf_stats(const std::string& hypothesis, const std::string& reference,
                     const ChrfConfig& config);

/// 0..100 from (possibly pooled) statistics.
double chrf_score(const ChrfStats& stats, double beta);

double chrf(const std::string& hypothesis, const std::string& reference,
            const ChrfConfig& config = {});

/// chrF with word unigrams and bigrams (max_word_order forced to 2 when the
/// config leaves it at 0). Words are whitespace-separated tokens.
double chrf_pp(const std::string& hypothesis, const std::string& reference,
               ChrfConfig config = ChrfConfig::chrf_pp());

struct ChrfItem {
  std::string hypothesis;
  std::vector<std::string> references;
};

struct CorpusChrf {
  double corpus_score = 0.0;            // from pooled statistics
  double mean_sentence_score = 0.0;
  std::vector<double> sentence_scores;  // best reference per item
  std::vector<std::size_t> best_reference;
};

/// Sentence score is the max over references; the corpus score pools the
/// statistics of each item's best reference. Throws chai::Error on an empty
/// list or an item without references.
CorpusChrf corpus_chrf(std::span<const ChrfItem> items, const ChrfConfig& config = {});

}  // namespace chai::metrics

#endif  // CHAI_CHRF_HPP_
