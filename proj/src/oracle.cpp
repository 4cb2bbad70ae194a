#include "chai/oracle.hpp"

#include <cmath>

#include "chai/rng.hpp"

namespace chai::annotator {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double OracleAnnotator::prob_first(const std::string& source, const std::string& first,
                                   const std::string& second) const {
  const double diff = true_score(source, first) - true_score(source, second);
  const double by_score = sigmoid(decisiveness * diff);
  const double by_position = preferred_position == 0 ? 1.0 : 0.0;
  return positional_bias * by_position + (1.0 - positional_bias) * by_score;
}

Choice OracleAnnotator::draw(const std::string& source, const std::string& first,
                             const std::string& second, std::uint64_t stream) const {
  const std::string key = source + '\x1f' + first + '\x1f' + second + '\x1f' + std::to_string(stream);
  Rng rng(derive_seed(seed, key));
  return rng.bernoulli(prob_first(source, first, second)) ? Choice::kFirst : Choice::kSecond;
}

Verdict oracle_annotate(const corpus::PreferencePair& pair, const OracleAnnotator& oracle,
                        std::size_t draws) {
  Verdict v;
  v.pair_id = pair.pair_id;
  v.annotator_id = oracle.id;
  v.model_name = oracle.id;
  v.template_name = "oracle";
  const double p = oracle.prob_first(pair.source_text, pair.candidate_a, pair.candidate_b);
  for (std::size_t i = 0; i < draws; ++i) {
    Rng rng(derive_seed(oracle.seed, pair.pair_id + '\x1f' + pair.candidate_a + '\x1f' +
                                         pair.candidate_b + '\x1f' + std::to_string(i)));
    v.choices.push_back(rng.bernoulli(p) ? Choice::kFirst : Choice::kSecond);
  }
  resolve(v, pair.swap_applied);
  return v;
}

}  // namespace chai::annotator
