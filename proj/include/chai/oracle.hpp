// Offline stand-in for an LLM annotator: a Bradley-Terry chooser over a known
// score function, mixed with a fixed positional preference.

#ifndef CHAI_ORACLE_HPP_
#define CHAI_ORACLE_HPP_

#include <cstdint>
#include <functional>
#include <string>

#include "chai/annotator.hpp"

namespace chai::annotator {

using ScoreFn = std::function<double(const std::string& source, const std::string& candidate)>;

struct OracleAnnotator {
  ScoreFn true_score;
  double decisiveness = 1.0;    // beta_o
  double positional_bias = 0.0; // p_pos in [0, 1]
  int preferred_position = 0;   // display position favoured by the bias
  std::uint64_t seed = 0;
  std::string id = "oracle";

  /// Probability that the first displayed candidate is chosen:
  /// p_pos * [preferred_position == 0] + (1 - p_pos) * sigmoid(beta_o * (s_first - s_second)).
  double prob_first(const std::string& source, const std::string& first,
                    const std::string& second) const;

  /// One draw. `stream` distinguishes independent draws for the same display.
  Choice draw(const std::string& source, const std::string& first, const std::string& second,
              std::uint64_t stream) const;
};

/// Samples one choice per temperature (independent draws). Deterministic for
/// a fixed seed; the stream depends only on the pair id and display order.
Verdict oracle_annotate(const corpus::PreferencePair& pair, const OracleAnnotator& oracle,
                        std::size_t draws = 3);

double sigmoid(double x);

}  // namespace chai::annotator

#endif  // CHAI_ORACLE_HPP_
