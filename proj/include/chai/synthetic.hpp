// Synthetic English -> Hinglish world with a known linear quality scorer,
// used by offline runs and tests. Each concept has an English form and two
// romanized-Hindi forms; a candidate translation picks one form per concept
// of the source sentence, and its true score is the sum of the chosen forms'
// weights.

#ifndef CHAI_SYNTHETIC_HPP_
#define CHAI_SYNTHETIC_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chai/corpus.hpp"
#include "chai/reward.hpp"
#include "chai/rng.hpp"

namespace chai::synthetic {

struct Concept {
  std::string english;
  std::string hindi;
  std::string hindi_alt;
};

/// Built-in concept list (about 60 entries).
const std::vector<Concept>& default_concepts();

struct World {
  std::vector<Concept> concepts;
  std::map<std::string, double> weights;  // surface form -> weight

  double score(const std::string& candidate) const;
};

/// Draws a weight ~ N(0, weight_sd) for every surface form.
World make_world(std::uint64_t seed, double weight_sd = 1.0,
                 const std::vector<Concept>& concepts = default_concepts());

struct SentenceOptions {
  std::size_t min_words = 5;
  std::size_t max_words = 9;
};

struct Sample {
  std::string source;
  std::vector<std::size_t> concept_ids;
};

Sample sample_source(const World& world, Rng& rng, const SentenceOptions& opts = {});

/// One candidate: each concept rendered with a uniformly chosen form.
std::string sample_candidate(const World& world, const Sample& s, Rng& rng);

/// rows x candidates_per_row distinct candidates (rows whose source cannot
/// yield enough distinct candidates are redrawn).
corpus::ParallelCorpus make_corpus(const World& world, std::size_t rows, std::size_t candidates_per_row,
                                   std::uint64_t seed, const SentenceOptions& opts = {});

/// Pairs labeled by the true score; each label flipped with probability
/// noise. Ties in true score are redrawn.
reward::PreferenceDataset make_preferences(const World& world, std::size_t n, double noise,
                                           std::uint64_t seed, const SentenceOptions& opts = {});

/// Word lists for the code-switching check: {"english": ..., "hindi": ...}.
std::map<std::string, std::vector<std::string>> lexicon_words(const World& world);

}  // namespace chai::synthetic

#endif  // CHAI_SYNTHETIC_HPP_
