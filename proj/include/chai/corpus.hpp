// Parallel corpus ingestion and expansion into SFT rows and preference pairs.

#ifndef CHAI_CORPUS_HPP_
#define CHAI_CORPUS_HPP_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace chai::corpus {

using json = nlohmann::json;

/// One source sentence and its reference code-mixed translations.
struct ParallelRow {
  std::string row_id;
  std::string source_text;
  std::vector<std::string> translations;
  std::string source_lang = "english";
  std::string target_lang = "hinglish";
  std::string origin;

  bool operator==(const ParallelRow&) const = default;
};

struct LoadReport {
  std::size_t records_read = 0;
  std::size_t rows_loaded = 0;
  std::size_t dropped_empty_source = 0;
  std::size_t dropped_no_translations = 0;
  std::size_t duplicate_translations_removed = 0;
};

struct ParallelCorpus {
  std::vector<ParallelRow> rows;
  LoadReport report;

  /// Number of (source, translation) pairs.
  std::size_t pair_count() const;
};

enum class CorpusFormat { kJsonl, kTsv };

CorpusFormat parse_corpus_format(const std::string& name);

/// Loads a corpus. Text is NFC-normalized and trimmed; duplicate translations
/// within a row are removed; rows left with an empty source or no
/// translations are dropped and counted in the report.
/// Throws chai::Error on unreadable files, malformed records (with line
/// number) and duplicate row ids.
ParallelCorpus load_corpus(const std::string& path, CorpusFormat format);

/// Normalizes and validates an in-memory row list the same way load_corpus
/// does.
ParallelCorpus make_corpus(std::vector<ParallelRow> rows);

void save_corpus_jsonl(const std::string& path, const ParallelCorpus& corpus);

json to_json(const ParallelRow& row);
json to_json(const LoadReport& report);

// ---------------------------------------------------------------------------
// SFT rows

struct SftExample {
  std::string prompt_text;
  std::string target_text;
  std::string row_id;
};

json to_json(const SftExample& ex);

// ---------------------------------------------------------------------------
// Preference pairs

struct PreferencePair {
  std::string pair_id;
  std::string row_id;
  std::string source_text;
  std::string candidate_a;  // displayed first
  std::string candidate_b;  // displayed second
  bool swap_applied = false;
  std::uint64_t rng_seed = 0;

  /// The pair in corpus order: (first, second).
  std::pair<std::string, std::string> canonical() const;

  /// Same pair with the display order flipped.
  PreferencePair swapped() const;

  bool operator==(const PreferencePair&) const = default;
};

json to_json(const PreferencePair& pair);
PreferencePair pair_from_json(const json& j);

std::vector<PreferencePair> load_pairs(const std::string& path);
void save_pairs(const std::string& path, const std::vector<PreferencePair>& pairs);

struct PairingMode {
  enum class Kind { kAllPairs, kSampled };
  Kind kind = Kind::kAllPairs;
  std::size_t n = 0;

  static PairingMode all_pairs() { return {}; }
  static PairingMode sampled(std::size_t n) { return {Kind::kSampled, n}; }
};

struct PairingResult {
  std::vector<PreferencePair> pairs;
  std::size_t skipped_rows = 0;  // rows with fewer than two translations
};

/// Emits unordered translation pairs per row. Each pair's display order is
/// flipped with probability 1/2 from a stream derived from (seed, pair_id).
PairingResult make_preference_pairs(const ParallelCorpus& corpus, PairingMode mode,
                                    std::uint64_t seed);

}  // namespace chai::corpus

#endif  // CHAI_CORPUS_HPP_
