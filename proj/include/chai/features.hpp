// Hashed n-gram features shared by the reward model and the ranking policy.

#ifndef CHAI_FEATURES_HPP_
#define CHAI_FEATURES_HPP_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace chai::features {

using json = nlohmann::json;

struct Entry {
  std::uint32_t index = 0;
  double value = 0.0;
  bool operator==(const Entry&) const = default;
};

/// Sparse vector with strictly increasing indices and no explicit zeros.
class SparseVector {
 public:
  SparseVector() = default;

  /// Sorts, merges duplicate indices and drops zeros.
  static SparseVector from_unsorted(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  double dot(std::span<const double> dense) const;

  /// dense += scale * this
  void axpy(double scale, std::span<double> dense) const;

  /// this - other
  SparseVector minus(const SparseVector& other) const;

  SparseVector scaled(double s) const;

  double value_at(std::uint32_t index) const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<Entry> entries_;
};

struct FeatureExtractor {
  std::set<int> char_ngram_orders{1, 2, 3};
  std::set<int> word_ngram_orders{1};
  std::uint32_t hash_dim = 1u << 16;
  bool lowercase = true;
  bool source_candidate_crossing = false;

  /// Throws ConfigError unless hash_dim >= 2 and every order >= 1.
  void validate() const;

  /// Hashed n-gram counts of the candidate, plus hashed (source word,
  /// candidate word) co-occurrences when crossing is enabled. Character
  /// n-grams run over the candidate with whitespace runs collapsed to one
  /// space.
  SparseVector featurize(const std::string& source, const std::string& candidate) const;

  bool operator==(const FeatureExtractor&) const = default;
};

/// Hashed bucket for a namespaced n-gram key.
std::uint32_t bucket(std::string_view key, std::uint32_t hash_dim);

json to_json(const FeatureExtractor& f);
FeatureExtractor feature_extractor_from_json(const json& j);

}  // namespace chai::features

#endif  // CHAI_FEATURES_HPP_
