#include "chai/features.hpp"

#include <algorithm>

#include "chai/text.hpp"

namespace chai::features {

SparseVector SparseVector::from_unsorted(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });
  SparseVector out;
  for (const auto& e : entries) {
    if (!out.entries_.empty() && out.entries_.back().index == e.index) {
      out.entries_.back().value += e.value;
    } else {
      out.entries_.push_back(e);
    }
  }
  std::erase_if(out.entries_, [](const Entry& e) { return e.value == 0.0; });
  return out;
}

double SparseVector::dot(std::span<const double> dense) const {
  double s = 0.0;
  for (const auto& e : entries_) s += dense[e.index] * e.value;
  return s;
}

void SparseVector::axpy(double scale, std::span<double> dense) const {
  for (const auto& e : entries_) dense[e.index] += scale * e.value;
}

SparseVector SparseVector::minus(const SparseVector& other) const {
  std::vector<Entry> merged;
  merged.reserve(entries_.size() + other.entries_.size());
  merged.insert(merged.end(), entries_.begin(), entries_.end());
  for (const auto& e : other.entries_) merged.push_back({e.index, -e.value});
  return from_unsorted(std::move(merged));
}

SparseVector SparseVector::scaled(double s) const {
  SparseVector out = *this;
  for (auto& e : out.entries_) e.value *= s;
  if (s == 0.0) out.entries_.clear();
  return out;
}

double SparseVector::value_at(std::uint32_t index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, std::uint32_t i) { return e.index < i; });
  return it != entries_.end() && it->index == index ? it->value : 0.0;
}

void FeatureExtractor::validate() const {
  if (hash_dim < 2) throw ConfigError("hash_dim must be >= 2");
  for (int o : char_ngram_orders) {
    if (o < 1) throw ConfigError("char n-gram orders must be >= 1");
  }
  for (int o : word_ngram_orders) {
    if (o < 1) throw ConfigError("word n-gram orders must be >= 1");
  }
}

std::uint32_t bucket(std::string_view key, std::uint32_t hash_dim) {
  return static_cast<std::uint32_t>(text::fnv1a64(key) % hash_dim);
}

SparseVector FeatureExtractor::featurize(const std::string& source,
                                         const std::string& candidate) const {
  const std::string cand = lowercase ? text::lowercase(candidate) : candidate;
  const std::vector<std::string> words = text::split_whitespace(cand);
  std::vector<Entry> entries;

  if (!char_ngram_orders.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) joined += ' ';
      joined += words[i];
    }
    const auto cps = text::code_points(joined);
    for (int n : char_ngram_orders) {
      const auto order = static_cast<std::size_t>(n);
      for (std::size_t i = 0; i + order <= cps.size(); ++i) {
        std::string key = "c" + std::to_string(n) + '\x1f';
        for (std::size_t k = 0; k < order; ++k) key += cps[i + k];
        entries.push_back({bucket(key, hash_dim), 1.0});
      }
    }
  }
  for (int n : word_ngram_orders) {
    const auto order = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + order <= words.size(); ++i) {
      std::string key = "w" + std::to_string(n);
      for (std::size_t k = 0; k < order; ++k) key += '\x1f' + words[i + k];
      entries.push_back({bucket(key, hash_dim), 1.0});
    }
  }
  if (source_candidate_crossing) {
    const std::string src = lowercase ? text::lowercase(source) : source;
    for (const auto& sw : text::split_whitespace(src)) {
      for (const auto& cw : words) {
        entries.push_back({bucket("x\x1f" + sw + '\x1f' + cw, hash_dim), 1.0});
      }
    }
  }
  return SparseVector::from_unsorted(std::move(entries));
}

json to_json(const FeatureExtractor& f) {
  return json{{"char_ngram_orders", f.char_ngram_orders},
              {"word_ngram_orders", f.word_ngram_orders},
              {"hash_dim", f.hash_dim},
              {"lowercase", f.lowercase},
              {"source_candidate_crossing", f.source_candidate_crossing}};
}

FeatureExtractor feature_extractor_from_json(const json& j) {
  FeatureExtractor f;
  f.char_ngram_orders = j.value("char_ngram_orders", f.char_ngram_orders);
  f.word_ngram_orders = j.value("word_ngram_orders", f.word_ngram_orders);
  f.hash_dim = j.value("hash_dim", f.hash_dim);
  f.lowercase = j.value("lowercase", f.lowercase);
  f.source_candidate_crossing = j.value("source_candidate_crossing", f.source_candidate_crossing);
  f.validate();
  return f;
}

}  // namespace chai::features
