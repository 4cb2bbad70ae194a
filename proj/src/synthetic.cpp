#include "chai/synthetic.hpp"

#include <set>

#include "chai/rng.hpp"

namespace chai::synthetic {

const std::vector<Concept>& default_concepts() {
  static const std::vector<Concept> kConcepts{
      {"i", "main", "mai"},          {"you", "tum", "aap"},          {"we", "hum", "ham"},
      {"today", "aaj", "aj"},        {"tomorrow", "kal", "kall"},    {"happy", "khush", "prasann"},
      {"sad", "udaas", "dukhi"},     {"very", "bahut", "bohot"},     {"good", "accha", "achha"},
      {"bad", "bura", "kharab"},     {"food", "khana", "bhojan"},    {"water", "paani", "jal"},
      {"house", "ghar", "makaan"},   {"friend", "dost", "mitra"},    {"work", "kaam", "kam"},
      {"time", "samay", "waqt"},     {"city", "shahar", "nagar"},    {"market", "bazaar", "bajar"},
      {"movie", "film", "chalchitra"},  {"song", "gaana", "geet"},      {"book", "kitaab", "pustak"},
      {"school", "vidyalaya", "paathshaala"}, {"teacher", "adhyapak", "guruji"}, {"child", "baccha", "bachcha"},
      {"mother", "maa", "mata"},     {"father", "papa", "pita"},     {"brother", "bhai", "bhaiya"},
      {"sister", "behen", "didi"},   {"road", "sadak", "raasta"},    {"car", "gaadi", "gadi"},
      {"train", "rail", "railgaadi"}, {"morning", "subah", "savera"}, {"night", "raat", "ratri"},
      {"rain", "baarish", "barsaat"}, {"hot", "garam", "garmi"},      {"cold", "thanda", "thand"},
      {"new", "naya", "nayi"},       {"old", "purana", "puraani"},   {"big", "bada", "badi"},
      {"small", "chhota", "chota"},  {"fast", "tez", "jaldi"},       {"slow", "dheere", "dhire"},
      {"beautiful", "sundar", "khubsurat"}, {"love", "pyaar", "prem"}, {"money", "paisa", "dhan"},
      {"phone", "dooraabhaash", "fone"},   {"game", "khel", "khela"},      {"team", "toli", "dal"},
      {"win", "jeet", "jeetna"},     {"news", "khabar", "samachar"}, {"question", "sawaal", "prashn"},
      {"answer", "jawaab", "uttar"}, {"help", "madad", "sahayata"},  {"problem", "dikkat", "samasya"},
      {"village", "gaon", "gram"},   {"sky", "aasmaan", "aakash"},   {"heart", "dil", "hriday"},
      {"life", "zindagi", "jeevan"}, {"world", "duniya", "sansaar"}, {"story", "kahani", "katha"},
  };
  return kConcepts;
}

double World::score(const std::string& candidate) const {
  double s = 0.0;
  for (const auto& w : text::split_whitespace(candidate)) {
    auto it = weights.find(w);
    if (it != weights.end()) s += it->second;
  }
  return s;
}

World make_world(std::uint64_t seed, double weight_sd, const std::vector<Concept>& concepts) {
  if (concepts.empty()) throw ConfigError("synthetic world needs at least one concept");
  World w;
  w.concepts = concepts;
  Rng rng(derive_seed(seed, "synthetic-world"));
  for (const auto& c : w.concepts) {
    for (const auto* form : {&c.english, &c.hindi, &c.hindi_alt}) {
      if (w.weights.count(*form)) throw ConfigError("surface form '" + *form + "' used twice");
      w.weights[*form] = weight_sd * rng.normal();
    }
  }
  return w;
}

Sample sample_source(const World& world, Rng& rng, const SentenceOptions& opts) {
  if (opts.min_words < 1 || opts.max_words < opts.min_words) throw ConfigError("bad sentence length range");
  const std::size_t len = opts.min_words + rng.index(opts.max_words - opts.min_words + 1);
  Sample s;
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t c = rng.index(world.concepts.size());
    s.concept_ids.push_back(c);
    if (i) s.source += ' ';
    s.source += world.concepts[c].english;
  }
  return s;
}

std::string sample_candidate(const World& world, const Sample& s, Rng& rng) {
  std::string out;
  for (std::size_t i = 0; i < s.concept_ids.size(); ++i) {
    const Concept& c = world.concepts[s.concept_ids[i]];
    const std::size_t pick = rng.index(3);
    if (i) out += ' ';
    out += pick == 0 ? c.english : pick == 1 ? c.hindi : c.hindi_alt;
  }
  return out;
}

corpus::ParallelCorpus make_corpus(const World& world, std::size_t rows, std::size_t candidates_per_row,
                                   std::uint64_t seed, const SentenceOptions& opts) {
  if (candidates_per_row < 1) throw ConfigError("candidates_per_row must be >= 1");
  Rng rng(derive_seed(seed, "synthetic-corpus"));
  std::vector<corpus::ParallelRow> out;
  std::set<std::string> sources;
  while (out.size() < rows) {
    const Sample s = sample_source(world, rng, opts);
    if (sources.count(s.source)) continue;
    std::vector<std::string> cands;
    std::set<std::string> seen;
    for (int attempt = 0; attempt < 50 && cands.size() < candidates_per_row; ++attempt) {
      std::string c = sample_candidate(world, s, rng);
      if (seen.insert(c).second) cands.push_back(std::move(c));
    }
    if (cands.size() < candidates_per_row) continue;
    sources.insert(s.source);
    corpus::ParallelRow row;
    row.row_id = "syn-" + std::to_string(out.size() + 1);
    row.source_text = s.source;
    row.translations = std::move(cands);
    row.origin = "synthetic";
    out.push_back(std::move(row));
  }
  return corpus::make_corpus(std::move(out));
}

reward::PreferenceDataset make_preferences(const World& world, std::size_t n, double noise, std::uint64_t seed,
                                           const SentenceOptions& opts) {
  if (noise < 0.0 || noise > 1.0) throw ConfigError("noise must be in [0, 1]");
  Rng rng(derive_seed(seed, "synthetic-preferences"));
  reward::PreferenceDataset d;
  while (d.size() < n) {
    const Sample s = sample_source(world, rng, opts);
    std::string a = sample_candidate(world, s, rng);
    std::string b = sample_candidate(world, s, rng);
    const double sa = world.score(a);
    const double sb = world.score(b);
    if (a == b || sa == sb) continue;
    if (sa < sb) std::swap(a, b);
    if (rng.bernoulli(noise)) std::swap(a, b);
    d.records.push_back({s.source, std::move(a), std::move(b)});
  }
  return d;
}

std::map<std::string, std::vector<std::string>> lexicon_words(const World& world) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& c : world.concepts) {
    out["english"].push_back(c.english);
    out["hindi"].push_back(c.hindi);
    out["hindi"].push_back(c.hindi_alt);
  }
  return out;
}

}  // namespace chai::synthetic
