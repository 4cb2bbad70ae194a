#include "chai/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include "chai/jsonl.hpp"
#include "chai/rng.hpp"
#include "chai/text.hpp"

namespace chai::corpus {
namespace {

std::string string_field(const json& obj, const char* key, const std::string& fallback,
                         const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw Error(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

// Normalizes text fields and dedups translations. Returns false when the row
// must be dropped.
bool clean_row(ParallelRow& row, LoadReport& report) {
  row.source_text = text::normalize(row.source_text);
  std::vector<std::string> kept;
  std::unordered_set<std::string> seen;
  for (auto& t : row.translations) {
    std::string n = text::normalize(t);
    if (n.empty()) continue;
    if (!seen.insert(n).second) {
      ++report.duplicate_translations_removed;
      continue;
    }
    kept.push_back(std::move(n));
  }
  row.translations = std::move(kept);
  if (row.source_text.empty()) {
    ++report.dropped_empty_source;
    return false;
  }
  if (row.translations.empty()) {
    ++report.dropped_no_translations;
    return false;
  }
  return true;
}

ParallelCorpus load_jsonl(const std::string& path) {
  ParallelCorpus corpus;
  std::set<std::string> ids;
  jsonl::for_each(path, [&](std::size_t line_no, const json& obj) {
    const std::string where = path + ":" + std::to_string(line_no);
    if (!obj.is_object()) throw Error(where + ": record must be a JSON object");
    ++corpus.report.records_read;
    ParallelRow row;
    auto id_it = obj.find("row_id");
    if (id_it == obj.end() || !id_it->is_string()) throw Error(where + ": missing string 'row_id'");
    row.row_id = id_it->get<std::string>();
    auto src_it = obj.find("source");
    if (src_it == obj.end() || !src_it->is_string()) throw Error(where + ": missing string 'source'");
    row.source_text = src_it->get<std::string>();
    auto tr_it = obj.find("translations");
    if (tr_it == obj.end() || !tr_it->is_array()) {
      throw Error(where + ": missing array 'translations'");
    }
    for (const auto& t : *tr_it) {
      if (!t.is_string()) throw Error(where + ": translations must be strings");
      row.translations.push_back(t.get<std::string>());
    }
    row.source_lang = string_field(obj, "source_lang", "english", where);
    row.target_lang = string_field(obj, "target_lang", "hinglish", where);
    row.origin = string_field(obj, "origin", "", where);
    if (!ids.insert(row.row_id).second) throw Error(where + ": duplicate row_id '" + row.row_id + "'");
    if (clean_row(row, corpus.report)) corpus.rows.push_back(std::move(row));
  });
  corpus.report.rows_loaded = corpus.rows.size();
  return corpus;
}

ParallelCorpus load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  const std::string origin = std::filesystem::path(path).stem().string();

  ParallelCorpus corpus;
  std::vector<ParallelRow> rows;
  std::map<std::string, std::size_t> by_source;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::is_blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw Error(path + ":" + std::to_string(line_no) + ": expected exactly two tab-separated columns");
    }
    std::string source = line.substr(0, tab);
    std::string translation = line.substr(tab + 1);
    if (line_no == 1 && source == "source" && translation == "translation") continue;
    ++corpus.report.records_read;
    const std::string key = text::normalize(source);
    auto [it, inserted] = by_source.emplace(key, rows.size());
    if (inserted) {
      ParallelRow row;
      row.row_id = origin + "-" + std::to_string(rows.size() + 1);
      row.source_text = source;
      row.origin = origin;
      rows.push_back(std::move(row));
    }
    rows[it->second].translations.push_back(std::move(translation));
  }
  for (auto& row : rows) {
    if (clean_row(row, corpus.report)) corpus.rows.push_back(std::move(row));
  }
  corpus.report.rows_loaded = corpus.rows.size();
  return corpus;
}

}  // namespace

std::size_t ParallelCorpus::pair_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.translations.size();
  return n;
}

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "tsv") return CorpusFormat::kTsv;
  throw ConfigError("unknown corpus format '" + name + "' (expected jsonl or tsv)");
}

ParallelCorpus load_corpus(const std::string& path, CorpusFormat format) {
  return format == CorpusFormat::kJsonl ? load_jsonl(path) : load_tsv(path);
}

ParallelCorpus make_corpus(std::vector<ParallelRow> rows) {
  ParallelCorpus corpus;
  std::set<std::string> ids;
  for (auto& row : rows) {
    ++corpus.report.records_read;
    if (!ids.insert(row.row_id).second) throw Error("duplicate row_id '" + row.row_id + "'");
    if (clean_row(row, corpus.report)) corpus.rows.push_back(std::move(row));
  }
  corpus.report.rows_loaded = corpus.rows.size();
  return corpus;
}

json to_json(const ParallelRow& row) {
  return json{{"row_id", row.row_id},           {"source", row.source_text},
              {"translations", row.translations}, {"source_lang", row.source_lang},
              {"target_lang", row.target_lang},   {"origin", row.origin}};
}

json to_json(const LoadReport& r) {
  return json{{"records_read", r.records_read},
              {"rows_loaded", r.rows_loaded},
              {"dropped_empty_source", r.dropped_empty_source},
              {"dropped_no_translations", r.dropped_no_translations},
              {"duplicate_translations_removed", r.duplicate_translations_removed}};
}

void save_corpus_jsonl(const std::string& path, const ParallelCorpus& corpus) {
  std::vector<json> out;
  out.reserve(corpus.rows.size());
  for (const auto& r : corpus.rows) out.push_back(to_json(r));
  jsonl::write(path, out);
}

json to_json(const SftExample& ex) {
  return json{{"row_id", ex.row_id}, {"prompt", ex.prompt_text}, {"target", ex.target_text}};
}

std::pair<std::string, std::string> PreferencePair::canonical() const {
  return swap_applied ? std::pair{candidate_b, candidate_a} : std::pair{candidate_a, candidate_b};
}

PreferencePair PreferencePair::swapped() const {
  PreferencePair p = *this;
  std::swap(p.candidate_a, p.candidate_b);
  p.swap_applied = !swap_applied;
  return p;
}

json to_json(const PreferencePair& p) {
  return json{{"pair_id", p.pair_id},         {"row_id", p.row_id},
              {"source", p.source_text},      {"candidate_a", p.candidate_a},
              {"candidate_b", p.candidate_b}, {"swap_applied", p.swap_applied},
              {"rng_seed", p.rng_seed}};
}

PreferencePair pair_from_json(const json& j) {
  PreferencePair p;
  try {
    p.pair_id = j.at("pair_id").get<std::string>();
    p.row_id = j.at("row_id").get<std::string>();
    p.source_text = j.at("source").get<std::string>();
    p.candidate_a = j.at("candidate_a").get<std::string>();
    p.candidate_b = j.at("candidate_b").get<std::string>();
    p.swap_applied = j.at("swap_applied").get<bool>();
    p.rng_seed = j.value("rng_seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw Error(std::string("malformed preference pair: ") + e.what());
  }
  if (p.candidate_a == p.candidate_b) throw Error("preference pair " + p.pair_id + " has identical candidates");
  return p;
}

std::vector<PreferencePair> load_pairs(const std::string& path) {
  std::vector<PreferencePair> out;
  jsonl::for_each(path, [&](std::size_t line_no, const json& obj) {
    try {
      out.push_back(pair_from_json(obj));
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

void save_pairs(const std::string& path, const std::vector<PreferencePair>& pairs) {
  std::vector<json> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(to_json(p));
  jsonl::write(path, out);
}

PairingResult make_preference_pairs(const ParallelCorpus& corpus, PairingMode mode,
                                    std::uint64_t seed) {
  if (mode.kind == PairingMode::Kind::kSampled && mode.n < 1) {
    throw ConfigError("sampled pairing requires n >= 1");
  }
  PairingResult result;
  for (const auto& row : corpus.rows) {
    const auto& tr = row.translations;
    if (tr.size() < 2) {
      ++result.skipped_rows;
      continue;
    }
    for (std::size_t i = 0; i < tr.size(); ++i) {
      for (std::size_t j = i + 1; j < tr.size(); ++j) {
        PreferencePair p;
        p.pair_id = row.row_id + ":" + std::to_string(i) + "-" + std::to_string(j);
        p.row_id = row.row_id;
        p.source_text = row.source_text;
        p.rng_seed = derive_seed(seed, p.pair_id);
        Rng rng(p.rng_seed);
        p.swap_applied = rng.bernoulli(0.5);
        p.candidate_a = p.swap_applied ? tr[j] : tr[i];
        p.candidate_b = p.swap_applied ? tr[i] : tr[j];
        result.pairs.push_back(std::move(p));
      }
    }
  }
  if (mode.kind == PairingMode::Kind::kSampled && mode.n < result.pairs.size()) {
    // Partial Fisher-Yates over indices, then restore corpus order.
    std::vector<std::size_t> idx(result.pairs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(derive_seed(seed, "sampled-pairs"));
    for (std::size_t i = 0; i < mode.n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.index(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(mode.n);
    std::sort(idx.begin(), idx.end());
    std::vector<PreferencePair> kept;
    kept.reserve(mode.n);
    for (auto i : idx) kept.push_back(std::move(result.pairs[i]));
    result.pairs = std::move(kept);
  }
  return result;
}

}  // namespace chai::corpus
