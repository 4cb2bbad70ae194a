#include "chai/reward.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "chai/jsonl.hpp"
#include "chai/oracle.hpp"
#include "chai/rng.hpp"

namespace chai::reward {

PreferenceDataset build_dataset(const std::vector<corpus::PreferencePair>& pairs,
                                const std::vector<annotator::Verdict>& verdicts) {
  std::map<std::string, const corpus::PreferencePair*> by_id;
  for (const auto& p : pairs) by_id[p.pair_id] = &p;
  PreferenceDataset d;
  for (const auto& v : verdicts) {
    if (!v.canonical_label) continue;
    auto it = by_id.find(v.pair_id);
    if (it == by_id.end()) continue;
    const auto [first, second] = it->second->canonical();
    if (*v.canonical_label == 0) {
      d.records.push_back({it->second->source_text, first, second});
    } else {
      d.records.push_back({it->second->source_text, second, first});
    }
  }
  return d;
}

json to_json(const PreferenceRecord& r) {
  return json{{"source", r.source}, {"chosen", r.chosen}, {"rejected", r.rejected}};
}

PreferenceDataset load_dataset(const std::string& path) {
  PreferenceDataset d;
  jsonl::for_each(path, [&](std::size_t line_no, const json& j) {
    try {
      d.records.push_back({j.at("source").get<std::string>(), j.at("chosen").get<std::string>(),
                           j.at("rejected").get<std::string>()});
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
    }
    if (d.records.back().chosen == d.records.back().rejected) {
      throw Error(path + ":" + std::to_string(line_no) + ": chosen equals rejected");
    }
  });
  return d;
}

void save_dataset(const std::string& path, const PreferenceDataset& d) {
  std::vector<json> out;
  for (const auto& r : d.records) out.push_back(to_json(r));
  jsonl::write(path, out);
}

RewardModel RewardModel::zeros(features::FeatureExtractor config) {
  config.validate();
  RewardModel m;
  m.weights.assign(config.hash_dim, 0.0);
  m.feature_config = std::move(config);
  return m;
}

double RewardModel::score(const std::string& source, const std::string& candidate) const {
  return feature_config.featurize(source, candidate).dot(weights);
}

double bt_probability(double r_chosen, double r_rejected) {
  return annotator::sigmoid(r_chosen - r_rejected);
}

double neg_log_sigmoid(double margin) {
  if (margin >= 0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

namespace {

// phi(chosen) - phi(rejected) per record.
std::vector<features::SparseVector> feature_diffs(const features::FeatureExtractor& fx,
                                                  std::span<const PreferenceRecord> records) {
  std::vector<features::SparseVector> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(fx.featurize(r.source, r.chosen).minus(fx.featurize(r.source, r.rejected)));
  }
  return out;
}

double mean_loss(std::span<const double> w, const std::vector<features::SparseVector>& diffs) {
  double s = 0.0;
  for (const auto& d : diffs) s += neg_log_sigmoid(d.dot(w));
  return s / static_cast<double>(diffs.size());
}

void accumulate_gradient(std::span<const double> w,
                         std::span<const features::SparseVector* const> batch, double l2,
                         std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto* d : batch) {
    // d/dw [-log sigmoid(w.d)] = -sigmoid(-w.d) * d
    const double coeff = -annotator::sigmoid(-d->dot(w)) * inv;
    d->axpy(coeff, grad);
  }
  if (l2 != 0.0) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += l2 * w[i];
  }
}

double l2_penalty(std::span<const double> w, double l2) {
  if (l2 == 0.0) return 0.0;
  double s = 0.0;
  for (double x : w) s += x * x;
  return 0.5 * l2 * s;
}

}  // namespace

double bt_nll_loss(const RewardModel& model, const PreferenceDataset& dataset) {
  if (dataset.empty()) throw Error("bt_nll_loss: empty dataset");
  double s = 0.0;
  for (const auto& r : dataset.records) {
    s += neg_log_sigmoid(model.score(r.source, r.chosen) - model.score(r.source, r.rejected));
  }
  return s / static_cast<double>(dataset.size());
}

double bt_objective(const RewardModel& model, std::span<const PreferenceRecord> batch, double l2) {
  if (batch.empty()) throw Error("bt_objective: empty batch");
  return mean_loss(model.weights, feature_diffs(model.feature_config, batch)) +
         l2_penalty(model.weights, l2);
}

std::vector<double> bt_gradient(const RewardModel& model, std::span<const PreferenceRecord> batch,
                                double l2) {
  if (batch.empty()) throw Error("bt_gradient: empty batch");
  const auto diffs = feature_diffs(model.feature_config, batch);
  std::vector<const features::SparseVector*> ptrs;
  for (const auto& d : diffs) ptrs.push_back(&d);
  std::vector<double> grad(model.weights.size());
  accumulate_gradient(model.weights, ptrs, l2, grad);
  return grad;
}

json to_json(const RewardTrainConfig& c) {
  return json{{"lr", c.lr},         {"epochs", c.epochs}, {"batch_size", c.batch_size},
              {"l2", c.l2},         {"seed", c.seed},     {"shuffle", c.shuffle},
              {"features", features::to_json(c.features)}};
}

RewardTrainConfig reward_train_config_from_json(const json& j) {
  RewardTrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.l2 = j.value("l2", c.l2);
  c.seed = j.value("seed", c.seed);
  c.shuffle = j.value("shuffle", c.shuffle);
  if (j.contains("features")) c.features = features::feature_extractor_from_json(j.at("features"));
  return c;
}

RewardModel train_reward(const PreferenceDataset& dataset, const RewardTrainConfig& config) {
  if (dataset.empty()) throw Error("train_reward: empty dataset");
  if (config.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(config.lr > 0.0)) throw ConfigError("lr must be > 0");
  if (config.l2 < 0.0) throw ConfigError("l2 must be >= 0");

  RewardModel model = RewardModel::zeros(config.features);
  const auto diffs = feature_diffs(model.feature_config, dataset.records);
  const std::size_t n = diffs.size();
  const std::size_t batch = config.batch_size == 0 ? n : std::min(config.batch_size, n);

  auto objective = [&] { return mean_loss(model.weights, diffs) + l2_penalty(model.weights, config.l2); };
  const double initial = objective();
  model.training_meta = {config.seed, config.epochs, config.lr, config.l2, batch, {initial}};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, "train_reward"));
  std::vector<double> grad(model.weights.size());
  std::vector<const features::SparseVector*> ptrs;
  ptrs.reserve(batch);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      ptrs.clear();
      for (std::size_t i = start; i < std::min(start + batch, n); ++i) ptrs.push_back(&diffs[order[i]]);
      accumulate_gradient(model.weights, ptrs, config.l2, grad);
      for (std::size_t i = 0; i < grad.size(); ++i) model.weights[i] -= config.lr * grad[i];
    }
    const double loss = objective();
    model.training_meta.loss_curve.push_back(loss);
    if (!std::isfinite(loss) || loss > 10.0 * initial) {
      throw TrainingDiverged("reward training diverged at epoch " + std::to_string(epoch + 1) +
                             ": loss " + std::to_string(loss) + " vs initial " +
                             std::to_string(initial));
    }
  }
  return model;
}

double pairwise_accuracy(const RewardModel& model, const PreferenceDataset& dataset) {
  if (dataset.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& r : dataset.records) {
    if (model.score(r.source, r.chosen) > model.score(r.source, r.rejected)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

json to_json(const RewardModel& m) {
  const auto& t = m.training_meta;
  return json{{"format", "chai-reward-model"},
              {"version", 1},
              {"feature_config", features::to_json(m.feature_config)},
              {"weights", m.weights},
              {"training_meta",
               {{"seed", t.seed},
                {"epochs", t.epochs},
                {"lr", t.lr},
                {"l2", t.l2},
                {"batch_size", t.batch_size},
                {"loss_curve", t.loss_curve}}}};
}

RewardModel reward_model_from_json(const json& j) {
  if (j.value("format", "") != "chai-reward-model") throw Error("not a reward model file");
  if (j.value("version", 0) != 1) throw Error("unsupported reward model version");
  RewardModel m;
  m.feature_config = features::feature_extractor_from_json(j.at("feature_config"));
  m.weights = j.at("weights").get<std::vector<double>>();
  if (m.weights.size() != m.feature_config.hash_dim) throw Error("weight length does not match hash_dim");
  const auto& t = j.at("training_meta");
  m.training_meta.seed = t.value("seed", std::uint64_t{0});
  m.training_meta.epochs = t.value("epochs", 0);
  m.training_meta.lr = t.value("lr", 0.0);
  m.training_meta.l2 = t.value("l2", 0.0);
  m.training_meta.batch_size = t.value("batch_size", std::size_t{0});
  m.training_meta.loss_curve = t.value("loss_curve", std::vector<double>{});
  return m;
}

void save_model(const std::string& path, const RewardModel& m) { text::write_file(path, to_json(m).dump() + "\n"); }

RewardModel load_model(const std::string& path) {
  try {
    return reward_model_from_json(json::parse(text::read_file(path)));
  } catch (const json::exception& e) {
    throw Error(path + ": malformed reward model: " + e.what());
  }
}

}  // namespace chai::reward
