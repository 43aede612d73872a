#include "etadm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "etadm/corpus.hpp"
#include "etadm/error.hpp"
#include "etadm/rng.hpp"

namespace etadm {

using json = nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidArgument, "learning_rate must be positive");
  }
  if (batch_size == 0 || epochs == 0 || d_hidden == 0 || patience == 0 || n_actions == 0) {
    throw Error(ErrorCode::InvalidArgument, "batch_size, epochs, d_hidden, patience and n_actions must be positive");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "validation_fraction must lie in [0, 1)");
  }
  if (!(init_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "init_scale must be positive");
  if (!action_names.empty() && action_names.size() != n_actions) {
    throw Error(ErrorCode::InvalidArgument, "action_names must list n_actions names");
  }
}

TrainConfig parse_train_config(std::string_view json_text) {
  TrainConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "train config must be an object");
    static const std::unordered_set<std::string> known = {
        "learning_rate", "batch_size", "epochs", "seed", "d_hidden",
        "patience", "validation_fraction", "init_scale"};
    for (const auto& [key, _] : j.items()) {
      if (!known.contains(key)) throw Error(ErrorCode::SchemaError, "unknown train config key '" + key + "'");
    }
    // nlohmann happily casts -1 to size_t
    auto count = [&j](const char* key, std::uint64_t fallback) -> std::uint64_t {
      if (!j.contains(key)) return fallback;
      if (!j[key].is_number_unsigned()) {
        throw Error(ErrorCode::SchemaError, std::string("train config: '") + key + "' must be a non-negative integer");
      }
      return j[key].get<std::uint64_t>();
    };
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = count("batch_size", c.batch_size);
    c.epochs = count("epochs", c.epochs);
    c.seed = count("seed", c.seed);
    c.d_hidden = count("d_hidden", c.d_hidden);
    c.patience = count("patience", c.patience);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.init_scale = j.value("init_scale", c.init_scale);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string serialize_train_config(const TrainConfig& c) {
  json j = {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
            {"epochs", c.epochs},               {"seed", c.seed},
            {"d_hidden", c.d_hidden},           {"patience", c.patience},
            {"validation_fraction", c.validation_fraction}, {"init_scale", c.init_scale}};
  return j.dump(2);
}

void sgd_step(ModelParams& p, const Gradients& g, double lr) {
  auto update = [lr](std::vector<double>& w, const std::vector<double>& dw) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * dw[i];
  };
  update(p.w_fuse.data(), g.w_fuse.data());
  update(p.b_fuse, g.b_fuse);
  update(p.w_pred.data(), g.w_pred.data());
  update(p.b_pred, g.b_pred);
}

namespace {

void check_records(std::span<const MiniTurnRecord> records, const TrainConfig& config) {
  const std::size_t d_ctx = records.front().context.size();
  const std::size_t d_state = records.front().state.size();
  if (d_ctx != config.encoder.dim) {
    throw Error(ErrorCode::DimensionMismatch, "records carry " + std::to_string(d_ctx) +
                                                  "-d context features, encoder expects " +
                                                  std::to_string(config.encoder.dim));
  }
  for (const auto& r : records) {
    if (r.context.size() != d_ctx || r.state.size() != d_state) {
      throw Error(ErrorCode::DimensionMismatch, "inconsistent feature dims in record of " + r.dialogue_id);
    }
    if (r.gold_action < 0 || static_cast<std::size_t>(r.gold_action) >= config.n_actions) {
      throw Error(ErrorCode::LabelOutOfRange, "gold action " + std::to_string(r.gold_action) +
                                                  " outside [0, " + std::to_string(config.n_actions) + ")");
    }
  }
}

}  // namespace

TrainResult train(std::span<const MiniTurnRecord> records, const TrainConfig& config) {
  config.validate();
  if (records.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training records");
  check_records(records, config);

  std::vector<MiniTurnRecord> train_set;
  std::vector<MiniTurnRecord> validation_set;
  if (config.validation_fraction > 0.0) {
    std::tie(train_set, validation_set) =
        split_records(records, 1.0 - config.validation_fraction, config.seed ^ 0x9e3779b97f4a7c15ULL);
  } else {
    train_set.assign(records.begin(), records.end());
  }
  if (train_set.empty()) throw Error(ErrorCode::EmptyTrainingSet, "validation slice leaves no training records");

  ModelDims dims;
  dims.d_ctx = records.front().context.size();
  dims.d_state = records.front().state.size();
  dims.d_hidden = config.d_hidden;
  dims.n_actions = config.n_actions;

  TrainResult out;
  out.params = ModelParams::random(dims, config.seed, config.init_scale);
  out.params.encoder = config.encoder;
  out.params.action_names = config.action_names;

  Rng rng(config.seed + 1);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<MiniTurnRecord> batch;
  batch.reserve(config.batch_size);

  ModelParams best = out.params;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(train_set[order[i]]);
      const LossAndGrads lg = loss_and_grads(batch, out.params);
      sgd_step(out.params, lg.grads, config.learning_rate);
      epoch_loss += lg.loss;
      ++n_batches;
    }
    out.train_loss.push_back(epoch_loss / static_cast<double>(n_batches));
    out.epochs_run = epoch;

    if (validation_set.empty()) continue;
    const double v = mean_loss(validation_set, out.params);
    out.validation_loss.push_back(v);
    if (v < best_loss) {
      best_loss = v;
      best = out.params;
      out.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  if (validation_set.empty()) {
    out.best_epoch = out.epochs_run;
  } else {
    out.params = std::move(best);
  }
  return out;
}

EvalReport evaluate(std::span<const MiniTurnRecord> records, const ModelParams& params) {
  const std::size_t a = params.dims.n_actions;
  EvalReport rep;
  rep.action_names = params.action_names;
  if (rep.action_names.empty()) {
    for (std::size_t i = 0; i < a; ++i) rep.action_names.push_back("action_" + std::to_string(i));
  }
  rep.confusion.assign(a, std::vector<std::size_t>(a, 0));
  rep.gold_counts.assign(a, 0);
  rep.predicted_counts.assign(a, 0);

  for (const auto& r : records) {
    if (r.gold_action < 0 || static_cast<std::size_t>(r.gold_action) >= a) {
      throw Error(ErrorCode::LabelOutOfRange, "gold action " + std::to_string(r.gold_action) + " out of range");
    }
    const auto probs = predict(r.context, r.state, params);
    const std::size_t pred = argmax(probs);
    const auto gold = static_cast<std::size_t>(r.gold_action);
    ++rep.confusion[gold][pred];
    ++rep.gold_counts[gold];
    ++rep.predicted_counts[pred];
    if (pred == gold) ++rep.correct;
    ++rep.total;
  }
  rep.mini_turn_accuracy =
      rep.total ? static_cast<double>(rep.correct) / static_cast<double>(rep.total) : 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    const double tp = static_cast<double>(rep.confusion[i][i]);
    rep.precision.push_back(rep.predicted_counts[i] ? std::optional(tp / static_cast<double>(rep.predicted_counts[i]))
                                                    : std::nullopt);
    rep.recall.push_back(rep.gold_counts[i] ? std::optional(tp / static_cast<double>(rep.gold_counts[i]))
                                            : std::nullopt);
  }
  return rep;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left = true) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  json per_action = json::array();
  for (std::size_t i = 0; i < r.action_names.size(); ++i) {
    per_action.push_back({{"action", r.action_names[i]},
                          {"gold", r.gold_counts[i]},
                          {"predicted", r.predicted_counts[i]},
                          {"precision", optional_json(r.precision[i])},
                          {"recall", optional_json(r.recall[i])}});
  }
  json j = {{"mini_turn_accuracy", r.mini_turn_accuracy},
            {"total", r.total},
            {"correct", r.correct},
            {"per_action", per_action},
            {"confusion", r.confusion}};
  return j.dump(2);
}

std::string report_to_text(const EvalReport& r) {
  std::string out = "mini-turn accuracy " + fixed(r.mini_turn_accuracy) + " (" + std::to_string(r.correct) +
                    "/" + std::to_string(r.total) + ")\n\n";
  std::size_t w = 6;
  for (const auto& n : r.action_names) w = std::max(w, n.size());
  out += pad("action", w) + "  " + pad("gold", 6, false) + "  " + pad("pred", 6, false) + "  " +
         pad("prec", 6, false) + "  " + pad("recall", 6, false) + "\n";
  auto opt = [](const std::optional<double>& v) { return v ? fixed(*v) : std::string("-"); };
  for (std::size_t i = 0; i < r.action_names.size(); ++i) {
    out += pad(r.action_names[i], w) + "  " + pad(std::to_string(r.gold_counts[i]), 6, false) + "  " +
           pad(std::to_string(r.predicted_counts[i]), 6, false) + "  " + pad(opt(r.precision[i]), 6, false) +
           "  " + pad(opt(r.recall[i]), 6, false) + "\n";
  }
  out += "\nconfusion (rows gold, columns predicted)\n";
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    out += pad(r.action_names[i], w);
    for (auto c : r.confusion[i]) out += " " + pad(std::to_string(c), 4, false);
    out += "\n";
  }
  return out;
}

std::vector<FewShotPoint> few_shot_curve(std::span<const MiniTurnRecord> records,
                                         const FewShotConfig& fs, const TrainConfig& config) {
  if (fs.fractions.empty()) throw Error(ErrorCode::InvalidArgument, "no fractions given");
  for (std::size_t i = 0; i < fs.fractions.size(); ++i) {
    const double f = fs.fractions[i];
    if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::InvalidArgument, "fractions must lie in (0, 1]");
    if (i && !(f > fs.fractions[i - 1])) throw Error(ErrorCode::InvalidArgument, "fractions must ascend");
  }
  if (!(fs.test_fraction > 0.0 && fs.test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test_fraction must lie in (0, 1)");
  }
  const auto [pool, test] = split_records(records, 1.0 - fs.test_fraction, fs.split_seed);
  if (test.empty()) throw Error(ErrorCode::EmptySplit, "test split is empty");

  auto ids = dialogue_ids(pool);
  Rng rng(fs.subsample_seed);
  rng.shuffle(std::span<std::string>(ids));

  std::vector<FewShotPoint> curve;
  for (double f : fs.fractions) {
    const auto n = static_cast<std::size_t>(std::floor(f * static_cast<double>(ids.size()) + 1e-9));
    if (n == 0) {
      throw Error(ErrorCode::EmptySplit, "fraction " + fixed(f, 3) + " selects no training dialogues");
    }
    const std::unordered_set<std::string> chosen(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<MiniTurnRecord> subset;
    for (const auto& r : pool) {
      if (chosen.contains(r.dialogue_id)) subset.push_back(r);
    }
    const TrainResult trained = train(subset, config);
    const EvalReport rep = evaluate(test, trained.params);
    curve.push_back({f, n, subset.size(), test.size(), rep.mini_turn_accuracy});
  }
  return curve;
}

std::string curve_to_json(std::span<const FewShotPoint> curve) {
  json rows = json::array();
  for (const auto& p : curve) {
    rows.push_back({{"fraction", p.fraction},
                    {"train_dialogues", p.train_dialogues},
                    {"train_records", p.train_records},
                    {"test_records", p.test_records},
                    {"test_accuracy", p.test_accuracy}});
  }
  return json{{"curve", rows}}.dump(2);
}

std::string curve_to_text(std::span<const FewShotPoint> curve) {
  std::string out = pad("fraction", 8, false) + "  " + pad("dialogues", 9, false) + "  " +
                    pad("records", 7, false) + "  " + pad("accuracy", 8, false) + "\n";
  for (const auto& p : curve) {
    out += pad(fixed(p.fraction, 2), 8, false) + "  " + pad(std::to_string(p.train_dialogues), 9, false) +
           "  " + pad(std::to_string(p.train_records), 7, false) + "  " +
           pad(fixed(p.test_accuracy), 8, false) + "\n";
  }
  return out;
}

}  // namespace etadm
