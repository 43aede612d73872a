#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "etadm/corpus.hpp"
#include "etadm/error.hpp"
#include "etadm/trainer.hpp"

#include "json.hpp"

using namespace etadm;

namespace {

constexpr std::size_t kState = 64;

MiniTurnRecord rec(Rng& rng, std::string dialogue, int gold, std::size_t d_ctx = 6) {
  MiniTurnRecord r{std::move(dialogue), 0, 0, {FeatureRole::Context, std::vector<double>(d_ctx)},
                   {FeatureRole::State, std::vector<double>(kState)}, gold};
  for (auto& v : r.context.values) v = rng.uniform(-1, 1);
  for (auto& v : r.state.values) v = rng.chance(0.3) ? 1.0 : 0.0;
  return r;
}

TrainConfig small_config(std::size_t n_actions = 3, std::size_t d_ctx = 6) {
  TrainConfig c;
  c.n_actions = n_actions;
  c.encoder.dim = d_ctx;
  c.d_hidden = 16;
  return c;
}

const std::vector<MiniTurnRecord>& bundled_records() {
  static const auto recs = [] {
    const auto corpus = load_corpus(fixtures::kData + "/synthetic_corpus.json", *fixtures::rulebook());
    const std::span<const AnnotatedDialogue> some(corpus.data(), 40);
    return collect_records(some, *fixtures::rulebook(), *fixtures::db(), *ContextEncoder::create({}));
  }();
  return recs;
}

}  // namespace

TEST(Train, MemorizesSingleRecord) {
  Rng rng(1);
  const std::vector<MiniTurnRecord> one = {rec(rng, "d", 2)};
  auto cfg = small_config();
  cfg.epochs = 200;
  cfg.batch_size = 1;
  const auto res = train(one, cfg);
  EXPECT_LT(mean_loss(one, res.params), 0.01);
  EXPECT_EQ(res.epochs_run, 200u);
  EXPECT_EQ(res.train_loss.size(), 200u);
}

TEST(Train, Deterministic) {
  Rng rng(2);
  std::vector<MiniTurnRecord> recs;
  for (int i = 0; i < 30; ++i) recs.push_back(rec(rng, "d" + std::to_string(i % 6), static_cast<int>(rng.below(3))));
  auto cfg = small_config();
  cfg.epochs = 5;
  const auto a = train(recs, cfg);
  const auto b = train(recs, cfg);
  EXPECT_EQ(serialize_model(a.params), serialize_model(b.params));
  cfg.seed = 8;
  EXPECT_NE(serialize_model(train(recs, cfg).params), serialize_model(a.params));
}

TEST(Train, EarlyStoppingKeepsBest) {
  Rng rng(3);
  std::vector<MiniTurnRecord> recs;
  for (int i = 0; i < 60; ++i) recs.push_back(rec(rng, "d" + std::to_string(i % 20), static_cast<int>(rng.below(3))));
  auto cfg = small_config();
  cfg.validation_fraction = 0.25;
  cfg.patience = 2;
  cfg.epochs = 100;
  cfg.learning_rate = 0.5;
  const auto res = train(recs, cfg);
  ASSERT_EQ(res.validation_loss.size(), res.epochs_run);
  EXPECT_LT(res.epochs_run, 100u);  // random labels: held-out loss turns around
  const double best = *std::min_element(res.validation_loss.begin(), res.validation_loss.end());
  EXPECT_EQ(res.validation_loss[res.best_epoch - 1], best);
}

TEST(Train, Rejections) {
  auto cfg = small_config();
  try {
    train({}, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyTrainingSet);
  }
  Rng rng(4);
  const std::vector<MiniTurnRecord> wide = {rec(rng, "d", 0, 9)};
  try {
    train(wide, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  const std::vector<MiniTurnRecord> bad = {rec(rng, "d", 3)};
  try {
    train(bad, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LabelOutOfRange);
  }
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Train, ConfigFile) {
  const auto cfg = parse_train_config(R"({"learning_rate": 0.2, "epochs": 3})");
  EXPECT_EQ(cfg.learning_rate, 0.2);
  EXPECT_EQ(cfg.epochs, 3u);
  EXPECT_EQ(cfg.batch_size, TrainConfig{}.batch_size);
  EXPECT_EQ(parse_train_config(serialize_train_config(cfg)).learning_rate, 0.2);
  EXPECT_THROW(parse_train_config(R"({"learnig_rate": 0.2})"), Error);
  EXPECT_THROW(parse_train_config(R"({"epochs": -1})"), Error);
  // the shipped defaults file describes the compiled-in defaults
  std::ifstream in(fixtures::kData + "/train_config.json");
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  const auto shipped = parse_train_config(text);
  EXPECT_EQ(serialize_train_config(shipped), serialize_train_config(TrainConfig{}));
}

TEST(SgdStep, DescendsOnSmallSteps) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = ModelParams::random({6, kState, 8, 3}, rng.next_u64(), 0.5);
    std::vector<MiniTurnRecord> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(rec(rng, "d", static_cast<int>(rng.below(3))));
    const auto lg = loss_and_grads(batch, p);
    sgd_step(p, lg.grads, 1e-3);
    EXPECT_LT(oracle::naive_loss(batch, p), lg.loss);
  }
}

TEST(Evaluate, AlwaysClassZero) {
  Rng rng(6);
  std::vector<MiniTurnRecord> recs;
  for (int i = 0; i < 9; ++i) recs.push_back(rec(rng, "d", 0));
  const auto rep = evaluate(recs, ModelParams::zeros({6, kState, 4, 3}));
  EXPECT_EQ(rep.mini_turn_accuracy, 1.0);
  EXPECT_EQ(rep.correct, 9u);
}

TEST(Evaluate, UniformModelScoresClassZeroShare) {
  Rng rng(7);
  std::vector<MiniTurnRecord> recs;
  for (int i = 0; i < 12; ++i) recs.push_back(rec(rng, "d", i % 3));
  const auto rep = evaluate(recs, ModelParams::zeros({6, kState, 4, 3}));
  EXPECT_DOUBLE_EQ(rep.mini_turn_accuracy, 1.0 / 3.0);
  EXPECT_EQ(rep.predicted_counts, (std::vector<std::size_t>{12, 0, 0}));
  EXPECT_FALSE(rep.precision[1].has_value());
  EXPECT_DOUBLE_EQ(*rep.precision[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(*rep.recall[0], 1.0);
  EXPECT_DOUBLE_EQ(*rep.recall[2], 0.0);
}

TEST(Evaluate, ConfusionIsConsistent) {
  const auto& recs = bundled_records();
  const auto p = ModelParams::random({768, kState, 16, 13}, 3, 0.3);
  const auto rep = evaluate(recs, p);
  std::size_t trace = 0, total = 0;
  for (std::size_t g = 0; g < 13; ++g) {
    std::size_t row = 0;
    for (std::size_t q = 0; q < 13; ++q) row += rep.confusion[g][q];
    EXPECT_EQ(row, rep.gold_counts[g]);
    trace += rep.confusion[g][g];
    total += row;
  }
  EXPECT_EQ(total, recs.size());
  EXPECT_EQ(trace, rep.correct);
  EXPECT_DOUBLE_EQ(rep.mini_turn_accuracy, static_cast<double>(trace) / static_cast<double>(total));
  const auto j = nlohmann::json::parse(report_to_json(rep));
  EXPECT_EQ(j["total"], recs.size());
  EXPECT_FALSE(report_to_text(rep).empty());
}

TEST(FewShot, FullFractionEqualsPlainTraining) {
  const auto& recs = bundled_records();
  auto cfg = TrainConfig{};
  cfg.epochs = 3;
  FewShotConfig fs;
  fs.fractions = {1.0};
  const auto curve = few_shot_curve(recs, fs, cfg);
  ASSERT_EQ(curve.size(), 1u);
  const auto [train_part, test_part] = split_records(recs, 1.0 - fs.test_fraction, fs.split_seed);
  const auto model = train(train_part, cfg);
  EXPECT_DOUBLE_EQ(curve[0].test_accuracy, evaluate(test_part, model.params).mini_turn_accuracy);
  EXPECT_EQ(curve[0].train_records, train_part.size());
  EXPECT_EQ(curve[0].test_records, test_part.size());
  EXPECT_EQ(curve[0].train_dialogues, 32u);
}

TEST(FewShot, Rejections) {
  const auto& recs = bundled_records();
  FewShotConfig fs;
  fs.fractions = {0.01};  // 32 training dialogues -> none
  try {
    few_shot_curve(recs, fs, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySplit);
  }
  fs.fractions = {0.5, 0.25};
  EXPECT_THROW(few_shot_curve(recs, fs, TrainConfig{}), Error);
  fs.fractions = {1.5};
  EXPECT_THROW(few_shot_curve(recs, fs, TrainConfig{}), Error);
}
