#pragma once

// Mini-batch SGD for the model trigger, mini-turn evaluation and the
// few-shot learning curve.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etadm/features.hpp"
#include "etadm/model.hpp"

namespace etadm {

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 8;
  std::size_t epochs = 60;
  std::uint64_t seed = 7;
  std::size_t d_hidden = 128;
  // Epochs without held-out improvement before stopping. Only used when
  // validation_fraction > 0.
  std::size_t patience = 5;
  // Share of training dialogues held out for early stopping.
  double validation_fraction = 0.0;
  double init_scale = 0.05;
  std::size_t n_actions = 13;
  std::vector<std::string> action_names;
  ContextEncoderConfig encoder;

  void validate() const;
};

TrainConfig parse_train_config(std::string_view json_text);
std::string serialize_train_config(const TrainConfig& config);

struct TrainResult {
  ModelParams params;
  std::vector<double> train_loss;       // mean over the mini-batches of each epoch
  std::vector<double> validation_loss;  // empty without a validation slice
  std::size_t best_epoch = 0;           // 1-based
  std::size_t epochs_run = 0;
};

/// Throws EmptyTrainingSet, DimensionMismatch, LabelOutOfRange.
TrainResult train(std::span<const MiniTurnRecord> records, const TrainConfig& config);

// One plain SGD update with precomputed gradients.
void sgd_step(ModelParams& params, const Gradients& grads, double learning_rate);

struct EvalReport {
  std::vector<std::string> action_names;
  std::size_t total = 0;
  std::size_t correct = 0;
  double mini_turn_accuracy = 0.0;
  // confusion[gold][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<std::size_t> gold_counts;
  std::vector<std::size_t> predicted_counts;
  // Undefined when the class was never predicted / never gold.
  std::vector<std::optional<double>> precision;
  std::vector<std::optional<double>> recall;
};

EvalReport evaluate(std::span<const MiniTurnRecord> records, const ModelParams& params);

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

struct FewShotConfig {
  std::vector<double> fractions = {0.05, 0.1, 0.25, 0.5, 1.0};
  double test_fraction = 0.2;
  std::uint64_t split_seed = 13;
  std::uint64_t subsample_seed = 29;
};

struct FewShotPoint {
  double fraction = 0.0;
  std::size_t train_dialogues = 0;
  std::size_t train_records = 0;
  std::size_t test_records = 0;
  double test_accuracy = 0.0;
};

/// Holds out a fixed test split of dialogues, then for each fraction trains
/// on the first share of one seeded permutation of the remaining dialogues
/// (subsamples are nested). Throws EmptySplit when a share has no dialogue.
std::vector<FewShotPoint> few_shot_curve(std::span<const MiniTurnRecord> records,
                                         const FewShotConfig& fewshot, const TrainConfig& config);

std::string curve_to_json(std::span<const FewShotPoint> curve);
std::string curve_to_text(std::span<const FewShotPoint> curve);

}  // namespace etadm
