#pragma once

// The learned trigger: a fusion layer over [context; state] followed by a
// softmax prediction layer over every action, STOP included.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "etadm/features.hpp"

namespace etadm {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct ModelDims {
  std::size_t d_ctx = 768;
  std::size_t d_state = state_layout::kDim;
  std::size_t d_hidden = 128;
  std::size_t n_actions = 13;

  std::size_t d_input() const { return d_ctx + d_state; }

  bool operator==(const ModelDims&) const = default;
};

struct ModelParams {
  ContextEncoderConfig encoder;
  ModelDims dims;
  std::vector<std::string> action_names;  // optional; empty or n_actions long
  Matrix w_fuse;                          // d_hidden x (d_ctx + d_state)
  std::vector<double> b_fuse;             // d_hidden
  Matrix w_pred;                          // n_actions x d_hidden
  std::vector<double> b_pred;             // n_actions

  static ModelParams zeros(const ModelDims& dims);
  // Entries uniform in [-scale, scale) from a seeded generator.
  static ModelParams random(const ModelDims& dims, std::uint64_t seed, double scale = 0.05);

  /// Throws DimensionMismatch / InvalidArgument when shapes disagree or an
  /// entry is not finite.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// One labeled mini-turn.
struct MiniTurnRecord {
  std::string dialogue_id;
  std::int64_t turn_index = 0;
  std::int64_t mini_turn_index = 0;
  FeatureVector context;
  FeatureVector state;
  int gold_action = 0;

  bool operator==(const MiniTurnRecord&) const = default;
};

/// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardPass {
  std::vector<double> hidden_pre;  // W_fuse x + b_fuse
  std::vector<double> hidden;      // relu(hidden_pre)
  std::vector<double> logits;
  std::vector<double> probabilities;
};

ForwardPass forward(const FeatureVector& context, const FeatureVector& state, const ModelParams& params);

/// softmax(W_pred relu(W_fuse [ctx; st] + b_fuse) + b_pred).
std::vector<double> predict(const FeatureVector& context, const FeatureVector& state,
                            const ModelParams& params);

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

struct Gradients {
  Matrix w_fuse;
  std::vector<double> b_fuse;
  Matrix w_pred;
  std::vector<double> b_pred;

  static Gradients zeros_like(const ModelParams& params);
};

struct LossAndGrads {
  double loss = 0.0;
  Gradients grads;
};

/// Mean cross-entropy of the gold actions and its exact gradient.
LossAndGrads loss_and_grads(std::span<const MiniTurnRecord> batch, const ModelParams& params);

/// Mean cross-entropy only.
double mean_loss(std::span<const MiniTurnRecord> batch, const ModelParams& params);

// Model files: versioned JSON with weights as nested row-major arrays.
inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const ModelParams& params);
ModelParams parse_model(std::string_view json_text);
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace etadm
