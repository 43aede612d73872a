#include "etadm/model.hpp"

#include <algorithm>
#include <cmath>

#include "etadm/error.hpp"
#include "etadm/rng.hpp"
#include "etadm/text.hpp"
#include "json.hpp"

namespace etadm {

using nlohmann::json;

ModelParams ModelParams::zeros(const ModelDims& dims) {
  ModelParams p;
  p.encoder.dim = dims.d_ctx;
  p.dims = dims;
  p.w_fuse = Matrix(dims.d_hidden, dims.d_input());
  p.b_fuse.assign(dims.d_hidden, 0.0);
  p.w_pred = Matrix(dims.n_actions, dims.d_hidden);
  p.b_pred.assign(dims.n_actions, 0.0);
  return p;
}

ModelParams ModelParams::random(const ModelDims& dims, std::uint64_t seed, double scale) {
  ModelParams p = zeros(dims);
  Rng rng(seed);
  auto fill = [&](std::vector<double>& v) {
    for (double& x : v) x = rng.uniform(-scale, scale);
  };
  fill(p.w_fuse.data());
  fill(p.b_fuse);
  fill(p.w_pred.data());
  fill(p.b_pred);
  return p;
}

void ModelParams::validate() const {
  const auto& d = dims;
  if (d.d_ctx == 0 || d.d_state == 0 || d.d_hidden == 0 || d.n_actions == 0) {
    throw Error(ErrorCode::DimensionMismatch, "model dimensions must be positive");
  }
  if (w_fuse.rows() != d.d_hidden || w_fuse.cols() != d.d_input() || b_fuse.size() != d.d_hidden ||
      w_pred.rows() != d.n_actions || w_pred.cols() != d.d_hidden || b_pred.size() != d.n_actions) {
    throw Error(ErrorCode::DimensionMismatch, "weight shapes disagree with declared dimensions");
  }
  if (encoder.dim != d.d_ctx) {
    throw Error(ErrorCode::DimensionMismatch, "encoder dim differs from d_ctx");
  }
  if (!action_names.empty() && action_names.size() != d.n_actions) {
    throw Error(ErrorCode::DimensionMismatch, "action_names length differs from n_actions");
  }
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(w_fuse.data()) || !finite(b_fuse) || !finite(w_pred.data()) || !finite(b_pred)) {
    throw Error(ErrorCode::InvalidArgument, "model contains non-finite weights");
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace {

void check_inputs(const FeatureVector& ctx, const FeatureVector& st, const ModelParams& p) {
  if (ctx.size() != p.dims.d_ctx || st.size() != p.dims.d_state) {
    throw Error(ErrorCode::DimensionMismatch,
                "features are " + std::to_string(ctx.size()) + "+" + std::to_string(st.size()) +
                    " wide, model expects " + std::to_string(p.dims.d_ctx) + "+" +
                    std::to_string(p.dims.d_state));
  }
  if (p.w_fuse.rows() != p.dims.d_hidden || p.w_fuse.cols() != p.dims.d_input() ||
      p.w_pred.rows() != p.dims.n_actions || p.w_pred.cols() != p.dims.d_hidden ||
      p.b_fuse.size() != p.dims.d_hidden || p.b_pred.size() != p.dims.n_actions) {
    throw Error(ErrorCode::DimensionMismatch, "weight shapes disagree with declared dimensions");
  }
}

// Nonzero entries of the concatenated input. Context features are sparse
// and the state feature is binary, so this keeps the fusion layer cheap.
struct SparseInput {
  std::vector<std::size_t> index;
  std::vector<double> value;
};

SparseInput sparse_input(const FeatureVector& ctx, const FeatureVector& st) {
  SparseInput in;
  for (std::size_t j = 0; j < ctx.size(); ++j) {
    if (ctx[j] != 0.0) {
      in.index.push_back(j);
      in.value.push_back(ctx[j]);
    }
  }
  for (std::size_t j = 0; j < st.size(); ++j) {
    if (st[j] != 0.0) {
      in.index.push_back(ctx.size() + j);
      in.value.push_back(st[j]);
    }
  }
  return in;
}

ForwardPass forward_sparse(const SparseInput& in, const ModelParams& p) {
  const auto& d = p.dims;
  ForwardPass f;
  f.hidden_pre.resize(d.d_hidden);
  f.hidden.resize(d.d_hidden);
  for (std::size_t h = 0; h < d.d_hidden; ++h) {
    const auto w = p.w_fuse.row(h);
    double acc = p.b_fuse[h];
    for (std::size_t k = 0; k < in.index.size(); ++k) acc += w[in.index[k]] * in.value[k];
    f.hidden_pre[h] = acc;
    f.hidden[h] = acc > 0.0 ? acc : 0.0;
  }
  f.logits.resize(d.n_actions);
  for (std::size_t a = 0; a < d.n_actions; ++a) {
    const auto w = p.w_pred.row(a);
    double acc = p.b_pred[a];
    for (std::size_t h = 0; h < d.d_hidden; ++h) acc += w[h] * f.hidden[h];
    f.logits[a] = acc;
  }
  f.probabilities = softmax(f.logits);
  return f;
}

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - m);
  return m + std::log(sum);
}

void check_label(const MiniTurnRecord& r, const ModelParams& p) {
  if (r.gold_action < 0 || static_cast<std::size_t>(r.gold_action) >= p.dims.n_actions) {
    throw Error(ErrorCode::LabelOutOfRange, "gold action " + std::to_string(r.gold_action) +
                                                " outside 0.." + std::to_string(p.dims.n_actions - 1));
  }
}

}  // namespace

ForwardPass forward(const FeatureVector& context, const FeatureVector& state, const ModelParams& params) {
  check_inputs(context, state, params);
  return forward_sparse(sparse_input(context, state), params);
}

std::vector<double> predict(const FeatureVector& context, const FeatureVector& state,
                            const ModelParams& params) {
  return forward(context, state, params).probabilities;
}

Gradients Gradients::zeros_like(const ModelParams& p) {
  return {Matrix(p.w_fuse.rows(), p.w_fuse.cols()), std::vector<double>(p.b_fuse.size(), 0.0),
          Matrix(p.w_pred.rows(), p.w_pred.cols()), std::vector<double>(p.b_pred.size(), 0.0)};
}

LossAndGrads loss_and_grads(std::span<const MiniTurnRecord> batch, const ModelParams& params) {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  const auto& d = params.dims;
  LossAndGrads out{0.0, Gradients::zeros_like(params)};
  auto& g = out.grads;
  const double scale = 1.0 / static_cast<double>(batch.size());

  std::vector<double> d_logits(d.n_actions);
  std::vector<double> d_hidden(d.d_hidden);
  for (const auto& r : batch) {
    check_label(r, params);
    check_inputs(r.context, r.state, params);
    const SparseInput in = sparse_input(r.context, r.state);
    const ForwardPass f = forward_sparse(in, params);
    const auto gold = static_cast<std::size_t>(r.gold_action);
    out.loss += log_sum_exp(f.logits) - f.logits[gold];

    for (std::size_t a = 0; a < d.n_actions; ++a) {
      d_logits[a] = (f.probabilities[a] - (a == gold ? 1.0 : 0.0)) * scale;
    }
    std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
    for (std::size_t a = 0; a < d.n_actions; ++a) {
      const double da = d_logits[a];
      g.b_pred[a] += da;
      auto gw = g.w_pred.row(a);
      const auto w = params.w_pred.row(a);
      for (std::size_t h = 0; h < d.d_hidden; ++h) {
        gw[h] += da * f.hidden[h];
        d_hidden[h] += da * w[h];
      }
    }
    for (std::size_t h = 0; h < d.d_hidden; ++h) {
      if (f.hidden_pre[h] <= 0.0) continue;
      const double dh = d_hidden[h];
      g.b_fuse[h] += dh;
      auto gw = g.w_fuse.row(h);
      for (std::size_t k = 0; k < in.index.size(); ++k) gw[in.index[k]] += dh * in.value[k];
    }
  }
  out.loss *= scale;
  return out;
}

double mean_loss(std::span<const MiniTurnRecord> batch, const ModelParams& params) {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  double total = 0.0;
  for (const auto& r : batch) {
    check_label(r, params);
    const ForwardPass f = forward(r.context, r.state, params);
    total += log_sum_exp(f.logits) - f.logits[static_cast<std::size_t>(r.gold_action)];
  }
  return total / static_cast<double>(batch.size());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const char* what) {
  if (!j.is_array() || j.size() != rows) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has the wrong row count");
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = j[r].get<std::vector<double>>();
    if (row.size() != cols) {
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has the wrong column count");
    }
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

}  // namespace

std::string serialize_model(const ModelParams& p) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["encoder"] = {{"kind", to_string(p.encoder.kind)},
                    {"dim", p.encoder.dim},
                    {"ngram_orders", p.encoder.ngram_orders},
                    {"seed", p.encoder.seed},
                    {"vectors_path", p.encoder.vectors_path}};
  doc["dims"] = {{"d_ctx", p.dims.d_ctx},
                 {"d_state", p.dims.d_state},
                 {"d_hidden", p.dims.d_hidden},
                 {"n_actions", p.dims.n_actions}};
  doc["action_names"] = p.action_names;
  doc["w_fuse"] = matrix_json(p.w_fuse);
  doc["b_fuse"] = p.b_fuse;
  doc["w_pred"] = matrix_json(p.w_pred);
  doc["b_pred"] = p.b_pred;
  return doc.dump() + "\n";
}

ModelParams parse_model(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::SchemaError, "unsupported model format_version");
    }
    ModelParams p;
    const auto& enc = doc.at("encoder");
    const auto kind = enc.at("kind").get<std::string>();
    if (kind == "hashed_ngram") {
      p.encoder.kind = EncoderKind::HashedNgram;
    } else if (kind == "precomputed") {
      p.encoder.kind = EncoderKind::Precomputed;
    } else {
      throw Error(ErrorCode::SchemaError, "unknown encoder kind '" + kind + "'");
    }
    p.encoder.dim = enc.at("dim").get<std::size_t>();
    p.encoder.ngram_orders = enc.at("ngram_orders").get<std::vector<int>>();
    p.encoder.seed = enc.at("seed").get<std::uint64_t>();
    p.encoder.vectors_path = enc.value("vectors_path", std::string());

    const auto& dims = doc.at("dims");
    p.dims.d_ctx = dims.at("d_ctx").get<std::size_t>();
    p.dims.d_state = dims.at("d_state").get<std::size_t>();
    p.dims.d_hidden = dims.at("d_hidden").get<std::size_t>();
    p.dims.n_actions = dims.at("n_actions").get<std::size_t>();
    p.action_names = doc.value("action_names", std::vector<std::string>{});
    p.w_fuse = matrix_from_json(doc.at("w_fuse"), p.dims.d_hidden, p.dims.d_input(), "w_fuse");
    p.b_fuse = doc.at("b_fuse").get<std::vector<double>>();
    p.w_pred = matrix_from_json(doc.at("w_pred"), p.dims.n_actions, p.dims.d_hidden, "w_pred");
    p.b_pred = doc.at("b_pred").get<std::vector<double>>();
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("model file: ") + e.what());
  }
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
  write_file(path, serialize_model(params));
}

ModelParams load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

}  // namespace etadm
