#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vesselcast/layers.hpp"
#include "vesselcast/scaler.hpp"
#include "vesselcast/tensor.hpp"
#include "vesselcast/trajectory.hpp"

namespace vesselcast {

// Fixed sinusoidal position table:
//   S[pos, 2i]   = sin(pos / 10000^(2i/d))
//   S[pos, 2i+1] = cos(pos / 10000^(2i/d))
template <typename T>
nn::Tensor<T> sinusoidal_encoding(std::int64_t steps, std::int64_t d_model) {
  if (d_model % 2 != 0)
    throw ConfigError("sinusoidal_encoding: d_model must be even");
  nn::Tensor<T> table({steps, d_model});
  for (std::int64_t pos = 0; pos < steps; ++pos) {
    for (std::int64_t i = 0; 2 * i < d_model; ++i) {
      const double div = std::pow(
          10000.0, static_cast<double>(2 * i) / static_cast<double>(d_model));
      const double angle = static_cast<double>(pos) / div;
      table.data[pos * d_model + 2 * i] = static_cast<T>(std::sin(angle));
      table.data[pos * d_model + 2 * i + 1] = static_cast<T>(std::cos(angle));
    }
  }
  return table;
}

enum class ResampleMode { kAuto, kTransposedConv, kPool, kIdentity };
enum class EncodingMode { kHybrid, kSinusoidal };
enum class InputFeatures { kAll, kMain };

NLOHMANN_JSON_SERIALIZE_ENUM(ResampleMode,
                             {{ResampleMode::kAuto, "auto"},
                              {ResampleMode::kTransposedConv, "transposed-conv"},
                              {ResampleMode::kPool, "pool"},
                              {ResampleMode::kIdentity, "identity"}})
NLOHMANN_JSON_SERIALIZE_ENUM(EncodingMode,
                             {{EncodingMode::kHybrid, "hybrid"},
                              {EncodingMode::kSinusoidal, "sinusoidal"}})
NLOHMANN_JSON_SERIALIZE_ENUM(InputFeatures, {{InputFeatures::kAll, "all"},
                                             {InputFeatures::kMain, "main"}})

struct ModelConfig {
  std::int64_t w_in = 30;
  std::int64_t horizon = 90;
  std::int64_t d_model = 128;
  std::int64_t conv_layers = 2;
  std::int64_t conv_kernel = 3;
  std::int64_t encoder_layers = 4;
  std::int64_t heads = 8;
  std::int64_t d_ff = 256;
  double dropout = 0.1;
  ResampleMode resample = ResampleMode::kAuto;
  // ablation switches
  bool main_streams = true;    // causal conv + spatial projection
  bool physics_stream = true;  // dense over the derived physics features
  EncodingMode encoding = EncodingMode::kHybrid;
  InputFeatures input_features = InputFeatures::kAll;  // used without main streams
  std::uint64_t init_seed = 0;

  std::int64_t pe_capacity() const { return std::max(w_in, horizon); }

  ResampleMode effective_resample() const {
    if (resample != ResampleMode::kAuto) return resample;
    if (horizon > w_in) return ResampleMode::kTransposedConv;
    if (horizon < w_in) return ResampleMode::kPool;
    return ResampleMode::kIdentity;
  }

  void validate() const {
    if (w_in < 1 || horizon < 1) throw ConfigError("ModelConfig: bad window sizes");
    if (d_model < 2 || d_model % 2 != 0)
      throw ConfigError("ModelConfig: d_model must be even and >= 2");
    if (heads < 1 || d_model % heads != 0)
      throw ConfigError("ModelConfig: d_model must be divisible by heads");
    if (conv_layers < 1 || conv_kernel < 1)
      throw ConfigError("ModelConfig: conv stack needs >= 1 layer, kernel >= 1");
    if (encoder_layers < 1) throw ConfigError("ModelConfig: need encoder layers");
    if (dropout < 0.0 || dropout >= 1.0)
      throw ConfigError("ModelConfig: dropout must be in [0, 1)");
    const auto mode = effective_resample();
    if (mode == ResampleMode::kIdentity && horizon != w_in)
      throw ConfigError("ModelConfig: identity resampling needs horizon == w_in");
    if (mode == ResampleMode::kPool && horizon > w_in)
      throw ConfigError("ModelConfig: pooling cannot lengthen the sequence");
    if (mode == ResampleMode::kTransposedConv && horizon < w_in)
      throw ConfigError("ModelConfig: transposed conv cannot shorten the sequence");
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"w_in", c.w_in},
       {"horizon", c.horizon},
       {"d_model", c.d_model},
       {"conv_layers", c.conv_layers},
       {"conv_kernel", c.conv_kernel},
       {"encoder_layers", c.encoder_layers},
       {"heads", c.heads},
       {"d_ff", c.d_ff},
       {"dropout", c.dropout},
       {"resample", c.resample},
       {"main_streams", c.main_streams},
       {"physics_stream", c.physics_stream},
       {"encoding", c.encoding},
       {"input_features", c.input_features},
       {"init_seed", c.init_seed}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.w_in = j.value("w_in", c.w_in);
  c.horizon = j.value("horizon", c.horizon);
  c.d_model = j.value("d_model", c.d_model);
  c.conv_layers = j.value("conv_layers", c.conv_layers);
  c.conv_kernel = j.value("conv_kernel", c.conv_kernel);
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.heads = j.value("heads", c.heads);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.dropout = j.value("dropout", c.dropout);
  c.resample = j.value("resample", c.resample);
  c.main_streams = j.value("main_streams", c.main_streams);
  c.physics_stream = j.value("physics_stream", c.physics_stream);
  c.encoding = j.value("encoding", c.encoding);
  c.input_features = j.value("input_features", c.input_features);
  c.init_seed = j.value("init_seed", c.init_seed);
}

struct TimedPosition {
  double t = 0.0;
  geo::GeoPoint position;
};

struct PredictionResult {
  bool ok = false;
  std::string reason;  // "insufficient-history" when rejected
  std::vector<TimedPosition> points;
};

// Dual-stream trajectory forecaster: a causal-convolution + spatial-projection
// stream over the kinematic features and a dense stream over the physics
// features, fused by summation with hybrid positional encoding, followed by a
// transformer encoder stack, temporal resampling to the horizon, and a
// two-layer coordinate head.
template <typename T>
class ForecastModel {
 public:
  explicit ForecastModel(ModelConfig cfg, FeatureScaler scaler = {},
                         bool scaler_fitted = false)
      : cfg_(cfg), reg_(cfg.init_seed), scaler_(std::move(scaler)),
        scaler_fitted_(scaler_fitted) {
    cfg_.validate();
    const auto d = cfg_.d_model;

    if (cfg_.main_streams) {
      std::int64_t c_in = 4;
      for (std::int64_t l = 0; l < cfg_.conv_layers; ++l) {
        conv_stack_.emplace_back(reg_, "conv" + std::to_string(l), c_in, d,
                                 cfg_.conv_kernel, true);
        c_in = d;
      }
      spatial_proj_ = nn::Dense<T>(reg_, "spatial", 2, d, nn::Activation::kRelu);
    } else {
      const std::int64_t in_dim =
          cfg_.input_features == InputFeatures::kAll ? kFeatureCount : 4;
      input_proj_ = nn::Dense<T>(reg_, "input_proj", in_dim, d);
    }
    if (cfg_.physics_stream)
      physics_dense_ = nn::Dense<T>(reg_, "physics", 5, d, nn::Activation::kRelu);
    if (cfg_.encoding == EncodingMode::kHybrid)
      learned_pe_ = reg_.uniform_fan_in("pos_table", {cfg_.pe_capacity(), d}, d);
    sin_pe_ = nn::Var<T>(sinusoidal_encoding<T>(cfg_.w_in, d));

    for (std::int64_t l = 0; l < cfg_.encoder_layers; ++l)
      encoder_.emplace_back(reg_, "enc" + std::to_string(l), d, cfg_.heads,
                            cfg_.d_ff, cfg_.dropout);

    const auto mode = cfg_.effective_resample();
    if (mode == ResampleMode::kTransposedConv && cfg_.horizon > cfg_.w_in) {
      // stride = kernel = ceil(H / w_in): non-overlapping upsampling taps
      up_stride_ = (cfg_.horizon + cfg_.w_in - 1) / cfg_.w_in;
      up_w_ = reg_.uniform_fan_in("upsample.w", {up_stride_, d, d}, d);
      up_b_ = reg_.constant("upsample.b", {d}, T{0});
    } else if (mode == ResampleMode::kPool) {
      pool_window_ = std::max<std::int64_t>(1, cfg_.w_in / cfg_.horizon);
    }

    head_hidden_ = nn::Dense<T>(reg_, "head.hidden", d, d, nn::Activation::kRelu);
    head_out_ = nn::Dense<T>(reg_, "head.out", d, 2);
  }

  const ModelConfig& config() const { return cfg_; }
  std::vector<nn::Var<T>>& parameters() { return reg_.params(); }
  const std::vector<nn::Var<T>>& parameters() const { return reg_.params(); }
  std::int64_t total_weights() const { return reg_.total_weights(); }

  bool training_mode() const { return training_; }
  void set_training(bool on) { training_ = on; }

  const FeatureScaler& scaler() const { return scaler_; }
  bool scaler_fitted() const { return scaler_fitted_; }
  void set_scaler(FeatureScaler s) {
    scaler_ = std::move(s);
    scaler_fitted_ = true;
  }

  // Pre-encoder representation: fused streams plus positional encodings,
  // shaped [B, w_in, d_model].
  nn::Var<T> encode_inputs(const nn::Var<T>& x, const nn::Runtime& rt) const {
    (void)rt;
    if (x.value().rank() != 3 || x.value().dim(1) != cfg_.w_in ||
        x.value().dim(2) != kFeatureCount)
      throw ShapeError("encode_inputs: expected [B," + std::to_string(cfg_.w_in) +
                       "," + std::to_string(kFeatureCount) + "], got " +
                       nn::shape_str(x.value().shape));
    const std::int64_t B = x.value().dim(0);

    nn::Var<T> fused;
    if (cfg_.main_streams) {
      auto m = nn::select_cols(x, 0, 4);
      nn::Var<T> conv_out = m;
      for (const auto& layer : conv_stack_) conv_out = layer(conv_out);
      auto spatial = spatial_proj_(nn::select_cols(x, 0, 2));
      fused = nn::add(conv_out, spatial);
    } else {
      auto sel = cfg_.input_features == InputFeatures::kAll
                     ? x
                     : nn::select_cols(x, 0, 4);
      fused = input_proj_(sel);
    }
    fused = nn::add_rows(fused, sin_pe_);
    if (cfg_.encoding == EncodingMode::kHybrid)
      fused = nn::add(fused, nn::embedding_rows(learned_pe_, B, cfg_.w_in));
    if (cfg_.physics_stream) {
      auto p = nn::select_cols(x, 4, 5);
      fused = nn::add(fused, physics_dense_(p));
    }
    return fused;
  }

  // Full forward pass: [B, w_in, 9] normalized features in, [B, H, 2]
  // normalized coordinates out.
  nn::Var<T> forward_batch(const nn::Tensor<T>& x, const nn::Runtime& rt) const {
    return forward(nn::Var<T>(x), rt);
  }

  nn::Var<T> forward(const nn::Var<T>& x, const nn::Runtime& rt) const {
    auto h = encode_inputs(x, rt);
    for (const auto& block : encoder_) h = block(h, rt);
    h = resample(h);
    return head_out_(head_hidden_(h));
  }

  // Denormalizes a forward pass over the trailing w_in points of a history.
  PredictionResult predict_trajectory(
      std::span<const TrajectoryPoint> window) const {
    PredictionResult res;
    if (training_)
      throw StateError("predict_trajectory: model is in training mode");
    if (!scaler_fitted_)
      throw StateError("predict_trajectory: scaler not fitted");
    if (static_cast<std::int64_t>(window.size()) != cfg_.w_in) {
      res.reason = "insufficient-history";
      return res;
    }
    nn::Tensor<T> x({1, cfg_.w_in, kFeatureCount});
    for (std::int64_t i = 0; i < cfg_.w_in; ++i)
      for (int f = 0; f < kFeatureCount; ++f)
        x.data[i * kFeatureCount + f] =
            static_cast<T>(scaler_.transform(f, window[i].feature(f)));

    nn::NoGradGuard no_grad;
    nn::Runtime rt{false, nullptr};
    auto y = forward_batch(x, rt);
    const double anchor_t = window.back().t;
    res.points.reserve(static_cast<std::size_t>(cfg_.horizon));
    for (std::int64_t k = 0; k < cfg_.horizon; ++k) {
      TimedPosition p;
      p.t = anchor_t + static_cast<double>(k + 1) * kSampleIntervalS;
      p.position.lon =
          scaler_.inverse(kLon, static_cast<double>(y.value().data[k * 2 + 0]));
      p.position.lat =
          scaler_.inverse(kLat, static_cast<double>(y.value().data[k * 2 + 1]));
      res.points.push_back(p);
    }
    res.ok = true;
    return res;
  }

 private:
  nn::Var<T> resample(const nn::Var<T>& h) const {
    switch (cfg_.effective_resample()) {
      case ResampleMode::kIdentity:
        return h;
      case ResampleMode::kTransposedConv:
        return nn::crop_time(nn::conv1d_transpose(h, up_w_, up_b_, up_stride_),
                             cfg_.horizon);
      case ResampleMode::kPool:
        return nn::crop_time(nn::avg_pool1d(h, pool_window_, pool_window_),
                             cfg_.horizon);
      case ResampleMode::kAuto:
        break;
    }
    throw StateError("resample: unresolved mode");
  }

  ModelConfig cfg_;
  nn::ParamRegistry<T> reg_;
  FeatureScaler scaler_;
  bool scaler_fitted_ = false;
  bool training_ = false;

  std::vector<nn::CausalConv1d<T>> conv_stack_;
  nn::Dense<T> spatial_proj_;
  nn::Dense<T> input_proj_;
  nn::Dense<T> physics_dense_;
  nn::Var<T> learned_pe_;
  nn::Var<T> sin_pe_;
  std::vector<nn::EncoderBlock<T>> encoder_;
  nn::Var<T> up_w_, up_b_;
  std::int64_t up_stride_ = 0;
  std::int64_t pool_window_ = 0;
  nn::Dense<T> head_hidden_;
  nn::Dense<T> head_out_;
};

}  // namespace vesselcast
