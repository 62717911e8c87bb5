#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vesselcast/model.hpp"
#include "vesselcast/train.hpp"

namespace vesselcast::checkpoint {

// Single-file container:
//   bytes 0-7   magic "VCCKPT01"
//   u64 LE      config JSON length, then the bytes
//               (model config, scaler, format_version)
//   u64 LE      history JSON length, then the bytes
//   u32 LE      parameter count, then per parameter:
//               u32 name length + name bytes, u32 ndim, ndim x u64 dims,
//               float32 LE data
// The config block is parsed and validated before any weight bytes are read.
inline constexpr std::array<char, 8> kMagic = {'V', 'C', 'C', 'K',
                                               'P', 'T', '0', '1'};

namespace detail {

inline void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("checkpoint: truncated file");
  return v;
}
inline std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("checkpoint: truncated file");
  return v;
}
inline std::string read_bytes(std::ifstream& in, std::size_t n) {
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw IoError("checkpoint: truncated file");
  return s;
}

}  // namespace detail

template <typename T>
void save(const ForecastModel<T>& model, const nn::TrainHistory& history,
          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot write " + path);
  out.write(kMagic.data(), kMagic.size());

  nlohmann::json config;
  config["format_version"] = 1;
  config["model"] = model.config();
  config["scaler_fitted"] = model.scaler_fitted();
  config["scaler"] = model.scaler().to_json();
  const std::string config_bytes = config.dump();
  detail::write_u64(out, config_bytes.size());
  out.write(config_bytes.data(), static_cast<std::streamsize>(config_bytes.size()));

  const std::string history_bytes = history.to_json().dump();
  detail::write_u64(out, history_bytes.size());
  out.write(history_bytes.data(),
            static_cast<std::streamsize>(history_bytes.size()));

  const auto& params = model.parameters();
  detail::write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    detail::write_u32(out, static_cast<std::uint32_t>(p.name().size()));
    out.write(p.name().data(), static_cast<std::streamsize>(p.name().size()));
    detail::write_u32(out, static_cast<std::uint32_t>(p.value().rank()));
    for (auto d : p.value().shape)
      detail::write_u64(out, static_cast<std::uint64_t>(d));
    std::vector<float> buf(p.value().data.size());
    for (std::size_t i = 0; i < buf.size(); ++i)
      buf[i] = static_cast<float>(p.value().data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw IoError("checkpoint: write failed for " + path);
}

struct Loaded {
  ForecastModel<float> model;
  nn::TrainHistory history;
};

inline Loaded load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic)
    throw SchemaError("checkpoint: not-a-checkpoint: bad magic in " + path);

  const auto config_len = detail::read_u64(in);
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(detail::read_bytes(in, config_len));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("checkpoint: bad config json: ") + e.what());
  }
  if (config.value("format_version", -1) != 1)
    throw SchemaError("checkpoint: unsupported format version");
  ModelConfig mc = config.at("model").get<ModelConfig>();
  mc.validate();  // reject tampered configs before touching weights
  FeatureScaler scaler = FeatureScaler::from_json(config.at("scaler"));
  const bool fitted = config.value("scaler_fitted", false);

  const auto history_len = detail::read_u64(in);
  nn::TrainHistory history =
      nn::TrainHistory::from_json(nlohmann::json::parse(detail::read_bytes(in, history_len)));

  ForecastModel<float> model(mc, std::move(scaler), fitted);
  auto& params = model.parameters();
  const auto count = detail::read_u32(in);
  if (count != params.size())
    throw SchemaError("checkpoint: parameter count mismatch");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = detail::read_u32(in);
    const std::string name = detail::read_bytes(in, name_len);
    if (name != params[i].name())
      throw SchemaError("checkpoint: unexpected parameter " + name);
    const auto ndim = detail::read_u32(in);
    nn::Shape shape(ndim);
    for (auto& d : shape)
      d = static_cast<std::int64_t>(detail::read_u64(in));
    if (shape != params[i].value().shape)
      throw SchemaError("checkpoint: shape mismatch for " + name);
    std::vector<float> buf(static_cast<std::size_t>(nn::shape_numel(shape)));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw IoError("checkpoint: truncated weights for " + name);
    params[i].value_mut().data = std::move(buf);
  }
  return {std::move(model), std::move(history)};
}

}  // namespace vesselcast::checkpoint
