#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <json.hpp>

#include "vesselcast/layers.hpp"
#include "vesselcast/optim.hpp"
#include "vesselcast/windowing.hpp"

namespace vesselcast::nn {

struct TrainConfig {
  std::size_t max_epochs = 100;
  std::size_t batch_size = 64;
  AdamConfig adam;
  std::size_t stop_patience = 10;    // early stopping on validation MSE
  std::size_t plateau_patience = 5;  // halve the LR after this many flat epochs
  double plateau_factor = 0.5;
  bool checkpoint_best = true;  // restore best-validation weights at the end
  std::uint64_t seed = 0;
  std::size_t log_every = 0;  // 0 = silent

  void validate() const {
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (stop_patience < 1 || plateau_patience < 1)
      throw ConfigError("TrainConfig: patiences must be >= 1");
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"max_epochs", c.max_epochs},
       {"batch_size", c.batch_size},
       {"lr", c.adam.lr},
       {"beta1", c.adam.beta1},
       {"beta2", c.adam.beta2},
       {"eps", c.adam.eps},
       {"stop_patience", c.stop_patience},
       {"plateau_patience", c.plateau_patience},
       {"plateau_factor", c.plateau_factor},
       {"checkpoint_best", c.checkpoint_best},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.adam.lr = j.value("lr", c.adam.lr);
  c.adam.beta1 = j.value("beta1", c.adam.beta1);
  c.adam.beta2 = j.value("beta2", c.adam.beta2);
  c.adam.eps = j.value("eps", c.adam.eps);
  c.stop_patience = j.value("stop_patience", c.stop_patience);
  c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
  c.plateau_factor = j.value("plateau_factor", c.plateau_factor);
  c.checkpoint_best = j.value("checkpoint_best", c.checkpoint_best);
  c.seed = j.value("seed", c.seed);
}

struct EpochStats {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_mse = 0.0;
  double train_mae = 0.0;
  double val_mse = 0.0;
  double val_mae = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
  bool aborted_non_finite = false;

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : epochs)
      rows.push_back({{"epoch", e.epoch},
                      {"lr", e.lr},
                      {"train_mse", e.train_mse},
                      {"train_mae", e.train_mae},
                      {"val_mse", e.val_mse},
                      {"val_mae", e.val_mae}});
    return {{"epochs", rows},
            {"best_epoch", best_epoch},
            {"stopped_early", stopped_early},
            {"aborted_non_finite", aborted_non_finite}};
  }

  static TrainHistory from_json(const nlohmann::json& j) {
    TrainHistory h;
    for (const auto& r : j.value("epochs", nlohmann::json::array())) {
      EpochStats e;
      e.epoch = r.value("epoch", std::size_t{0});
      e.lr = r.value("lr", 0.0);
      e.train_mse = r.value("train_mse", 0.0);
      e.train_mae = r.value("train_mae", 0.0);
      e.val_mse = r.value("val_mse", 0.0);
      e.val_mae = r.value("val_mae", 0.0);
      h.epochs.push_back(e);
    }
    h.best_epoch = j.value("best_epoch", std::size_t{0});
    h.stopped_early = j.value("stopped_early", false);
    h.aborted_non_finite = j.value("aborted_non_finite", false);
    return h;
  }
};

namespace detail {

// Packs window pairs [first, last) into batch tensors.
template <typename T>
void pack_batch(const std::vector<WindowPair>& windows,
                const std::vector<std::size_t>& order, std::size_t first,
                std::size_t last, Tensor<T>& x, Tensor<T>& y) {
  const std::size_t b = last - first;
  const auto& ref = windows[order[first]];
  x = Tensor<T>({static_cast<std::int64_t>(b),
                 static_cast<std::int64_t>(ref.w_in), kFeatureCount});
  y = Tensor<T>({static_cast<std::int64_t>(b),
                 static_cast<std::int64_t>(ref.w_out), 2});
  for (std::size_t i = 0; i < b; ++i) {
    const auto& w = windows[order[first + i]];
    for (std::size_t k = 0; k < w.x.size(); ++k)
      x.data[i * w.x.size() + k] = static_cast<T>(w.x[k]);
    for (std::size_t k = 0; k < w.y.size(); ++k)
      y.data[i * w.y.size() + k] = static_cast<T>(w.y[k]);
  }
}

}  // namespace detail

// Evaluates mean MSE/MAE of a model over windows without recording a graph.
template <typename T, typename Model>
std::pair<double, double> evaluate_windows(Model& model,
                                           const std::vector<WindowPair>& windows,
                                           std::size_t batch_size) {
  NoGradGuard no_grad;
  Runtime rt{false, nullptr};
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double mse = 0.0, mae = 0.0;
  std::size_t count = 0;
  for (std::size_t first = 0; first < windows.size(); first += batch_size) {
    const std::size_t last = std::min(windows.size(), first + batch_size);
    Tensor<T> x, y;
    detail::pack_batch(windows, order, first, last, x, y);
    auto pred = model.forward_batch(x, rt);
    const std::size_t b = last - first;
    mse += static_cast<double>(mse_of(pred.value(), y)) * static_cast<double>(b);
    mae += static_cast<double>(mae_of(pred.value(), y)) * static_cast<double>(b);
    count += b;
  }
  if (count == 0) return {0.0, 0.0};
  return {mse / static_cast<double>(count), mae / static_cast<double>(count)};
}

// Mini-batch training loop with seeded shuffling, validation monitoring,
// ReduceLROnPlateau, early stopping and best-weights restoration. A
// non-finite training loss aborts and keeps the best weights seen so far.
template <typename T, typename Model>
TrainHistory fit(Model& model, const std::vector<WindowPair>& train_windows,
                 const std::vector<WindowPair>& val_windows,
                 const TrainConfig& cfg) {
  cfg.validate();
  if (train_windows.empty() || val_windows.empty())
    throw InvalidInput("fit: train and validation sets must be non-empty");

  auto& params = model.parameters();
  Adam<T> opt(params, cfg.adam);
  std::mt19937_64 rng(cfg.seed);
  Runtime rt{true, &rng};

  TrainHistory history;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Tensor<T>> best_weights;
  auto snapshot = [&] {
    best_weights.clear();
    for (auto& p : params) best_weights.push_back(p.value());
  };
  auto restore = [&] {
    if (best_weights.empty()) return;
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i].value_mut() = best_weights[i];
  };
  snapshot();

  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t flat_epochs = 0;  // epochs since the last validation improvement

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double train_mse = 0.0, train_mae = 0.0;
    std::size_t seen = 0;
    bool non_finite = false;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t last = std::min(order.size(), first + cfg.batch_size);
      Tensor<T> x, y;
      detail::pack_batch(train_windows, order, first, last, x, y);
      auto pred = model.forward_batch(x, rt);
      auto loss = mse_loss(pred, y);
      const double batch_mse = static_cast<double>(loss.value().data[0]);
      if (!std::isfinite(batch_mse)) {
        non_finite = true;
        break;
      }
      const std::size_t b = last - first;
      train_mse += batch_mse * static_cast<double>(b);
      train_mae +=
          static_cast<double>(mae_of(pred.value(), y)) * static_cast<double>(b);
      seen += b;
      opt.zero_grad();
      loss.backward();
      opt.step();
    }
    if (non_finite) {
      history.aborted_non_finite = true;
      break;
    }

    auto [val_mse, val_mae] =
        evaluate_windows<T>(model, val_windows, cfg.batch_size);
    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = opt.lr();
    stats.train_mse = train_mse / static_cast<double>(std::max<std::size_t>(seen, 1));
    stats.train_mae = train_mae / static_cast<double>(std::max<std::size_t>(seen, 1));
    stats.val_mse = val_mse;
    stats.val_mae = val_mae;
    history.epochs.push_back(stats);
    if (cfg.log_every && (epoch % cfg.log_every == 0))
      std::fprintf(stderr, "epoch %3zu  lr %.2e  train_mse %.6e  val_mse %.6e\n",
                   epoch, stats.lr, stats.train_mse, stats.val_mse);

    if (val_mse < best_val) {
      best_val = val_mse;
      history.best_epoch = epoch;
      flat_epochs = 0;
      if (cfg.checkpoint_best) snapshot();
    } else {
      ++flat_epochs;
      if (flat_epochs % cfg.plateau_patience == 0)
        opt.lr() *= cfg.plateau_factor;
      if (flat_epochs >= cfg.stop_patience) {
        history.stopped_early = true;
        break;
      }
    }
  }

  if (cfg.checkpoint_best) restore();
  return history;
}

}  // namespace vesselcast::nn
