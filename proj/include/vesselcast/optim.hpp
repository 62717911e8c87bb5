#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "vesselcast/autograd.hpp"
#include "vesselcast/tensor.hpp"

namespace vesselcast::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard bias-corrected Adam. State is owned here; parameters are updated
// in place in registration order.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Var<T>>& params, AdamConfig cfg = {})
      : params_(&params), cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (auto& p : params) {
      m_.push_back(Tensor<T>::zeros(p.value().shape));
      v_.push_back(Tensor<T>::zeros(p.value().shape));
    }
  }

  double& lr() { return cfg_.lr; }
  std::int64_t steps() const { return step_; }

  void zero_grad() {
    for (auto& p : *params_) p.zero_grad();
  }

  void step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params_->size(); ++i) {
      auto& p = (*params_)[i];
      const auto& g = p.grad();
      auto& value = p.value_mut();
      auto& m = m_[i];
      auto& v = v_[i];
      const bool has_grad = g.numel() != 0;
      for (std::int64_t j = 0; j < value.numel(); ++j) {
        const double gj = has_grad ? static_cast<double>(g.data[j]) : 0.0;
        if (!std::isfinite(gj))
          throw InvalidInput("Adam: non-finite gradient in parameter " +
                             p.name());
        double mj = static_cast<double>(m.data[j]);
        double vj = static_cast<double>(v.data[j]);
        mj = cfg_.beta1 * mj + (1.0 - cfg_.beta1) * gj;
        vj = cfg_.beta2 * vj + (1.0 - cfg_.beta2) * gj * gj;
        m.data[j] = static_cast<T>(mj);
        v.data[j] = static_cast<T>(vj);
        const double mhat = mj / bc1;
        const double vhat = vj / bc2;
        value.data[j] -=
            static_cast<T>(cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    }
  }

 private:
  std::vector<Var<T>>* params_;
  AdamConfig cfg_;
  std::vector<Tensor<T>> m_, v_;
  std::int64_t step_ = 0;
};

}  // namespace vesselcast::nn
