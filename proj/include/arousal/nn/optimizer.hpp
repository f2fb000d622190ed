#pragma once

#include "arousal/nn/tensor.hpp"

#include <cmath>
#include <cstdint>

namespace arousal::nn {

struct OptimizerConfig {
  enum class Kind { sgd, adam };

  Kind kind = Kind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Index batch_size = 32;
  Index max_epochs = 300;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw DataError("optimizer: learning rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) throw DataError("optimizer: betas must be in (0, 1)");
    if (batch_size < 1 || max_epochs < 1) throw DataError("optimizer: batch size and max epochs must be >= 1");
  }
};

/// SGD or bias-corrected Adam over a fixed parameter list. Moment buffers are
/// created on the first step.
template <typename Scalar>
class Optimizer {
 public:
  Optimizer(ParameterList<Scalar> params, OptimizerConfig config) : params_(std::move(params)), config_(config) {
    config_.validate();
  }

  /// Applies one update from the accumulated gradients. Throws DataError on a
  /// non-finite gradient, leaving every parameter untouched.
  void step() {
    for (const auto* p : params_)
      if (!p->grad.all_finite()) throw DataError("non-finite gradient in parameter '" + p->name + "'");
    if (config_.kind == OptimizerConfig::Kind::sgd) {
      for (auto* p : params_) p->value.data() -= Scalar(config_.learning_rate) * p->grad.data();
      ++steps_;
      return;
    }
    if (first_.empty()) {
      for (const auto* p : params_) {
        first_.push_back(VectorX<Scalar>::Zero(p->value.size()));
        second_.push_back(VectorX<Scalar>::Zero(p->value.size()));
      }
    }
    ++steps_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    const auto b1 = Scalar(config_.beta1), b2 = Scalar(config_.beta2);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      const auto& g = params_[k]->grad.data();
      first_[k] = b1 * first_[k] + (Scalar(1) - b1) * g;
      second_[k] = b2 * second_[k] + (Scalar(1) - b2) * g.cwiseAbs2();
      const auto m_hat = first_[k].array() / Scalar(c1);
      const auto v_hat = second_[k].array() / Scalar(c2);
      params_[k]->value.data().array() -= Scalar(config_.learning_rate) * m_hat / (v_hat.sqrt() + Scalar(config_.epsilon));
    }
  }

  void zero_grad() { nn::zero_grad(params_); }
  std::int64_t steps() const { return steps_; }
  const OptimizerConfig& config() const { return config_; }

 private:
  ParameterList<Scalar> params_;
  OptimizerConfig config_;
  std::vector<VectorX<Scalar>> first_, second_;
  std::int64_t steps_ = 0;
};

}  // namespace arousal::nn
