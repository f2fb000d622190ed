#pragma once

#include "arousal/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace arousal::nn {

/// Loss value plus a fingerprint of every piecewise decision (ReLU masks,
/// pooling winners) taken while computing it.
struct Evaluation {
  double loss = 0.0;
  std::uint64_t signature = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  Index checked = 0;
  /// Draws rejected because the perturbation crossed a ReLU or pooling kink.
  Index skipped_kinks = 0;
  /// Per-parameter count of checked entries, in parameter-list order.
  std::vector<Index> per_parameter;
};

/// Central-difference check of analytic gradients.
///
/// `analytic()` must zero and then fill every `Parameter::grad`;
/// `evaluate()` returns the loss at the current parameter values. Entries are
/// drawn uniformly within each parameter tensor, `min_per_parameter` from each
/// (or all of them when smaller) and at least `min_total` overall. A draw whose
/// +-h evaluation changes the decision signature is rejected and redrawn.
/// The error of one entry is |analytic - numeric| / max(|numeric|, 1e-6).
template <typename Scalar, typename AnalyticFn, typename EvaluateFn>
GradCheckResult finite_diff_check(const ParameterList<Scalar>& params, AnalyticFn&& analytic, EvaluateFn&& evaluate,
                                  double h = 1e-5, Index min_total = 200, Index min_per_parameter = 8,
                                  std::uint64_t seed = 0) {
  analytic();
  const Evaluation base = evaluate();

  std::vector<Index> quota(params.size());
  Index total = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    quota[k] = std::min(params[k]->value.size(), min_per_parameter);
    total += quota[k];
  }
  // Spread the remainder over the tensors that still have unchecked entries.
  for (std::size_t k = 0; total < min_total; k = (k + 1) % params.size()) {
    bool any = false;
    for (std::size_t j = 0; j < params.size(); ++j) any = any || quota[j] < params[j]->value.size();
    if (!any) break;
    if (quota[k] < params[k]->value.size()) {
      ++quota[k];
      ++total;
    }
  }

  GradCheckResult result;
  result.per_parameter.assign(params.size(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k]->value;
    std::vector<Index> order(static_cast<std::size_t>(value.size()));
    for (Index i = 0; i < value.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (const Index idx : order) {
      if (result.per_parameter[k] >= quota[k]) break;
      const Scalar saved = value[idx];
      value[idx] = saved + Scalar(h);
      const Evaluation plus = evaluate();
      value[idx] = saved - Scalar(h);
      const Evaluation minus = evaluate();
      value[idx] = saved;
      if (plus.signature != base.signature || minus.signature != base.signature) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (plus.loss - minus.loss) / (2.0 * h);
      const double exact = static_cast<double>(params[k]->grad[idx]);
      const double err = std::abs(exact - numeric) / std::max(std::abs(numeric), 1e-6);
      result.max_relative_error = std::max(result.max_relative_error, err);
      ++result.per_parameter[k];
      ++result.checked;
    }
  }
  return result;
}

/// FNV-1a style accumulator used to build decision signatures.
class SignatureHasher {
 public:
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      state_ ^= (v >> (8 * b)) & 0xffu;
      state_ *= 0x100000001b3ull;
    }
  }
  template <typename Derived>
  void add_mask(const Eigen::MatrixBase<Derived>& m) {
    std::uint64_t word = 0;
    int bits = 0;
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        word = (word << 1) | (m(i, j) > 0 ? 1u : 0u);
        if (++bits == 64) {
          add(word);
          word = 0;
          bits = 0;
        }
      }
    }
    add(word);
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

}  // namespace arousal::nn
