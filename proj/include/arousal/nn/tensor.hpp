#pragma once

#include "arousal/common.hpp"

#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace arousal::nn {

/// Dense row-major array with an explicit shape.
template <typename Scalar>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<Index> shape)
      : shape_(std::move(shape)), data_(VectorX<Scalar>::Zero(element_count(shape_))) {}

  static Index element_count(const std::vector<Index>& shape) {
    return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
  }

  const std::vector<Index>& shape() const { return shape_; }
  Index size() const { return data_.size(); }
  VectorX<Scalar>& data() { return data_; }
  const VectorX<Scalar>& data() const { return data_; }
  Scalar& operator[](Index k) { return data_(k); }
  Scalar operator[](Index k) const { return data_(k); }

  Eigen::Map<MatrixX<Scalar>> matrix(Index rows, Index cols) {
    check(rows, cols);
    return {data_.data(), rows, cols};
  }
  Eigen::Map<const MatrixX<Scalar>> matrix(Index rows, Index cols) const {
    check(rows, cols);
    return {data_.data(), rows, cols};
  }

  void set_zero() { data_.setZero(); }
  bool all_finite() const { return data_.allFinite(); }

 private:
  void check(Index rows, Index cols) const {
    if (rows * cols != data_.size()) throw ShapeError("tensor view does not match element count");
  }

  std::vector<Index> shape_;
  VectorX<Scalar> data_;
};

/// A trainable tensor and its gradient accumulator.
template <typename Scalar>
struct Parameter {
  std::string name;
  Tensor<Scalar> value;
  Tensor<Scalar> grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<Index> shape) : name(std::move(n)), value(shape), grad(shape) {}
};

template <typename Scalar>
using ParameterList = std::vector<Parameter<Scalar>*>;

template <typename Scalar>
Index parameter_count(const ParameterList<Scalar>& params) {
  Index n = 0;
  for (const auto* p : params) n += p->value.size();
  return n;
}

template <typename Scalar>
void zero_grad(const ParameterList<Scalar>& params) {
  for (auto* p : params) p->grad.set_zero();
}

}  // namespace arousal::nn
