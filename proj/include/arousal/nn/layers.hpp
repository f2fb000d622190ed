#pragma once

#include "arousal/nn/tensor.hpp"

#include <cmath>
#include <random>

namespace arousal::nn {

/// Spatial size of a feature map; activations are stored channel-major as a
/// (channels x height*width) row-major matrix.
struct Extent {
  Index height = 0;
  Index width = 0;

  Index area() const { return height * width; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

inline constexpr Index kKernel = 5;

inline Extent conv_output(Extent in) { return {in.height - kKernel + 1, in.width - kKernel + 1}; }
inline Extent pool_output(Extent in) { return {in.height / 2, in.width / 2}; }

/// He-uniform fill: U(-sqrt(6 / fan_in), sqrt(6 / fan_in)).
template <typename Scalar>
void he_uniform(Tensor<Scalar>& t, Index fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Index k = 0; k < t.size(); ++k) t[k] = static_cast<Scalar>(dist(rng));
}

/// Valid 5x5 cross-correlation with stride 1.
///
/// Each of the 25 kernel taps is applied as one GEMM of the
/// (out x in) tap matrix against a shifted view of the input rows. The
/// product is taken over full input rows, so every output row carries
/// `kKernel - 1` junk columns that are dropped afterwards; this avoids an
/// im2col copy entirely.
template <typename Scalar>
class Conv2d {
 public:
  using Mat = MatrixX<Scalar>;
  using TapMap = Eigen::Map<Mat, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
  using ConstTapMap = Eigen::Map<const Mat, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

  Conv2d() = default;
  Conv2d(std::string name, Index in_channels, Index out_channels)
      : weight(name + ".weight", {out_channels, in_channels, kKernel, kKernel}),
        bias(name + ".bias", {out_channels}),
        in_(in_channels),
        out_(out_channels) {}

  Index in_channels() const { return in_; }
  Index out_channels() const { return out_; }

  void init(std::mt19937_64& rng) {
    he_uniform(weight.value, in_ * kKernel * kKernel, rng);
    bias.value.set_zero();
  }

  void forward(const Mat& x, Extent in, Mat& y) const {
    check_input(x, in);
    const Extent o = conv_output(in);
    const Index span = o.height * in.width - (kKernel - 1);
    Mat full = Mat::Zero(out_, o.height * in.width);
    for (Index ky = 0; ky < kKernel; ++ky)
      for (Index kx = 0; kx < kKernel; ++kx)
        full.leftCols(span).noalias() += tap(weight.value, ky, kx) * x.middleCols(ky * in.width + kx, span);
    y.resize(out_, o.area());
    const auto b = bias.value.data();
    for (Index r = 0; r < o.height; ++r)
      y.middleCols(r * o.width, o.width) = full.middleCols(r * in.width, o.width).colwise() + b;
  }

  /// Accumulates parameter gradients; writes the input gradient when `dx` is set.
  void backward(const Mat& x, Extent in, const Mat& dy, Mat* dx) {
    const Extent o = conv_output(in);
    if (dy.rows() != out_ || dy.cols() != o.area()) throw ShapeError("conv2d backward: gradient shape mismatch");
    const Index span = o.height * in.width - (kKernel - 1);
    Mat full = Mat::Zero(out_, o.height * in.width);
    for (Index r = 0; r < o.height; ++r) full.middleCols(r * in.width, o.width) = dy.middleCols(r * o.width, o.width);
    bias.grad.data() += dy.rowwise().sum();
    if (dx) *dx = Mat::Zero(in_, in.area());
    for (Index ky = 0; ky < kKernel; ++ky) {
      for (Index kx = 0; kx < kKernel; ++kx) {
        const Index offset = ky * in.width + kx;
        TapMap g = tap(weight.grad, ky, kx);
        g.noalias() += full.leftCols(span) * x.middleCols(offset, span).transpose();
        if (dx) dx->middleCols(offset, span).noalias() += tap(weight.value, ky, kx).transpose() * full.leftCols(span);
      }
    }
  }

  Parameter<Scalar> weight;
  Parameter<Scalar> bias;

 private:
  TapMap tap(Tensor<Scalar>& t, Index ky, Index kx) const {
    return TapMap(t.data().data() + ky * kKernel + kx, out_, in_,
                  Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(in_ * kKernel * kKernel, kKernel * kKernel));
  }
  ConstTapMap tap(const Tensor<Scalar>& t, Index ky, Index kx) const {
    return ConstTapMap(t.data().data() + ky * kKernel + kx, out_, in_,
                       Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(in_ * kKernel * kKernel, kKernel * kKernel));
  }
  void check_input(const Mat& x, Extent in) const {
    if (x.rows() != in_ || x.cols() != in.area()) throw ShapeError("conv2d: input shape mismatch");
    if (in.height < kKernel || in.width < kKernel) throw ShapeError("conv2d: input smaller than the 5x5 kernel");
  }

  Index in_ = 0;
  Index out_ = 0;
};

/// Non-overlapping 2x2 max pooling; odd trailing rows/columns are dropped.
/// `argmax` records the winning input index per output cell (first on ties).
template <typename Scalar>
void maxpool2x2_forward(const MatrixX<Scalar>& x, Extent in, MatrixX<Scalar>& y, std::vector<Index>& argmax) {
  if (in.height < 2 || in.width < 2) throw ShapeError("maxpool2x2: input must be at least 2x2");
  if (x.cols() != in.area()) throw ShapeError("maxpool2x2: input shape mismatch");
  const Extent o = pool_output(in);
  y.resize(x.rows(), o.area());
  argmax.resize(static_cast<std::size_t>(x.rows() * o.area()));
  for (Index c = 0; c < x.rows(); ++c) {
    for (Index i = 0; i < o.height; ++i) {
      for (Index j = 0; j < o.width; ++j) {
        Index best = (2 * i) * in.width + 2 * j;
        for (const Index cand : {best + 1, best + in.width, best + in.width + 1})
          if (x(c, cand) > x(c, best)) best = cand;
        y(c, i * o.width + j) = x(c, best);
        argmax[static_cast<std::size_t>(c * o.area() + i * o.width + j)] = best;
      }
    }
  }
}

template <typename Scalar>
MatrixX<Scalar> maxpool2x2_backward(const MatrixX<Scalar>& dy, const std::vector<Index>& argmax, Extent in) {
  MatrixX<Scalar> dx = MatrixX<Scalar>::Zero(dy.rows(), in.area());
  for (Index c = 0; c < dy.rows(); ++c)
    for (Index k = 0; k < dy.cols(); ++k) dx(c, argmax[static_cast<std::size_t>(c * dy.cols() + k)]) += dy(c, k);
  return dx;
}

/// Affine map y = W x + b.
template <typename Scalar>
class Dense {
 public:
  Dense() = default;
  Dense(std::string name, Index in, Index out)
      : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}) {}

  Index in_features() const { return weight.value.shape()[1]; }
  Index out_features() const { return weight.value.shape()[0]; }

  void init(std::mt19937_64& rng) {
    he_uniform(weight.value, in_features(), rng);
    bias.value.set_zero();
  }

  VectorX<Scalar> forward(const VectorX<Scalar>& x) const {
    if (x.size() != in_features()) throw ShapeError("dense: input length mismatch");
    return weight.value.matrix(out_features(), in_features()) * x + bias.value.data();
  }

  /// Accumulates parameter gradients and returns dL/dx.
  VectorX<Scalar> backward(const VectorX<Scalar>& x, const VectorX<Scalar>& dy) {
    if (dy.size() != out_features() || x.size() != in_features()) throw ShapeError("dense backward: shape mismatch");
    weight.grad.matrix(out_features(), in_features()).noalias() += dy * x.transpose();
    bias.grad.data() += dy;
    return weight.value.matrix(out_features(), in_features()).transpose() * dy;
  }

  Parameter<Scalar> weight;
  Parameter<Scalar> bias;
};

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

/// Gradient through ReLU given its output: passes where the output is > 0.
template <typename DerivedG, typename DerivedA>
auto relu_backward(const Eigen::MatrixBase<DerivedG>& grad, const Eigen::MatrixBase<DerivedA>& activated) {
  using Scalar = typename DerivedG::Scalar;
  return (activated.array() > Scalar(0)).select(grad, Scalar(0));
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> softmax(const Eigen::Matrix<Scalar, 2, 1>& logits) {
  const Scalar m = logits.maxCoeff();
  Eigen::Matrix<Scalar, 2, 1> e = (logits.array() - m).exp();
  return e / e.sum();
}

template <typename Scalar>
struct LossAndGrad {
  Scalar loss;
  Eigen::Matrix<Scalar, 2, 1> grad;
};

/// -log softmax(logits)[target] with max subtraction; gradient softmax - onehot.
template <typename Scalar>
LossAndGrad<Scalar> softmax_nll(const Eigen::Matrix<Scalar, 2, 1>& logits, int target) {
  const Scalar m = logits.maxCoeff();
  const Eigen::Matrix<Scalar, 2, 1> shifted = logits.array() - m;
  const Scalar log_z = std::log(shifted.array().exp().sum());
  LossAndGrad<Scalar> out;
  out.loss = log_z - shifted(target);
  out.grad = (shifted.array() - log_z).exp();
  out.grad(target) -= Scalar(1);
  return out;
}

}  // namespace arousal::nn
