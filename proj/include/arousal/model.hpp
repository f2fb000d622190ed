#pragma once

#include "arousal/common.hpp"
#include "arousal/ingest.hpp"
#include "arousal/nn/gradcheck.hpp"
#include "arousal/nn/layers.hpp"
#include "arousal/nn/tensor.hpp"
#include "arousal/windows.hpp"

#include <array>
#include <cstdint>
#include <random>

namespace arousal {

inline constexpr std::array<Index, 3> kConvFilters{8, 12, 16};
inline constexpr Index kHiddenUnits = 64;

struct NetConfig {
  Index frames = 15;
  Resolution resolution{};
  Index mfcc_length = 165;
  Modality modality = Modality::both;
  Mode mode = Mode::classifier;
  std::uint64_t seed = 0;

  /// Frame count and MFCC length implied by a window of `window_s` seconds.
  static NetConfig for_window(double window_s, double fps, Resolution res, Modality modality, Mode mode,
                              std::uint64_t seed = 0);
};

/// Spatial extents through the conv/pool chain (valid 5x5 conv, floor 2x2 pool).
struct VisualChain {
  std::array<nn::Extent, 3> conv;
  std::array<nn::Extent, 3> pool;
  Index features = 0;
};

/// Throws DataError when the resolution cannot pass three conv/pool stages.
VisualChain visual_chain(Resolution res);

/// Number of fusion inputs for the configured modality.
Index fusion_length(const NetConfig& cfg);

/// Closed-form parameter count: conv sum(25 Cin Cout + Cout) + fusion
/// (Din 64 + 64) + head (64 2 + 2).
Index expected_parameter_count(const NetConfig& cfg);

/// One model input: frames scaled to [0, 1] (one per row) and the flattened
/// MFCC block. A stream the net does not use may be left empty.
template <typename Scalar>
struct SegmentInput {
  MatrixX<Scalar> frames;
  VectorX<Scalar> mfcc;
};

template <typename Scalar = double>
SegmentInput<Scalar> make_input(const Segment& seg, Modality modality) {
  SegmentInput<Scalar> in;
  if (uses_visual(modality)) in.frames = seg.frame_stack<Scalar>();
  if (uses_audio(modality)) in.mfcc = seg.mfcc.cast<Scalar>();
  return in;
}

/// Two-stream network: conv(8)-pool-conv(12)-pool-conv(16)-pool over the
/// frame stack, MFCCs passed through unchanged, then concat -> dense 64 ->
/// ReLU -> dense 2. Every conv is followed by ReLU before its pool.
template <typename Scalar>
class ArousalNet {
 public:
  using Mat = MatrixX<Scalar>;
  using Vec = VectorX<Scalar>;
  using Logits = Eigen::Matrix<Scalar, 2, 1>;

  /// Intermediate values of one forward pass, consumed by `backward`.
  struct Cache {
    const SegmentInput<Scalar>* input = nullptr;
    std::array<Mat, 3> activated;  // ReLU(conv_i), before pooling
    std::array<Mat, 3> pooled;
    std::array<std::vector<Index>, 3> argmax;
    Vec fused;
    Vec hidden;
    Logits logits;
  };

  explicit ArousalNet(NetConfig cfg) : cfg_(cfg) {
    if (cfg_.frames < 1) throw DataError("build_model: window must hold at least one frame");
    if (!uses_visual(cfg_.modality) && cfg_.mfcc_length < 1) throw DataError("build_model: empty audio stream");
    Index in = cfg_.frames;
    if (uses_visual(cfg_.modality)) {
      chain_ = visual_chain(cfg_.resolution);
      for (std::size_t k = 0; k < 3; ++k) {
        conv_[k] = nn::Conv2d<Scalar>("conv" + std::to_string(k + 1), in, kConvFilters[k]);
        in = kConvFilters[k];
      }
    }
    fusion_ = nn::Dense<Scalar>("fusion", fusion_length(cfg_), kHiddenUnits);
    head_ = nn::Dense<Scalar>("head", kHiddenUnits, 2);
    std::mt19937_64 rng(cfg_.seed);
    if (has_visual())
      for (auto& c : conv_) c.init(rng);
    fusion_.init(rng);
    head_.init(rng);
  }

  const NetConfig& config() const { return cfg_; }
  bool has_visual() const { return uses_visual(cfg_.modality); }
  bool has_audio() const { return uses_audio(cfg_.modality); }
  Index visual_features() const { return has_visual() ? chain_.features : 0; }
  const VisualChain& chain() const { return chain_; }

  nn::Conv2d<Scalar>& conv(std::size_t k) { return conv_.at(k); }
  nn::Dense<Scalar>& fusion() { return fusion_; }
  nn::Dense<Scalar>& head() { return head_; }

  nn::ParameterList<Scalar> parameters() {
    nn::ParameterList<Scalar> out;
    if (has_visual())
      for (auto& c : conv_) {
        out.push_back(&c.weight);
        out.push_back(&c.bias);
      }
    for (auto* d : {&fusion_, &head_}) {
      out.push_back(&d->weight);
      out.push_back(&d->bias);
    }
    return out;
  }

  Index parameter_count() { return nn::parameter_count(parameters()); }

  /// Pre-softmax outputs f(x). Fills `cache` when given.
  Logits forward(const SegmentInput<Scalar>& in, Cache* cache = nullptr) const {
    Cache local;
    Cache& c = cache ? *cache : local;
    c.input = &in;
    Vec fused(fusion_.in_features());
    Index at = 0;
    if (has_visual()) {
      const Resolution res = cfg_.resolution;
      if (in.frames.rows() != cfg_.frames || in.frames.cols() != res.height * res.width)
        throw ShapeError("model: frame stack shape does not match the network");
      nn::Extent extent{res.height, res.width};
      const Mat* x = &in.frames;
      for (std::size_t k = 0; k < 3; ++k) {
        conv_[k].forward(*x, extent, c.activated[k]);
        c.activated[k] = nn::relu(c.activated[k]);
        nn::maxpool2x2_forward(c.activated[k], chain_.conv[k], c.pooled[k], c.argmax[k]);
        extent = chain_.pool[k];
        x = &c.pooled[k];
      }
      fused.head(chain_.features) = Eigen::Map<const Vec>(c.pooled[2].data(), chain_.features);
      at = chain_.features;
    }
    if (has_audio()) {
      if (in.mfcc.size() != cfg_.mfcc_length) throw ShapeError("model: MFCC length does not match the network");
      fused.segment(at, cfg_.mfcc_length) = in.mfcc;
    }
    c.fused = std::move(fused);
    c.hidden = nn::relu(fusion_.forward(c.fused));
    c.logits = head_.forward(c.hidden);
    return c.logits;
  }

  /// Accumulates parameter gradients for upstream gradient `dlogits`.
  void backward(const Cache& c, const Logits& dlogits) {
    const Vec d_hidden = head_.backward(c.hidden, dlogits);
    const Vec d_fused = fusion_.backward(c.fused, nn::relu_backward(d_hidden, c.hidden).eval());
    if (!has_visual()) return;
    Mat grad = Eigen::Map<const Mat>(d_fused.data(), kConvFilters[2], chain_.pool[2].area());
    for (int k = 2; k >= 0; --k) {
      const std::size_t s = static_cast<std::size_t>(k);
      grad = nn::maxpool2x2_backward(grad, c.argmax[s], chain_.conv[s]);
      grad = nn::relu_backward(grad, c.activated[s]);
      const Mat& x = k == 0 ? c.input->frames : c.pooled[s - 1];
      const nn::Extent in = k == 0 ? nn::Extent{cfg_.resolution.height, cfg_.resolution.width} : chain_.pool[s - 1];
      Mat dx;
      conv_[s].backward(x, in, grad, k == 0 ? nullptr : &dx);
      grad = std::move(dx);
    }
  }

  /// Gradient of `dlogits . f` with respect to the third conv layer's
  /// activations (channels x spatial). Leaves parameter gradients untouched.
  Mat activation_gradient(const Cache& c, const Logits& dlogits) const {
    if (!has_visual()) throw UnsupportedError("model has no visual stream");
    const Vec d_hidden = head_.weight.value.matrix(2, kHiddenUnits).transpose() * dlogits;
    const Vec masked = nn::relu_backward(d_hidden, c.hidden);
    const Vec d_fused = fusion_.weight.value.matrix(kHiddenUnits, fusion_.in_features()).transpose() * masked;
    const Mat grad = Eigen::Map<const Mat>(d_fused.data(), kConvFilters[2], chain_.pool[2].area());
    return nn::maxpool2x2_backward(grad, c.argmax[2], chain_.conv[2]);
  }

  /// Fingerprint of the piecewise-linear decisions taken in a forward pass.
  std::uint64_t signature(const Cache& c) const {
    nn::SignatureHasher h;
    if (has_visual())
      for (std::size_t k = 0; k < 3; ++k) {
        h.add_mask(c.activated[k]);
        for (const Index i : c.argmax[k]) h.add(static_cast<std::uint64_t>(i));
      }
    h.add_mask(c.hidden);
    return h.value();
  }

 private:
  NetConfig cfg_;
  VisualChain chain_{};
  std::array<nn::Conv2d<Scalar>, 3> conv_;
  nn::Dense<Scalar> fusion_;
  nn::Dense<Scalar> head_;
};

ArousalNet<double> build_model(Index frames, Resolution res, Modality modality, Mode mode, std::uint64_t seed,
                               Index mfcc_length);

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> forward_classify(const ArousalNet<Scalar>& net, const SegmentInput<Scalar>& in) {
  if (net.config().mode != Mode::classifier) throw UnsupportedError("forward_classify needs a classifier network");
  return nn::softmax<Scalar>(net.forward(in));
}

/// softmax(f(A) - f(B)); component 1 is the probability that A has the higher arousal.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> forward_rank(const ArousalNet<Scalar>& net, const SegmentInput<Scalar>& a,
                                         const SegmentInput<Scalar>& b) {
  if (net.config().mode != Mode::ranker) throw UnsupportedError("forward_rank needs a ranker network");
  const Eigen::Matrix<Scalar, 2, 1> diff = net.forward(a) - net.forward(b);
  return nn::softmax<Scalar>(diff);
}

/// Scalar arousal score: P(high) for a classifier, f1 - f0 for a ranker.
template <typename Scalar>
Scalar score_from_logits(Mode mode, const Eigen::Matrix<Scalar, 2, 1>& logits) {
  if (mode == Mode::classifier) return nn::softmax<Scalar>(logits)(1);
  return logits(1) - logits(0);
}

template <typename Scalar>
Scalar predict_score(const ArousalNet<Scalar>& net, const SegmentInput<Scalar>& in) {
  return score_from_logits<Scalar>(net.config().mode, net.forward(in));
}

struct GradCamMap {
  Matrix heatmap;  // input resolution, values in [0, 1]
  Matrix coarse;   // third conv layer's spatial grid, before upsampling
  int target = 0;
};

/// Selvaraju-style Grad-CAM on the third conv layer: channel weights are the
/// spatial mean of d(target logit)/dA_k, map = ReLU(sum_k w_k A_k), upsampled
/// to the input along the layer's receptive-field centres, then scaled to a
/// unit maximum when non-zero.
GradCamMap grad_cam(const ArousalNet<double>& net, const SegmentInput<double>& in, int target);

/// Bilinear upsampling of a conv-grid map onto input pixels, where grid cell i
/// is centred at input coordinate offset + stride * i.
Matrix upsample_to_input(const Matrix& coarse, Resolution res, double offset, double stride);

/// Receptive-field centre offset and stride of the third conv layer's cells.
std::pair<double, double> cam_geometry();

}  // namespace arousal
