#include "arousal/model.hpp"

#include <algorithm>
#include <cmath>

namespace arousal {

NetConfig NetConfig::for_window(double window_s, double fps, Resolution res, Modality modality, Mode mode,
                                std::uint64_t seed) {
  NetConfig cfg;
  cfg.frames = window_frames(window_s, fps);
  cfg.resolution = res;
  cfg.mfcc_length = mfcc_frame_count(window_s) * MfccConfig{}.n_coeffs;
  cfg.modality = modality;
  cfg.mode = mode;
  cfg.seed = seed;
  return cfg;
}

VisualChain visual_chain(Resolution res) {
  VisualChain chain;
  nn::Extent e{res.height, res.width};
  for (std::size_t k = 0; k < 3; ++k) {
    if (e.height < nn::kKernel || e.width < nn::kKernel)
      throw DataError("resolution " + std::to_string(res.height) + "x" + std::to_string(res.width) +
                      " is too small for three conv/pool stages");
    chain.conv[k] = nn::conv_output(e);
    if (chain.conv[k].height < 2 || chain.conv[k].width < 2)
      throw DataError("resolution " + std::to_string(res.height) + "x" + std::to_string(res.width) +
                      " is too small for three conv/pool stages");
    chain.pool[k] = nn::pool_output(chain.conv[k]);
    e = chain.pool[k];
  }
  chain.features = kConvFilters[2] * chain.pool[2].area();
  return chain;
}

Index fusion_length(const NetConfig& cfg) {
  Index n = 0;
  if (uses_visual(cfg.modality)) n += visual_chain(cfg.resolution).features;
  if (uses_audio(cfg.modality)) n += cfg.mfcc_length;
  return n;
}

Index expected_parameter_count(const NetConfig& cfg) {
  Index total = 0;
  if (uses_visual(cfg.modality)) {
    Index in = cfg.frames;
    for (const Index out : kConvFilters) {
      total += nn::kKernel * nn::kKernel * in * out + out;
      in = out;
    }
  }
  total += fusion_length(cfg) * kHiddenUnits + kHiddenUnits;
  total += kHiddenUnits * 2 + 2;
  return total;
}

ArousalNet<double> build_model(Index frames, Resolution res, Modality modality, Mode mode, std::uint64_t seed,
                               Index mfcc_length) {
  NetConfig cfg;
  cfg.frames = frames;
  cfg.resolution = res;
  cfg.modality = modality;
  cfg.mode = mode;
  cfg.seed = seed;
  cfg.mfcc_length = mfcc_length;
  return ArousalNet<double>(cfg);
}

std::pair<double, double> cam_geometry() {
  // Walk conv1, pool1, conv2, pool2, conv3: a valid 5x5 conv shifts the centre
  // by 2 input steps, a 2x2 pool by half a step and doubles the stride.
  double offset = 0.0, stride = 1.0;
  for (int stage = 0; stage < 3; ++stage) {
    offset += 2.0 * stride;
    if (stage < 2) {
      offset += 0.5 * stride;
      stride *= 2.0;
    }
  }
  return {offset, stride};
}

Matrix upsample_to_input(const Matrix& coarse, Resolution res, double offset, double stride) {
  Matrix out(res.height, res.width);
  auto coord = [&](Index pixel, Index cells) {
    const double u = std::clamp((static_cast<double>(pixel) - offset) / stride, 0.0, static_cast<double>(cells - 1));
    const auto lo = static_cast<Index>(std::floor(u));
    return std::tuple<Index, Index, double>{lo, std::min(lo + 1, cells - 1), u - static_cast<double>(lo)};
  };
  for (Index y = 0; y < res.height; ++y) {
    const auto [y0, y1, fy] = coord(y, coarse.rows());
    for (Index x = 0; x < res.width; ++x) {
      const auto [x0, x1, fx] = coord(x, coarse.cols());
      const double top = (1 - fx) * coarse(y0, x0) + fx * coarse(y0, x1);
      const double bot = (1 - fx) * coarse(y1, x0) + fx * coarse(y1, x1);
      out(y, x) = (1 - fy) * top + fy * bot;
    }
  }
  return out;
}

GradCamMap grad_cam(const ArousalNet<double>& net, const SegmentInput<double>& in, int target) {
  if (!net.has_visual()) throw UnsupportedError("grad_cam: the network has no visual stream");
  if (target != 0 && target != 1) throw DataError("grad_cam: target must be 0 or 1");
  ArousalNet<double>::Cache cache;
  net.forward(in, &cache);
  Eigen::Vector2d onehot = Eigen::Vector2d::Zero();
  onehot(target) = 1.0;
  const Matrix grad = net.activation_gradient(cache, onehot);
  const Matrix& acts = cache.activated[2];
  const Vector weights = grad.rowwise().mean();
  const nn::Extent grid = net.chain().conv[2];
  const Vector cam = (weights.transpose() * acts).transpose().cwiseMax(0.0);

  GradCamMap out;
  out.target = target;
  out.coarse = Eigen::Map<const Matrix>(cam.data(), grid.height, grid.width);
  const auto [offset, stride] = cam_geometry();
  out.heatmap = upsample_to_input(out.coarse, net.config().resolution, offset, stride);
  const double peak = out.heatmap.maxCoeff();
  if (peak > 0.0) out.heatmap /= peak;
  return out;
}

}  // namespace arousal
