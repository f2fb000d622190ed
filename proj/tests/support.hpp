#pragma once

#include "arousal/model.hpp"
#include "arousal/nn/gradcheck.hpp"
#include "arousal/nn/layers.hpp"
#include "arousal/windows.hpp"

#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace arousal::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("arousal_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Segments carrying only the given means (one-frame spans, no pixels).
inline std::vector<Segment> segments_with_means(std::span<const double> means, const std::string& session = "s",
                                                double session_mean = 0.5) {
  std::vector<Segment> out;
  for (std::size_t k = 0; k < means.size(); ++k) {
    Segment s;
    s.session_id = session;
    s.span = {static_cast<Index>(k), 1};
    s.mean_arousal = means[k];
    s.session_mean = session_mean;
    out.push_back(std::move(s));
  }
  return out;
}

inline SegmentInput<double> random_input(const NetConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SegmentInput<double> in;
  if (uses_visual(cfg.modality)) {
    in.frames.resize(cfg.frames, cfg.resolution.height * cfg.resolution.width);
    for (Index k = 0; k < in.frames.size(); ++k) in.frames.data()[k] = unit(rng);
  }
  if (uses_audio(cfg.modality)) {
    in.mfcc.resize(cfg.mfcc_length);
    for (Index k = 0; k < in.mfcc.size(); ++k) in.mfcc(k) = 4.0 * unit(rng) - 2.0;
  }
  return in;
}

/// Finite-difference check of the softmax cross-entropy loss of a classifier
/// on one input.
inline nn::GradCheckResult check_classifier_gradients(ArousalNet<double>& net, const SegmentInput<double>& in,
                                                      int target, double h = 1e-5, Index min_total = 200,
                                                      std::uint64_t seed = 0) {
  auto params = net.parameters();
  auto analytic = [&] {
    nn::zero_grad(params);
    typename ArousalNet<double>::Cache c;
    const auto logits = net.forward(in, &c);
    net.backward(c, nn::softmax_nll<double>(logits, target).grad);
  };
  auto evaluate = [&] {
    typename ArousalNet<double>::Cache c;
    const auto logits = net.forward(in, &c);
    return nn::Evaluation{nn::softmax_nll<double>(logits, target).loss, net.signature(c)};
  };
  return nn::finite_diff_check(params, analytic, evaluate, h, min_total, 8, seed);
}

/// Same for the pairwise loss softmax_nll(f(a) - f(b), label).
inline nn::GradCheckResult check_ranker_gradients(ArousalNet<double>& net, const SegmentInput<double>& a,
                                                  const SegmentInput<double>& b, int label, double h = 1e-5,
                                                  Index min_total = 200, std::uint64_t seed = 0) {
  auto params = net.parameters();
  auto analytic = [&] {
    nn::zero_grad(params);
    typename ArousalNet<double>::Cache ca, cb;
    const auto fa = net.forward(a, &ca);
    const auto fb = net.forward(b, &cb);
    const auto g = nn::softmax_nll<double>((fa - fb).eval(), label).grad;
    net.backward(ca, g);
    net.backward(cb, (-g).eval());
  };
  auto evaluate = [&] {
    typename ArousalNet<double>::Cache ca, cb;
    const auto fa = net.forward(a, &ca);
    const auto fb = net.forward(b, &cb);
    nn::SignatureHasher hsh;
    hsh.add(net.signature(ca));
    hsh.add(net.signature(cb));
    return nn::Evaluation{nn::softmax_nll<double>((fa - fb).eval(), label).loss, hsh.value()};
  };
  return nn::finite_diff_check(params, analytic, evaluate, h, min_total, 8, seed);
}

/// Centre-tap conv chain with a bright detector in channel 0 and a dark
/// detector in channel 1; only channel 0 cells whose input footprint lies in
/// the top-left quadrant feed the output logit.
inline ArousalNet<double> quadrant_net() {
  NetConfig cfg;
  cfg.frames = 2;
  cfg.resolution = {72, 96};
  cfg.modality = Modality::visual;
  ArousalNet<double> net(cfg);
  for (auto* p : net.parameters()) p->value.set_zero();
  auto tap = [](nn::Conv2d<double>& c, Index out, Index in, double w) {
    c.weight.value[((out * c.in_channels() + in) * 5 + 2) * 5 + 2] = w;
  };
  for (Index f = 0; f < cfg.frames; ++f) {
    tap(net.conv(0), 0, f, 1.0 / static_cast<double>(cfg.frames));
    tap(net.conv(0), 1, f, -1.0 / static_cast<double>(cfg.frames));
  }
  net.conv(0).bias.value[1] = 1.0;
  for (const std::size_t k : {std::size_t{1}, std::size_t{2}}) {
    tap(net.conv(k), 0, 0, 1.0);
    tap(net.conv(k), 1, 1, 1.0);
  }
  const nn::Extent grid = net.chain().pool[2];
  auto& fusion = net.fusion().weight.value;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 4; ++j) fusion[i * grid.width + j] = 1.0 / 8.0;
  net.head().weight.value[1 * kHiddenUnits + 0] = 1.0;
  return net;
}

inline SegmentInput<double> quadrant_input(double inside, double outside) {
  SegmentInput<double> in;
  in.frames = Matrix::Constant(2, 72 * 96, outside);
  for (Index f = 0; f < 2; ++f)
    for (Index y = 0; y < 36; ++y)
      for (Index x = 0; x < 48; ++x) in.frames(f, y * 96 + x) = inside;
  return in;
}

}  // namespace arousal::testing
