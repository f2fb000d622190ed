#include "arousal/ingest.hpp"
#include "arousal/synth.hpp"
#include "arousal/windows.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace arousal;
using arousal::testing::TempDir;

namespace {

SynthConfig small(double duration = 20.0, std::uint64_t seed = 1) {
  SynthConfig cfg;
  cfg.sessions = 3;
  cfg.duration_s = duration;
  cfg.resolution = {36, 48};
  cfg.seed = seed;
  return cfg;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Correlation between per-window audio energy and mean arousal, pooled over sessions.
double energy_arousal_correlation(const SynthConfig& cfg, Index sessions) {
  std::vector<double> energy, arousal;
  for (Index s = 0; s < sessions; ++s) {
    const PreparedSession p = prepare_session(generate_session(cfg, s).session);
    for (const auto& seg : segment_session(p, 0.5)) {
      const auto& samples = p.audio->samples;
      const auto lo = static_cast<std::size_t>(static_cast<double>(seg.span.start) / p.fps * p.audio->sample_rate);
      const auto hi = static_cast<std::size_t>(static_cast<double>(seg.span.start + seg.span.length) / p.fps *
                                               p.audio->sample_rate);
      double e = 0.0;
      for (std::size_t k = lo; k < hi && k < samples.size(); ++k) e += samples[k] * samples[k];
      energy.push_back(e);
      arousal.push_back(seg.mean_arousal);
    }
  }
  return pearson(energy, arousal);
}

}  // namespace

TEST(Synth, ZeroEventRateGivesFlatTrace) {
  SynthConfig cfg = small();
  cfg.event_rate = 0.0;
  const SyntheticSession s = generate_session(cfg, 0);
  EXPECT_TRUE(s.event_times.empty());
  ASSERT_FALSE(s.session.raw_trace.empty());
  for (const auto& a : s.session.raw_trace) EXPECT_EQ(a.value, 0.5);
}

TEST(Synth, RegenerationIsBitIdentical) {
  const SynthConfig cfg = small();
  const SyntheticSession a = generate_session(cfg, 2), b = generate_session(cfg, 2);
  EXPECT_EQ(a.event_times, b.event_times);
  EXPECT_TRUE(a.session.frames.pixels() == b.session.frames.pixels());
  EXPECT_EQ(a.session.audio.samples, b.session.audio.samples);
  ASSERT_EQ(a.session.raw_trace.size(), b.session.raw_trace.size());
  for (std::size_t k = 0; k < a.session.raw_trace.size(); ++k)
    EXPECT_EQ(a.session.raw_trace[k].value, b.session.raw_trace[k].value);
}

TEST(Synth, DistinctIndicesAndSeedsDiffer) {
  const SynthConfig cfg = small();
  const auto a = generate_session(cfg, 0), b = generate_session(cfg, 1), c = generate_session(small(20.0, 2), 0);
  EXPECT_NE(a.event_times, b.event_times);
  EXPECT_NE(a.event_times, c.event_times);
  EXPECT_NE(a.session.id, b.session.id);
  EXPECT_EQ(a.session.id, "syn000");
}

TEST(Synth, DurationsAgree) {
  for (const double d : {15.0, 20.0, 33.3}) {
    const SynthConfig cfg = small(d);
    const SyntheticSession s = generate_session(cfg, 0);
    EXPECT_EQ(s.session.frames.size(), std::llround(d * 30.0));
    EXPECT_EQ(s.session.frames.resolution().height, 36);
    EXPECT_EQ(s.session.audio.samples.size(), static_cast<std::size_t>(std::ceil(d * 16000.0)));
    EXPECT_EQ(s.session.raw_trace.size(), static_cast<std::size_t>(std::ceil(d * 4.0 - 1e-9)));
    EXPECT_NO_THROW(s.session.validate());
    for (const auto& a : s.session.raw_trace) {
      EXPECT_GE(a.value, 0.0);
      EXPECT_LE(a.value, 1.0);
    }
  }
}

TEST(Synth, InvalidConfigRejected) {
  SynthConfig cfg = small();
  cfg.duration_s = 14.0;
  EXPECT_THROW(generate_session(cfg, 0), DataError);
  cfg = small();
  cfg.event_rate = -1.0;
  EXPECT_THROW(generate_session(cfg, 0), DataError);
}

TEST(Synth, FlashWindowsOutrankQuietWindows) {
  const SynthConfig cfg = small(60.0, 7);
  Index compared = 0;
  for (Index index = 0; index < 4; ++index) {
    const SyntheticSession s = generate_session(cfg, index);
    const PreparedSession p = prepare_session(s.session);
    double lowest_flash = 2.0, highest_quiet = -1.0;
    for (const auto& seg : segment_session(p, 0.5)) {
      const double t0 = static_cast<double>(seg.span.start) / cfg.fps;
      const double t1 = static_cast<double>(seg.span.start + seg.span.length) / cfg.fps;
      bool flash = false;
      double last = -1e9;
      for (const double e : s.event_times) {
        if (e < t1 && e + kFlashSeconds > t0) flash = true;
        if (e < t1) last = e;
      }
      if (flash)
        lowest_flash = std::min(lowest_flash, seg.mean_arousal);
      else if (t0 - last >= 3.0 * cfg.kernel_tau_s)
        highest_quiet = std::max(highest_quiet, seg.mean_arousal);
    }
    if (lowest_flash <= 1.0 && highest_quiet >= 0.0) {
      EXPECT_GT(lowest_flash, highest_quiet) << "session " << index;
      ++compared;
    }
  }
  EXPECT_GT(compared, 0);
}

TEST(Synth, VisualOnlyAudioIsIndependentOfArousal) {
  SynthConfig cfg = small(60.0, 4);
  cfg.coupling = Coupling::visual_only;
  EXPECT_LT(std::abs(energy_arousal_correlation(cfg, 4)), 0.15);
  cfg.coupling = Coupling::both;
  EXPECT_GT(energy_arousal_correlation(cfg, 4), 0.3);
}

TEST(Synth, AudioOnlyFramesCarryNoFlashes) {
  SynthConfig cfg = small(20.0, 5);
  cfg.pixel_noise = 0.0;
  cfg.coupling = Coupling::audio_only;
  const SyntheticSession s = generate_session(cfg, 0);
  ASSERT_FALSE(s.event_times.empty());
  EXPECT_LT(s.session.frames.pixels().maxCoeff(), 250);
  cfg.coupling = Coupling::both;
  EXPECT_EQ(generate_session(cfg, 0).session.frames.pixels().maxCoeff(), 250);
}

TEST(Synth, WrittenDatasetLoadsBack) {
  TempDir dir;
  SynthConfig cfg = small(16.0, 9);
  cfg.sessions = 2;
  const auto manifest_path = write_dataset(cfg, dir.path());
  const SessionManifest manifest = load_manifest(manifest_path);
  ASSERT_EQ(manifest.entries.size(), 2u);
  const auto loaded = load_dataset(manifest);
  const SyntheticSession original = generate_session(cfg, 1);
  EXPECT_EQ(loaded[1].id, "syn001");
  EXPECT_TRUE(loaded[1].frames.pixels() == original.session.frames.pixels());
  ASSERT_EQ(loaded[1].raw_trace.size(), original.session.raw_trace.size());
  for (std::size_t k = 0; k < loaded[1].raw_trace.size(); ++k)
    EXPECT_NEAR(loaded[1].raw_trace[k].value, original.session.raw_trace[k].value, 1e-9);
  EXPECT_EQ(loaded[1].audio.samples.size(), original.session.audio.samples.size());
  EXPECT_TRUE(std::filesystem::exists(dir / "syn001" / "truth.csv"));
}

TEST(Synth, CouplingNames) {
  EXPECT_EQ(parse_coupling("visual_only"), Coupling::visual_only);
  EXPECT_EQ(parse_coupling("audio"), Coupling::audio_only);
  EXPECT_EQ(to_string(Coupling::both), "both");
  EXPECT_THROW(parse_coupling("neither"), DataError);
}
