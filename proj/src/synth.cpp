#include "arousal/synth.hpp"

#include "arousal/image.hpp"
#include "arousal/trace.hpp"
#include "arousal/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace arousal {

namespace fs = std::filesystem;

std::string to_string(Coupling c) {
  switch (c) {
    case Coupling::visual_only: return "visual_only";
    case Coupling::audio_only: return "audio_only";
    case Coupling::both: return "both";
  }
  return "";
}

Coupling parse_coupling(const std::string& s) {
  if (s == "visual_only" || s == "visual") return Coupling::visual_only;
  if (s == "audio_only" || s == "audio") return Coupling::audio_only;
  if (s == "both") return Coupling::both;
  throw DataError("unknown coupling '" + s + "' (expected visual_only, audio_only or both)");
}

void SynthConfig::validate() const {
  if (sessions < 1) throw DataError("synth: sessions must be >= 1");
  if (duration_s < 15.0) throw DataError("synth: duration must be at least 15 s");
  if (!(fps > 0.0)) throw DataError("synth: fps must be positive");
  if (sample_rate < 8000) throw DataError("synth: sample rate must be >= 8000 Hz");
  if (resolution.height < 8 || resolution.width < 8) throw DataError("synth: resolution too small");
  if (event_rate < 0.0 || calm_gain < 0.0 || intense_gain < 0.0) throw DataError("synth: rates must be >= 0");
  if (!(phase_dwell_s > 0.0)) throw DataError("synth: phase dwell must be positive");
  if (!(kernel_tau_s > 0.0) || !(kernel_amplitude > 0.0)) throw DataError("synth: kernel must be positive");
  if (pixel_noise < 0.0 || audio_noise < 0.0 || burst_amplitude < 0.0) throw DataError("synth: noise levels must be >= 0");
}

std::string synthetic_session_id(Index index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn%03ld", static_cast<long>(index));
  return buf;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, Index index, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(index)) ^ stream);
}

std::vector<double> event_times(const SynthConfig& cfg, std::mt19937_64& rng) {
  std::vector<double> out;
  std::exponential_distribution<double> dwell(1.0 / cfg.phase_dwell_s);
  std::bernoulli_distribution coin(0.5);
  bool intense = coin(rng);
  double t = 0.0;
  while (t < cfg.duration_s) {
    const double phase_end = std::min(cfg.duration_s, t + dwell(rng));
    const double rate = cfg.event_rate * (intense ? cfg.intense_gain : cfg.calm_gain);
    if (rate > 0.0) {
      std::exponential_distribution<double> gap(rate);
      for (double e = t + gap(rng); e < phase_end; e += gap(rng)) out.push_back(e);
    }
    t = phase_end;
    intense = !intense;
  }
  return out;
}

double signal_at(const std::vector<double>& events, double t, const SynthConfig& cfg) {
  double s = 0.0;
  for (const double e : events) {
    if (e > t) break;
    s += cfg.kernel_amplitude * std::exp(-(t - e) / cfg.kernel_tau_s);
  }
  return s;
}

// Peak of the event signal over [k / 4, (k + 1) / 4) for each annotation slot.
std::vector<AnnotationSample> annotate(const std::vector<double>& events, const SynthConfig& cfg) {
  const auto n = static_cast<std::size_t>(std::ceil(cfg.duration_s * kAnnotationHz - 1e-9));
  std::vector<AnnotationSample> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = static_cast<double>(k) / kAnnotationHz;
    const double hi = static_cast<double>(k + 1) / kAnnotationHz;
    double peak = signal_at(events, lo, cfg);
    for (const double e : events)
      if (e >= lo && e < hi) peak = std::max(peak, signal_at(events, e, cfg));
    out[k] = {lo, peak};
  }
  return out;
}

FrameTrack render_frames(const SynthConfig& cfg, const std::vector<double>& events, std::mt19937_64& rng) {
  const Index h = cfg.resolution.height, w = cfg.resolution.width;
  const auto n = static_cast<Index>(std::llround(cfg.duration_s * cfg.fps));
  const double scale = static_cast<double>(std::min(h, w)) / 72.0;
  const bool flashes = cfg.coupling != Coupling::audio_only;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, double>> centre;
  for (std::size_t k = 0; k < events.size(); ++k)
    centre.emplace_back((0.15 + 0.7 * unit(rng)) * static_cast<double>(h),
                        (0.15 + 0.7 * unit(rng)) * static_cast<double>(w));
  const double phase_y = 2.0 * std::numbers::pi * unit(rng);
  const double phase_x = 2.0 * std::numbers::pi * unit(rng);
  std::normal_distribution<double> noise(0.0, cfg.pixel_noise);

  const Index sprite = std::max<Index>(2, std::lround(6.0 * scale));
  const Index bar_rows = std::max<Index>(1, std::lround(3.0 * scale));
  const double r_min = 2.0 * scale, r_max = 0.25 * static_cast<double>(std::min(h, w));

  FrameTrack track(n, cfg.resolution);
  Eigen::ArrayXXd img(h, w);
  std::size_t passed = 0;
  for (Index f = 0; f < n; ++f) {
    const double t = static_cast<double>(f) / cfg.fps;
    img.setConstant(20.0);

    const double sy = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * t / 5.1 + phase_y);
    const double sx = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * t / 7.3 + phase_x);
    const auto y0 = static_cast<Index>(sy * static_cast<double>(h - sprite));
    const auto x0 = static_cast<Index>(sx * static_cast<double>(w - sprite));
    img.block(y0, x0, sprite, sprite) = 170.0;

    while (passed < events.size() && events[passed] <= t) ++passed;
    if (flashes) {
      for (std::size_t e = 0; e < passed; ++e) {
        const double age = t - events[e];
        if (age >= kFlashSeconds) continue;
        const double r = r_min + (r_max - r_min) * age / kFlashSeconds;
        const auto [cy, cx] = centre[e];
        const Index ylo = std::max<Index>(0, static_cast<Index>(std::floor(cy - r)));
        const Index yhi = std::min<Index>(h - 1, static_cast<Index>(std::ceil(cy + r)));
        const Index xlo = std::max<Index>(0, static_cast<Index>(std::floor(cx - r)));
        const Index xhi = std::min<Index>(w - 1, static_cast<Index>(std::ceil(cx + r)));
        for (Index y = ylo; y <= yhi; ++y)
          for (Index x = xlo; x <= xhi; ++x) {
            const double dy = static_cast<double>(y) + 0.5 - cy, dx = static_cast<double>(x) + 0.5 - cx;
            if (dy * dy + dx * dx <= r * r) img(y, x) = 250.0;
          }
      }
      const Index bar = static_cast<Index>(passed % 50) * w / 50;
      if (bar > 0) img.block(h - bar_rows, 0, bar_rows, bar) = 120.0;
    }

    auto row = track.pixels().row(f);
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        const double v = img(y, x) + (cfg.pixel_noise > 0.0 ? noise(rng) : 0.0);
        row(y * w + x) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
  }
  return track;
}

AudioClip render_audio(const SynthConfig& cfg, const std::vector<double>& events, std::mt19937_64& rng) {
  AudioClip clip;
  clip.sample_rate = cfg.sample_rate;
  const double sr = static_cast<double>(cfg.sample_rate);
  const auto n = static_cast<std::size_t>(std::ceil(cfg.duration_s * sr));
  clip.samples.resize(n);
  std::normal_distribution<double> white(0.0, 1.0);
  // Kellet's economy pink filter; the output has roughly unit variance after the 0.2 gain.
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = white(rng);
    b0 = 0.99765 * b0 + x * 0.0990460;
    b1 = 0.96300 * b1 + x * 0.2965164;
    b2 = 0.57000 * b2 + x * 1.0526913;
    clip.samples[i] = cfg.audio_noise * 0.2 * (b0 + b1 + b2 + x * 0.1848);
  }
  if (cfg.coupling != Coupling::visual_only) {
    const auto len = static_cast<std::size_t>(std::lround(kBurstSeconds * sr));
    const auto ramp = static_cast<std::size_t>(std::lround(0.005 * sr));
    for (const double e : events) {
      const auto start = static_cast<std::size_t>(std::lround(e * sr));
      for (std::size_t k = 0; k < len && start + k < n; ++k) {
        const double env = std::min({1.0, static_cast<double>(k) / static_cast<double>(ramp),
                                     static_cast<double>(len - k) / static_cast<double>(ramp)});
        clip.samples[start + k] +=
            cfg.burst_amplitude * env * std::sin(2.0 * std::numbers::pi * kBurstHz * static_cast<double>(k) / sr);
      }
    }
  }
  for (auto& s : clip.samples) s = std::clamp(s, -1.0, 32767.0 / 32768.0);
  return clip;
}

}  // namespace

SyntheticSession generate_session(const SynthConfig& cfg, Index index) {
  cfg.validate();
  std::mt19937_64 event_rng(stream_seed(cfg.seed, index, 1));
  std::mt19937_64 pixel_rng(stream_seed(cfg.seed, index, 2));
  std::mt19937_64 audio_rng(stream_seed(cfg.seed, index, 3));

  SyntheticSession out;
  out.event_times = event_times(cfg, event_rng);
  out.truth = annotate(out.event_times, cfg);
  std::vector<double> raw;
  for (const auto& s : out.truth) raw.push_back(s.value);
  const auto norm = normalize_minmax(raw);

  RawSession& session = out.session;
  session.id = synthetic_session_id(index);
  session.fps = cfg.fps;
  session.frames = render_frames(cfg, out.event_times, pixel_rng);
  session.audio = render_audio(cfg, out.event_times, audio_rng);
  session.raw_trace = out.truth;
  for (std::size_t k = 0; k < norm.size(); ++k) session.raw_trace[k].value = norm[k];
  return out;
}

void write_session(const SyntheticSession& s, const fs::path& dir) {
  fs::create_directories(dir / "frames");
  const auto& frames = s.session.frames;
  for (Index k = 0; k < frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "%06ld.pgm", static_cast<long>(k));
    write_pgm(dir / "frames" / name, GrayImage(frames.frame(k)));
  }
  write_wav(dir / "audio.wav", s.session.audio);
  write_trace_csv(dir / "trace.csv", s.session.raw_trace);
  write_trace_csv(dir / "truth.csv", s.truth);
}

fs::path write_dataset(const SynthConfig& cfg, const fs::path& dir) {
  cfg.validate();
  SessionManifest manifest;
  manifest.target = cfg.resolution;
  manifest.fps = cfg.fps;
  for (Index k = 0; k < cfg.sessions; ++k) {
    const SyntheticSession s = generate_session(cfg, k);
    write_session(s, dir / s.session.id);
    manifest.entries.push_back({s.session.id, s.session.id});
  }
  const fs::path path = dir / "manifest.json";
  write_manifest(path, manifest);
  return path;
}

}  // namespace arousal
