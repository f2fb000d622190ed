#pragma once

#include "arousal/common.hpp"
#include "arousal/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace arousal {

enum class Coupling { visual_only, audio_only, both };

std::string to_string(Coupling c);
Coupling parse_coupling(const std::string& s);

/// Synthetic sessions where arousal is driven by audiovisual events.
///
/// Events arrive as a Poisson process whose rate switches between a calm and
/// an intense phase (exponential dwell times), so sessions contain both quiet
/// and busy stretches. Each event adds `kernel_amplitude * exp(-dt / tau)` to
/// the arousal signal; the annotation at 4 Hz reports the peak of that signal
/// over each quarter-second interval. Setting both gains to 1 gives a
/// homogeneous Poisson process at `event_rate`.
struct SynthConfig {
  Index sessions = 20;
  double duration_s = 60.0;
  double fps = 30.0;
  int sample_rate = 16000;
  Resolution resolution{};
  double event_rate = 3.0;
  double calm_gain = 0.15;
  double intense_gain = 2.5;
  double phase_dwell_s = 6.0;
  double kernel_amplitude = 1.0;
  double kernel_tau_s = 0.7;
  /// Gaussian pixel noise in gray levels.
  double pixel_noise = 6.0;
  /// Standard deviation of the pink-noise audio bed.
  double audio_noise = 0.02;
  double burst_amplitude = 0.3;
  Coupling coupling = Coupling::both;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr double kFlashSeconds = 0.3;
inline constexpr double kBurstSeconds = 0.2;
inline constexpr double kBurstHz = 880.0;
inline constexpr double kAnnotationHz = 4.0;

struct SyntheticSession {
  RawSession session;  // raw_trace holds the normalised 4 Hz annotation
  std::vector<AnnotationSample> truth;  // same samples before normalisation
  std::vector<double> event_times;
};

std::string synthetic_session_id(Index index);

/// Pure function of (config, index).
SyntheticSession generate_session(const SynthConfig& cfg, Index index);

/// Writes `frames/NNNNNN.pgm`, `audio.wav`, `trace.csv` and `truth.csv` into `dir`.
void write_session(const SyntheticSession& s, const std::filesystem::path& dir);

/// Generates `cfg.sessions` sessions under `dir` plus `dir/manifest.json`,
/// and returns the manifest path.
std::filesystem::path write_dataset(const SynthConfig& cfg, const std::filesystem::path& dir);

}  // namespace arousal
