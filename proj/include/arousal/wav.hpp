#pragma once

#include "arousal/common.hpp"

#include <filesystem>
#include <vector>

namespace arousal {

/// Mono PCM audio with samples scaled to [-1, 1).
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const { return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
};

/// Reads a RIFF WAVE file holding 16-bit mono PCM.
AudioClip read_wav(const std::filesystem::path& path);

/// Writes 16-bit mono PCM; out-of-range samples saturate.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace arousal
