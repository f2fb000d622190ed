#pragma once

#include "arousal/common.hpp"

#include <span>

namespace arousal {

/// Framing and filterbank settings. The defaults give 11 coefficients per
/// audio frame at 30 frames per second, i.e. 330 coefficients per second.
struct MfccConfig {
  int n_filters = 26;
  int n_coeffs = 11;
  int frames_per_second = 30;
  double frame_length_s = 0.025;
  double preemphasis = 0.97;
  double log_floor = 1e-10;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular filters over the non-negative FFT bins, one row per filter.
struct MelFilterbank {
  Matrix weights;
  Vector center_hz;
  int sample_rate = 0;
  int fft_size = 0;

  Index size() const { return weights.rows(); }
};

/// `n_filters` unit-peak triangles with centres equally spaced on the mel
/// scale between 0 Hz and Nyquist.
MelFilterbank mel_filterbank(int sample_rate, int fft_size, int n_filters = 26);

/// Orthonormal DCT-II matrix: row k holds basis function k.
Matrix dct2_matrix(Index n);

/// Filterbank energies (before the log) of one windowed frame.
Vector mel_energies(std::span<const double> frame, const MelFilterbank& bank);

/// Number of audio frames an MFCC block holds for a window of `window_s`.
Index mfcc_frame_count(double window_s, const MfccConfig& cfg = {});

/// Samples that `mfcc_block` needs to cover a window of `window_s`.
Index mfcc_required_samples(double window_s, int sample_rate, const MfccConfig& cfg = {});

/// MFCC block of the audio starting at `samples[0]`: one row per audio frame,
/// `cfg.n_coeffs` columns (c0 first).
Matrix mfcc_block(std::span<const double> samples, int sample_rate, double window_s, const MfccConfig& cfg = {});

/// Row-major flattening of a block into the feature vector the model consumes.
Vector flatten(const Matrix& block);

}  // namespace arousal
