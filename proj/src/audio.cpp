#include "arousal/audio.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace arousal {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

int frame_length(int sample_rate, const MfccConfig& cfg) {
  return static_cast<int>(std::lround(cfg.frame_length_s * sample_rate));
}

}  // namespace

MelFilterbank mel_filterbank(int sample_rate, int fft_size, int n_filters) {
  if (fft_size < 32) throw DataError("mel_filterbank: fft_size must be >= 32");
  if ((fft_size & (fft_size - 1)) != 0) throw DataError("mel_filterbank: fft_size must be a power of two");
  if (sample_rate <= 0 || n_filters <= 0) throw DataError("mel_filterbank: invalid sample rate or filter count");

  const int bins = fft_size / 2 + 1;
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edge_hz(static_cast<std::size_t>(n_filters + 2));
  for (int m = 0; m < n_filters + 2; ++m) edge_hz[m] = mel_to_hz(top * m / (n_filters + 1));

  MelFilterbank bank;
  bank.sample_rate = sample_rate;
  bank.fft_size = fft_size;
  bank.weights = Matrix::Zero(n_filters, bins);
  bank.center_hz.resize(n_filters);
  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  for (int m = 0; m < n_filters; ++m) {
    const double lo = edge_hz[m], mid = edge_hz[m + 1], hi = edge_hz[m + 2];
    bank.center_hz(m) = mid;
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      if (f > lo && f <= mid)
        bank.weights(m, k) = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        bank.weights(m, k) = (hi - f) / (hi - mid);
    }
    const double peak = bank.weights.row(m).maxCoeff();
    if (peak > 0.0) {
      bank.weights.row(m) /= peak;
    } else {
      // No bin falls inside a very narrow triangle: use the bin nearest its centre.
      bank.weights(m, std::min<Index>(bins - 1, std::lround(mid / bin_hz))) = 1.0;
    }
  }
  return bank;
}

Matrix dct2_matrix(Index n) {
  Matrix m(n, n);
  const double nn = static_cast<double>(n);
  for (Index k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn);
    for (Index i = 0; i < n; ++i)
      m(k, i) = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nn));
  }
  return m;
}

Vector mel_energies(std::span<const double> frame, const MelFilterbank& bank) {
  std::vector<double> padded(static_cast<std::size_t>(bank.fft_size), 0.0);
  std::copy_n(frame.begin(), std::min<std::size_t>(frame.size(), padded.size()), padded.begin());
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  Vector power(static_cast<Index>(bank.weights.cols()));
  for (Index k = 0; k < power.size(); ++k) power(k) = std::norm(spectrum[static_cast<std::size_t>(k)]);
  return bank.weights * power;
}

Index mfcc_frame_count(double window_s, const MfccConfig& cfg) {
  return static_cast<Index>(std::floor(window_s * cfg.frames_per_second + 0.5));
}

Index mfcc_required_samples(double window_s, int sample_rate, const MfccConfig& cfg) {
  const Index frames = mfcc_frame_count(window_s, cfg);
  if (frames <= 0) return 0;
  return (frames - 1) * sample_rate / cfg.frames_per_second + frame_length(sample_rate, cfg);
}

Matrix mfcc_block(std::span<const double> samples, int sample_rate, double window_s, const MfccConfig& cfg) {
  if (sample_rate < 8000) throw DataError("mfcc_block: sample rate must be >= 8000 Hz");
  const Index frames = mfcc_frame_count(window_s, cfg);
  if (frames <= 0) throw DataError("mfcc_block: window shorter than one audio frame");
  const Index needed = mfcc_required_samples(window_s, sample_rate, cfg);
  if (static_cast<Index>(samples.size()) < needed)
    throw DataError("mfcc_block: audio span shorter than the window (" + std::to_string(samples.size()) + " < " +
                    std::to_string(needed) + " samples)");

  const int len = frame_length(sample_rate, cfg);
  const MelFilterbank bank = mel_filterbank(sample_rate, next_pow2(len), cfg.n_filters);
  const Matrix dct = dct2_matrix(cfg.n_filters).topRows(cfg.n_coeffs);

  std::vector<double> emphasized(static_cast<std::size_t>(needed));
  emphasized[0] = samples[0];
  for (std::size_t i = 1; i < emphasized.size(); ++i) emphasized[i] = samples[i] - cfg.preemphasis * samples[i - 1];

  std::vector<double> hamming(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) hamming[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (len - 1));

  Matrix block(frames, cfg.n_coeffs);
  std::vector<double> frame(static_cast<std::size_t>(len));
  for (Index f = 0; f < frames; ++f) {
    const Index start = f * sample_rate / cfg.frames_per_second;
    for (int i = 0; i < len; ++i) frame[i] = emphasized[static_cast<std::size_t>(start + i)] * hamming[i];
    const Vector log_mel = mel_energies(frame, bank).array().max(cfg.log_floor).log();
    block.row(f) = (dct * log_mel).transpose();
  }
  return block;
}

Vector flatten(const Matrix& block) { return Eigen::Map<const Vector>(block.data(), block.size()); }

}  // namespace arousal
