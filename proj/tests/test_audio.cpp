#include "arousal/audio.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace arousal;

namespace {

std::vector<double> sine(double hz, double seconds, int sr, double amp = 0.5) {
  std::vector<double> out(static_cast<std::size_t>(seconds * sr));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = amp * std::sin(2.0 * std::numbers::pi * hz * k / sr);
  return out;
}

std::vector<double> noise(double seconds, int sr, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> out(static_cast<std::size_t>(seconds * sr));
  for (auto& v : out) v = g(rng);
  return out;
}

}  // namespace

TEST(Mel, SevenHundredHertz) { EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-12); }

TEST(Mel, RoundTrip) {
  for (double hz = 0.0; hz < 8000.0; hz += 137.0) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
}

TEST(Filterbank, UnitPeaks) {
  const MelFilterbank bank = mel_filterbank(16000, 512);
  ASSERT_EQ(bank.size(), 26);
  ASSERT_EQ(bank.weights.cols(), 257);
  for (Index m = 0; m < bank.size(); ++m) EXPECT_DOUBLE_EQ(bank.weights.row(m).maxCoeff(), 1.0) << m;
}

TEST(Filterbank, SupportsOverlapOnlyNeighbours) {
  const MelFilterbank bank = mel_filterbank(16000, 512);
  for (Index a = 0; a < bank.size(); ++a)
    for (Index b = a + 2; b < bank.size(); ++b)
      EXPECT_EQ((bank.weights.row(a).array() * bank.weights.row(b).array()).maxCoeff(), 0.0) << a << "," << b;
}

TEST(Filterbank, CentresIncrease) {
  const MelFilterbank bank = mel_filterbank(16000, 512);
  for (Index m = 1; m < bank.size(); ++m) EXPECT_GT(bank.center_hz(m), bank.center_hz(m - 1));
  EXPECT_LT(bank.center_hz(bank.size() - 1), 8000.0);
}

TEST(Filterbank, InvalidSizes) {
  EXPECT_THROW(mel_filterbank(16000, 16), DataError);
  EXPECT_THROW(mel_filterbank(16000, 48), DataError);
}

TEST(Dct, Orthonormal) {
  for (const Index n : {1, 2, 11, 26, 40}) {
    const Matrix m = dct2_matrix(n);
    EXPECT_LT((m.transpose() * m - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-9) << n;
  }
}

TEST(Dct, ConstantGoesToFirstCoefficientOnly) {
  const Matrix m = dct2_matrix(26);
  const Vector c = m * Vector::Constant(26, -3.0);
  EXPECT_NEAR(c(0), -3.0 * std::sqrt(26.0), 1e-12);
  EXPECT_LT(c.tail(25).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mfcc, BlockLengthsPerWindow) {
  const std::vector<std::pair<double, Index>> cases{{0.25, 88}, {0.5, 165}, {1.0, 330}, {2.0, 660}, {3.0, 990}};
  for (const auto& [w, len] : cases) {
    const auto audio = noise(w + 0.1, 16000, 1);
    const Matrix block = mfcc_block(audio, 16000, w);
    EXPECT_EQ(block.cols(), 11);
    EXPECT_EQ(flatten(block).size(), len) << w;
    EXPECT_EQ(mfcc_frame_count(w) * 11, len);
  }
}

TEST(Mfcc, SilenceHasEnergyOnlyInC0) {
  const std::vector<double> silence(16000, 0.0);
  const Matrix block = mfcc_block(silence, 16000, 0.5);
  ASSERT_EQ(block.rows(), 15);
  for (Index f = 0; f < block.rows(); ++f) {
    EXPECT_DOUBLE_EQ(block(f, 0), block(0, 0));
    EXPECT_LT(block.row(f).tail(10).cwiseAbs().maxCoeff(), 1e-9);
  }
  EXPECT_NEAR(block(0, 0), std::log(1e-10) * std::sqrt(26.0), 1e-9);
}

TEST(Mfcc, ToneLandsInNearestFilter) {
  const MelFilterbank bank = mel_filterbank(16000, 512);
  Index nearest = 0;
  for (Index m = 1; m < bank.size(); ++m)
    if (std::abs(bank.center_hz(m) - 1000.0) < std::abs(bank.center_hz(nearest) - 1000.0)) nearest = m;
  const auto tone = sine(1000.0, 0.025, 16000);
  std::vector<double> frame(tone.begin(), tone.begin() + 400);
  for (std::size_t k = 0; k < frame.size(); ++k) frame[k] *= 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / 399.0);
  Index argmax = 0;
  mel_energies(frame, bank).maxCoeff(&argmax);
  EXPECT_EQ(argmax, nearest);
}

TEST(Mfcc, ScalingShiftsOnlyC0) {
  const auto audio = noise(0.6, 16000, 3);
  std::vector<double> louder(audio);
  for (auto& v : louder) v *= 3.0;
  const Matrix a = mfcc_block(audio, 16000, 0.5);
  const Matrix b = mfcc_block(louder, 16000, 0.5);
  const double shift = b(0, 0) - a(0, 0);
  EXPECT_NEAR(shift, 2.0 * std::log(3.0) * std::sqrt(26.0), 1e-6);
  for (Index f = 0; f < a.rows(); ++f) {
    EXPECT_NEAR(b(f, 0) - a(f, 0), shift, 1e-6);
    EXPECT_LT((b.row(f).tail(10) - a.row(f).tail(10)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Mfcc, Deterministic) {
  const auto audio = noise(1.1, 16000, 4);
  EXPECT_EQ(mfcc_block(audio, 16000, 1.0), mfcc_block(audio, 16000, 1.0));
}

TEST(Mfcc, ShortSpanIsError) {
  const std::vector<double> tiny(100, 0.0);
  EXPECT_THROW(mfcc_block(tiny, 16000, 0.5), DataError);
}

TEST(Mfcc, RequiredSamplesSuffice) {
  for (const double w : {0.25, 0.5, 1.0, 2.0, 3.0}) {
    const Index need = mfcc_required_samples(w, 16000);
    const std::vector<double> exact(static_cast<std::size_t>(need), 0.1);
    EXPECT_NO_THROW(mfcc_block(exact, 16000, w));
    const std::vector<double> short_by_one(static_cast<std::size_t>(need - 1), 0.1);
    EXPECT_THROW(mfcc_block(short_by_one, 16000, w), DataError);
  }
}
