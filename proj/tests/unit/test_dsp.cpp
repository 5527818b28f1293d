#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.h"
#include "svs/dsp.h"
#include "svs/error.h"

namespace svs {
namespace {

std::vector<double> sine(double hz, std::size_t n, double sr = 44100.0, double amp = 0.5) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * i / sr);
  return x;
}

TEST(MelConfig, RejectsBrokenInvariants) {
  MelConfig c;
  c.win_size = 4096;
  EXPECT_THROW(c.validate(), ValidationError);
  c = MelConfig{};
  c.hop = 4096;
  EXPECT_THROW(c.validate(), ValidationError);
  c = MelConfig{};
  c.fmax = 30000;
  EXPECT_THROW(c.validate(), ValidationError);
  c = MelConfig{};
  c.n_mels = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_NO_THROW(MelConfig{}.validate());
}

TEST(MagnitudeSpectrogram, SinePeaksAtBin20) {
  const auto x = sine(440.0, 44100);
  const Matrix mag = magnitude_spectrogram(x, MelConfig{});
  for (Eigen::Index t = 5; t < mag.rows() - 5; ++t) {
    Eigen::Index arg;
    mag.row(t).maxCoeff(&arg);
    EXPECT_EQ(arg, 20) << "frame " << t;
  }
}

TEST(MagnitudeSpectrogram, MatchesDirectDft) {
  const MelConfig cfg;
  const auto x = sine(440.0, 8192);
  const Matrix mag = magnitude_spectrogram(x, cfg);
  // Frame 6 is centred on sample 3072 and lies wholly inside the signal.
  const std::size_t centre = 6 * 512, n = 2048;
  std::vector<double> frame(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * j / n);
    frame[j] = x[centre - n / 2 + j] * w;
  }
  const auto ref = testing::direct_dft_magnitude(frame);
  const auto arg = std::max_element(ref.begin(), ref.end()) - ref.begin();
  EXPECT_EQ(arg, 20);
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(mag(6, static_cast<Eigen::Index>(k)), ref[k], 1e-9);
}

TEST(MagnitudeSpectrogram, ReflectPaddingAtEdges) {
  MelConfig cfg;
  cfg.fft_size = cfg.win_size = 8;
  cfg.hop = 2;
  cfg.n_mels = 2;
  cfg.sample_rate = 16.0;
  cfg.fmax = 8.0;
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7};
  const Matrix mag = magnitude_spectrogram(x, cfg);
  // Frame 0 sees x[4],x[3],x[2],x[1],x[0],x[1],x[2],x[3].
  const std::vector<double> padded = {5, 4, 3, 2, 1, 2, 3, 4};
  std::vector<double> frame(8);
  for (std::size_t j = 0; j < 8; ++j) frame[j] = padded[j] * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * j / 8.0));
  const auto ref = testing::direct_dft_magnitude(frame);
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(mag(0, static_cast<Eigen::Index>(k)), ref[k], 1e-12);
}

TEST(MelSpectrogram, FrameCountFormula) {
  EXPECT_EQ(num_frames(44100, 512), 87u);
  const auto mel = mel_spectrogram(std::vector<double>(44100, 0.0), MelConfig{});
  EXPECT_EQ(mel.num_frames(), 87u);
  EXPECT_EQ(mel.frames.cols(), 80);
  for (std::size_t n : {1u, 511u, 512u, 513u, 2047u, 5000u}) {
    EXPECT_EQ(mel_spectrogram(std::vector<double>(n, 0.1), MelConfig{}).num_frames(), n / 512 + 1);
  }
}

TEST(MelSpectrogram, SilenceIsFloor) {
  const auto mel = mel_spectrogram(std::vector<double>(10000, 0.0), MelConfig{});
  const double floor = std::log(1e-5);
  for (Eigen::Index i = 0; i < mel.frames.size(); ++i) EXPECT_EQ(mel.frames.data()[i], floor);
}

TEST(MelSpectrogram, DoublingAddsLn2) {
  testing::Rng rng(2);
  std::vector<double> x(20000);
  for (double& v : x) v = testing::uniform(rng, -0.3, 0.3);
  std::vector<double> x2(x);
  for (double& v : x2) v *= 2.0;
  const auto a = mel_spectrogram(x, MelConfig{});
  const auto b = mel_spectrogram(x2, MelConfig{});
  const double floor = std::log(1e-5);
  std::size_t checked = 0;
  for (Eigen::Index i = 0; i < a.frames.size(); ++i) {
    if (a.frames.data()[i] <= floor + 1.0) continue;
    EXPECT_NEAR(b.frames.data()[i] - a.frames.data()[i], std::numbers::ln2, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 1000u);
}

TEST(MelSpectrogram, SilenceThenSignal) {
  const MelConfig cfg;
  std::vector<double> x(20 * 512, 0.0);
  const auto tone = sine(300.0, 20 * 512);
  x.insert(x.end(), tone.begin(), tone.end());
  const auto joint = mel_spectrogram(x, cfg);
  const auto alone = mel_spectrogram(tone, cfg);
  const double floor = std::log(1e-5);
  // Frames whose window lies entirely in the silent part.
  for (Eigen::Index t = 0; t + 2 <= 20 - 2; ++t) {
    for (Eigen::Index m = 0; m < 80; ++m) EXPECT_EQ(joint.frames(t, m), floor);
  }
  // Frames wholly inside the tone, compared with the tone on its own.
  for (Eigen::Index t = 2; t < 16; ++t) {
    for (Eigen::Index m = 0; m < 80; ++m) EXPECT_NEAR(joint.frames(t + 20, m), alone.frames(t, m), 1e-9);
  }
}

TEST(MelFilterbank, TrianglesAreNonNegativeAndCoverBand) {
  const Matrix fb = mel_filterbank(MelConfig{});
  EXPECT_EQ(fb.rows(), 80);
  EXPECT_EQ(fb.cols(), 1025);
  EXPECT_GE(fb.minCoeff(), 0.0);
  EXPECT_LE(fb.maxCoeff(), 1.0);
  for (Eigen::Index m = 0; m < 80; ++m) EXPECT_GT(fb.row(m).sum(), 0.0) << m;
}

TEST(MedianSmooth, RemovesLoneSpike) {
  const F0Contour out = median_smooth_f0(F0Contour{{1, 1, 1, 9, 1, 1, 1}}, 3);
  EXPECT_EQ(out.values, (std::vector<double>{1, 1, 1, 1, 1, 1, 1}));
}

TEST(MedianSmooth, KernelOneIsIdentity) {
  testing::Rng rng(4);
  F0Contour f0;
  for (int i = 0; i < 100; ++i) f0.values.push_back(i % 7 == 0 ? 0.0 : testing::uniform(rng, 80, 800));
  EXPECT_EQ(median_smooth_f0(f0, 1), f0);
}

TEST(MedianSmooth, RejectsEvenOrNonPositiveKernel) {
  const F0Contour f0{{100, 100}};
  EXPECT_THROW(median_smooth_f0(f0, 2), ValidationError);
  EXPECT_THROW(median_smooth_f0(f0, 0), ValidationError);
  EXPECT_THROW(median_smooth_f0(f0, -3), ValidationError);
}

TEST(MedianSmooth, VibratoResidualMatchesReference) {
  const double fps = 44100.0 / 512.0;
  F0Contour f0;
  for (int i = 0; i < 200; ++i) f0.values.push_back(220.0 + 10.0 * std::sin(2.0 * std::numbers::pi * 6.0 * i / fps));
  const F0Contour out = median_smooth_f0(f0, 13);
  const auto ref = testing::reference_voiced_median(f0.values, 13);
  EXPECT_EQ(out.values, ref);
  double worst = 0.0;
  for (std::size_t i = 6; i + 6 < out.size(); ++i) worst = std::max(worst, std::abs(out.values[i] - 220.0));
  EXPECT_LT(worst, 3.0);
}

TEST(MedianSmooth, MatchesReferenceOnRandomContours) {
  testing::Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    F0Contour f0;
    const int n = testing::uniform_int(rng, 1, 60);
    for (int i = 0; i < n; ++i) {
      f0.values.push_back(testing::uniform_int(rng, 0, 4) == 0 ? 0.0 : testing::uniform(rng, 60, 900));
    }
    const int kernel = 2 * testing::uniform_int(rng, 0, 10) + 1;
    const F0Contour out = median_smooth_f0(f0, kernel);
    EXPECT_EQ(out.values, testing::reference_voiced_median(f0.values, kernel));
    for (std::size_t i = 0; i < f0.size(); ++i) {
      // Voicing is untouched and every output is an input sample of its run.
      EXPECT_EQ(out.values[i] > 0.0, f0.values[i] > 0.0);
      if (f0.values[i] > 0.0) {
        EXPECT_NE(std::find(f0.values.begin(), f0.values.end(), out.values[i]), f0.values.end());
      }
    }
    EXPECT_EQ(median_smooth_f0(F0Contour{std::vector<double>(static_cast<std::size_t>(n), 150.0)}, kernel).values,
              std::vector<double>(static_cast<std::size_t>(n), 150.0));
  }
}

TEST(LogF0, MasksUnvoiced) {
  const LogF0 l = log_f0_masked(F0Contour{{std::numbers::e, 0.0}});
  EXPECT_EQ(l.voiced, (std::vector<bool>{true, false}));
  EXPECT_DOUBLE_EQ(l.values[0], 1.0);
  EXPECT_EQ(l.voiced_count(), 1u);
}

TEST(LogF0, AllUnvoiced) {
  const LogF0 l = log_f0_masked(F0Contour{{0.0, 0.0, 0.0}});
  EXPECT_EQ(l.voiced_count(), 0u);
}

TEST(LogF0, OctaveIsLn2) {
  const LogF0 l = log_f0_masked(F0Contour{{200.0, 100.0}});
  EXPECT_NEAR(l.values[0] - l.values[1], 0.6931471805599453, 1e-15);
}

TEST(ValidateF0, RejectsOutOfRange) {
  EXPECT_THROW(validate_f0(F0Contour{{-1.0}}), ValidationError);
  EXPECT_THROW(validate_f0(F0Contour{{10.0}}), ValidationError);
  EXPECT_THROW(validate_f0(F0Contour{{2500.0}}), ValidationError);
  EXPECT_NO_THROW(validate_f0(F0Contour{{0.0, 440.0}}));
}

}  // namespace
}  // namespace svs
