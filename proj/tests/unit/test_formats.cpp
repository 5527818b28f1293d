#include <gtest/gtest.h>

#include "oracles.h"
#include "svs/error.h"
#include "svs/formats.h"

namespace svs {
namespace {

std::size_t error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError";
  return 0;
}

TEST(Formats, MatrixRoundTrip) {
  testing::Rng rng(1);
  const Matrix m = testing::normal_matrix(rng, 5, 3);
  EXPECT_EQ(parse_matrix(format_matrix(m)), m);
  EXPECT_EQ(parse_matrix("# latents\nMAT 2 2\n1 2\n\n3 4\n"), (Matrix(2, 2) << 1, 2, 3, 4).finished());
}

TEST(Formats, MatrixErrors) {
  EXPECT_EQ(error_line([] { parse_matrix("MAT 2 2\n1 2\n3\n"); }), 3u);
  EXPECT_EQ(error_line([] { parse_matrix("MAT 2 2\n1 2\n"); }), 3u);  // end of input
  EXPECT_EQ(error_line([] { parse_matrix("GAUSS 2 2\n"); }), 1u);
  EXPECT_EQ(error_line([] { parse_matrix("MAT 1 1\nx\n"); }), 2u);
}

TEST(Formats, GaussiansRoundTripAndValidate) {
  testing::Rng rng(2);
  const GaussianSeq g = testing::random_gaussians(rng, 3, 2);
  const GaussianSeq back = parse_gaussians(format_gaussians(g));
  EXPECT_EQ(back.means, g.means);
  EXPECT_EQ(back.log_stds, g.log_stds);
  EXPECT_THROW(parse_gaussians("GAUSS 1 1\n0\n9\n"), ParseError);
}

TEST(Formats, Durations) {
  const Durations d{{3, 1, 4}};
  EXPECT_EQ(parse_durations(format_durations(d)), d);
  EXPECT_EQ(format_durations(d), "DUR 3\n3\n1\n4\n");
  EXPECT_EQ(error_line([] { parse_durations("DUR 2\n1\n0\n"); }), 3u);
}

TEST(Formats, Predictions) {
  const std::vector<double> p = {0.1, 2.5, 1e-7};
  EXPECT_EQ(parse_predictions(format_predictions(p)), p);
}

TEST(Formats, MelRoundTrip) {
  testing::Rng rng(3);
  MelSpectrogram mel;
  mel.frames = testing::normal_matrix(rng, 4, 80);
  mel.config.hop = 256;
  mel.config.sample_rate = 22050;
  const MelSpectrogram back = parse_mel(format_mel(mel));
  EXPECT_EQ(back.frames, mel.frames);
  EXPECT_EQ(back.config.hop, 256);
  EXPECT_EQ(back.config.sample_rate, 22050);
}

TEST(Formats, F0) {
  const F0Contour f0{{0, 220.5, 221.25, 0}};
  EXPECT_EQ(parse_f0(format_f0(f0)), f0);
  EXPECT_EQ(error_line([] { parse_f0("100\n-3\n"); }), 2u);
}

TEST(Formats, WavRoundTripIsSixteenBitExact) {
  Wav w;
  for (int i = -5; i < 5; ++i) w.samples.push_back(i / 8.0);
  const std::string bytes = format_wav(w);
  EXPECT_EQ(bytes.size(), 44u + 2 * w.samples.size());
  const Wav back = parse_wav(bytes);
  EXPECT_EQ(back.sample_rate, 44100);
  EXPECT_EQ(back.samples, w.samples);
  EXPECT_EQ(format_wav(back), bytes);
}

TEST(Formats, WavClipsAndRejectsGarbage) {
  const Wav back = parse_wav(format_wav(Wav{44100, {2.0, -2.0}}));
  EXPECT_EQ(back.samples[0], 32767.0 / 32768.0);
  EXPECT_EQ(back.samples[1], -1.0);
  EXPECT_THROW(parse_wav("RIFF...."), ParseError);
}

TEST(Formats, NumbersAreShortestRoundTrip) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(86.0), "86");
  testing::Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = testing::uniform(rng, -1e6, 1e6);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

}  // namespace
}  // namespace svs
