#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.h"
#include "svs/align.h"
#include "svs/error.h"
#include "svs/regulator.h"

namespace svs {
namespace {

LogLikMatrix table(std::initializer_list<std::initializer_list<double>> rows) {
  LogLikMatrix m;
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m.values(r, c++) = v;
    ++r;
  }
  return m;
}

LogLikMatrix random_loglik(testing::Rng& rng, Eigen::Index t, Eigen::Index s) {
  return LogLikMatrix{testing::normal_matrix(rng, t, s)};
}

void expect_valid(const Durations& d, std::size_t phonemes, std::size_t frames) {
  ASSERT_EQ(d.size(), phonemes);
  for (int v : d.d) EXPECT_GE(v, 1);
  EXPECT_EQ(d.total(), frames);
}

TEST(GaussianLoglik, StandardNormalAtMean) {
  GaussianSeq g{Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  const auto ll = gaussian_loglik_matrix(Matrix::Zero(1, 1), g);
  EXPECT_NEAR(ll.values(0, 0), -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(ll.values(0, 0), -0.9189, 1e-4);
}

TEST(GaussianLoglik, ZeroResidualSumsOverDims) {
  Matrix mu(1, 3);
  mu << 0.3, -2.0, 5.0;
  const auto ll = gaussian_loglik_matrix(mu, GaussianSeq{mu, Matrix::Zero(1, 3)});
  EXPECT_NEAR(ll.values(0, 0), -2.7568, 1e-4);
}

TEST(GaussianLoglik, DecreasesWithDistance) {
  GaussianSeq g{Matrix::Zero(1, 1), Matrix::Constant(1, 1, 0.4)};
  Matrix x(5, 1);
  x << 0.0, 0.5, -1.0, 2.0, -3.5;
  const auto ll = gaussian_loglik_matrix(x, g);
  for (Eigen::Index t = 1; t < 5; ++t) EXPECT_LT(ll.values(t, 0), ll.values(t - 1, 0));
}

TEST(GaussianLoglik, MatchesClosedFormOnRandomInputs) {
  testing::Rng rng(1);
  const Matrix x = testing::random_matrix(rng, 6, 4);
  const GaussianSeq g = testing::random_gaussians(rng, 3, 4);
  const auto ll = gaussian_loglik_matrix(x, g);
  for (Eigen::Index t = 0; t < 6; ++t) {
    for (Eigen::Index s = 0; s < 3; ++s) {
      double expected = 0.0;
      for (Eigen::Index k = 0; k < 4; ++k) {
        const double sigma = std::exp(g.log_stds(s, k));
        const double z = (x(t, k) - g.means(s, k)) / sigma;
        expected += -0.5 * std::log(2.0 * std::numbers::pi) - g.log_stds(s, k) - 0.5 * z * z;
      }
      EXPECT_NEAR(ll.values(t, s), expected, 1e-12);
    }
  }
}

TEST(GaussianLoglik, DimensionMismatch) {
  GaussianSeq g{Matrix::Zero(2, 3), Matrix::Zero(2, 3)};
  EXPECT_THROW(gaussian_loglik_matrix(Matrix::Zero(4, 2), g), ValidationError);
}

TEST(Mas, SinglePhoneme) {
  EXPECT_EQ(mas(LogLikMatrix{Matrix::Zero(3, 1)}).d, (std::vector<int>{3}));
}

TEST(Mas, BlockDiagonal) {
  EXPECT_EQ(mas(table({{0, -10}, {0, -10}, {-10, 0}, {-10, 0}})).d, (std::vector<int>{2, 2}));
}

TEST(Mas, TiesAdvanceLate) {
  EXPECT_EQ(mas(LogLikMatrix{Matrix::Zero(5, 2)}).d, (std::vector<int>{4, 1}));
  EXPECT_EQ(mas(LogLikMatrix{Matrix::Zero(7, 3)}).d, (std::vector<int>{5, 1, 1}));
}

TEST(Mas, TooFewFrames) {
  EXPECT_THROW(mas(LogLikMatrix{Matrix::Zero(2, 3)}), ValidationError);
}

TEST(BruteForceMas, Examples) {
  EXPECT_EQ(brute_force_mas(LogLikMatrix{Matrix::Zero(2, 2)}).d, (std::vector<int>{1, 1}));
  EXPECT_EQ(brute_force_mas(table({{5, 0}, {0, 5}})).d, (std::vector<int>{1, 1}));
  EXPECT_EQ(brute_force_mas(LogLikMatrix{Matrix::Zero(5, 2)}).d, (std::vector<int>{4, 1}));
  EXPECT_THROW(brute_force_mas(LogLikMatrix{Matrix::Zero(13, 2)}), ValidationError);
  EXPECT_THROW(brute_force_mas(LogLikMatrix{Matrix::Zero(12, 6)}), ValidationError);
}

TEST(Mas, MatchesBruteForceOnRandom8x3) {
  testing::Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const auto ll = random_loglik(rng, 8, 3);
    const Durations a = mas(ll), b = brute_force_mas(ll);
    EXPECT_EQ(a, b);
    EXPECT_EQ(alignment_score(ll, a), alignment_score(ll, b));
  }
}

TEST(Mas, MatchesBruteForceWithTies) {
  // Small integer tables produce many equal-score paths.
  testing::Rng rng(99);
  for (int i = 0; i < 300; ++i) {
    const int s = testing::uniform_int(rng, 1, 5);
    const int t = testing::uniform_int(rng, s, 12);
    LogLikMatrix ll{Matrix(t, s)};
    for (Eigen::Index k = 0; k < ll.values.size(); ++k) ll.values.data()[k] = testing::uniform_int(rng, -1, 1);
    const Durations a = mas(ll);
    expect_valid(a, static_cast<std::size_t>(s), static_cast<std::size_t>(t));
    EXPECT_EQ(a, brute_force_mas(ll));
  }
}

TEST(Mas, ShiftInvariance) {
  testing::Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto ll = random_loglik(rng, 20, 6);
    LogLikMatrix shifted{ll.values.array() + testing::uniform(rng, -50, 50)};
    EXPECT_EQ(mas(ll), mas(shifted));
  }
}

struct NoteProblem {
  LogLikMatrix loglik;
  std::vector<std::size_t> map;
  NoteFrameSpans spans;
};

NoteProblem random_note_problem(testing::Rng& rng, int max_notes, int max_phonemes, int max_frames) {
  NoteProblem p;
  std::size_t frame = 0;
  const int notes = testing::uniform_int(rng, 1, max_notes);
  for (int n = 0; n < notes; ++n) {
    const int phonemes = testing::uniform_int(rng, 1, max_phonemes);
    const int frames = testing::uniform_int(rng, phonemes, max_frames);
    for (int k = 0; k < phonemes; ++k) p.map.push_back(static_cast<std::size_t>(n));
    p.spans.spans.push_back({frame, frame + static_cast<std::size_t>(frames)});
    frame += static_cast<std::size_t>(frames);
  }
  p.loglik.values = testing::normal_matrix(rng, static_cast<Eigen::Index>(frame),
                                           static_cast<Eigen::Index>(p.map.size()));
  return p;
}

TEST(MasNoteBounded, SinglePhonemeNoteTakesWholeSpan) {
  const std::vector<std::size_t> map = {0, 1, 1};
  const NoteFrameSpans spans{{{0, 2}, {2, 4}}};
  testing::Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto ll = random_loglik(rng, 4, 3);
    const Durations d = mas_note_bounded(ll, map, spans);
    EXPECT_EQ(d.d, (std::vector<int>{2, 1, 1}));
  }
}

TEST(MasNoteBounded, EqualsPerNoteBruteForce) {
  testing::Rng rng(77);
  const std::vector<std::size_t> map = {0, 0, 1, 1};
  for (int i = 0; i < 50; ++i) {
    const auto ll = random_loglik(rng, 8, 4);
    const std::size_t split = static_cast<std::size_t>(testing::uniform_int(rng, 2, 6));
    const NoteFrameSpans spans{{{0, split}, {split, 8}}};
    const Durations d = mas_note_bounded(ll, map, spans);
    const auto s = static_cast<Eigen::Index>(split);
    const Durations first = brute_force_mas(LogLikMatrix{ll.values.block(0, 0, s, 2)});
    const Durations second = brute_force_mas(LogLikMatrix{ll.values.block(s, 2, 8 - s, 2)});
    EXPECT_EQ(d.d, (std::vector<int>{first.d[0], first.d[1], second.d[0], second.d[1]}));
  }
}

TEST(MasNoteBounded, NeverCrossesNoteBoundaries) {
  testing::Rng rng(123);
  for (int i = 0; i < 200; ++i) {
    const NoteProblem p = random_note_problem(rng, 6, 4, 15);
    const Durations d = mas_note_bounded(p.loglik, p.map, p.spans);
    expect_valid(d, p.map.size(), p.spans.total_frames());
    const auto path = frame_to_phoneme(d).frame_to_phoneme;
    double total = 0.0;
    for (std::size_t n = 0; n < p.spans.spans.size(); ++n) {
      const FrameSpan& span = p.spans.spans[n];
      for (std::size_t t = span.start; t < span.end; ++t) EXPECT_EQ(p.map[path[t]], n);
      // Objective decomposes into per-note plain MAS on the sliced table.
      const auto first = static_cast<Eigen::Index>(std::find(p.map.begin(), p.map.end(), n) - p.map.begin());
      const auto count = static_cast<Eigen::Index>(std::count(p.map.begin(), p.map.end(), n));
      const LogLikMatrix sub{p.loglik.values.block(static_cast<Eigen::Index>(span.start), first,
                                                   static_cast<Eigen::Index>(span.length()), count)};
      total += alignment_score(sub, mas(sub));
    }
    EXPECT_NEAR(alignment_score(p.loglik, d), total, 1e-9);
  }
}

TEST(MasNoteBounded, Errors) {
  const std::vector<std::size_t> map = {0, 1, 1};
  EXPECT_THROW(mas_note_bounded(LogLikMatrix{Matrix::Zero(4, 3)}, map, NoteFrameSpans{{{0, 3}, {3, 4}}}),
               InfeasibleNoteError);
  EXPECT_THROW(mas_note_bounded(LogLikMatrix{Matrix::Zero(5, 3)}, map, NoteFrameSpans{{{0, 2}, {2, 4}}}),
               ValidationError);
}

TEST(FitSegmentGaussians, MeansAndVariances) {
  Matrix x(4, 1);
  x << 1.0, 3.0, 10.0, 10.0;
  const GaussianSeq g = fit_segment_gaussians(x, Durations{{2, 2}}, 0.0 + 1e-12);
  EXPECT_NEAR(g.means(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(g.log_stds(0, 0), 0.0, 1e-9);  // biased variance of {1, 3} is 1
  EXPECT_NEAR(g.means(1, 0), 10.0, 1e-15);
  EXPECT_LE(g.log_stds(1, 0), -7.0 + 1e-12);  // clamped
}

}  // namespace
}  // namespace svs
