#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "svs/score.h"
#include "svs/types.h"

namespace svs {

inline constexpr double kMinLogStd = -7.0;
inline constexpr double kMaxLogStd = 7.0;

/// Diagonal Gaussians, one row per step (phoneme or frame).
struct GaussianSeq {
  Matrix means;     // S x D
  Matrix log_stds;  // S x D

  Eigen::Index size() const { return means.rows(); }
  Eigen::Index dims() const { return means.cols(); }
  /// Shapes agree, entries finite, log-stds inside [-7, 7].
  void validate() const;
};

/// values(t, s) = log N(frame t | phoneme s). T x S.
struct LogLikMatrix {
  Matrix values;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index phonemes() const { return values.cols(); }
};

LogLikMatrix gaussian_loglik_matrix(const Matrix& latents, const GaussianSeq& priors);

/// Sum of values(t, phoneme of t) along the path described by `durations`.
/// Accumulates frame by frame from t = 0.
double alignment_score(const LogLikMatrix& loglik, const Durations& durations);

/// Monotonic alignment search.
///
/// Finds the monotonic, surjective frame -> phoneme path that maximizes the
/// summed log-likelihood. Among equally good paths the phoneme transitions are
/// taken as late as possible, later transitions first: the last phoneme's
/// onset is maximized, then the one before it, and so on.
Durations mas(const LogLikMatrix& loglik);

/// MAS restricted to note boundaries. Frames inside note n only align to
/// phonemes of note n; a note that owns a single phoneme gives it the whole
/// span without running the search.
Durations mas_note_bounded(const LogLikMatrix& loglik,
                           std::span<const std::size_t> phoneme_note_idx,
                           const NoteFrameSpans& spans);

/// Per-phoneme diagonal Gaussians estimated from the frames each phoneme
/// occupies: sample mean, and log-std from the (biased) variance plus
/// `variance_floor`, clamped to [-7, 7].
GaussianSeq fit_segment_gaussians(const Matrix& latents, const Durations& durations,
                                  double variance_floor);

inline constexpr Eigen::Index kBruteForceMaxFrames = 12;
inline constexpr Eigen::Index kBruteForceMaxPhonemes = 5;

/// Exhaustive search over every composition of T frames into S non-empty
/// runs, with the same tie rule as mas(). Test oracle; limited to T <= 12, S <= 5.
Durations brute_force_mas(const LogLikMatrix& loglik);

}  // namespace svs
