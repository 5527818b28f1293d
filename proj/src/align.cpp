#include "svs/align.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "svs/error.h"

namespace svs {

void GaussianSeq::validate() const {
  if (means.rows() != log_stds.rows() || means.cols() != log_stds.cols()) {
    throw ValidationError("GaussianSeq: means and log_stds shapes differ");
  }
  if (!means.allFinite() || !log_stds.allFinite()) {
    throw ValidationError("GaussianSeq: non-finite entry");
  }
  if (log_stds.size() > 0 &&
      (log_stds.minCoeff() < kMinLogStd || log_stds.maxCoeff() > kMaxLogStd)) {
    throw ValidationError("GaussianSeq: log_std outside [-7, 7]");
  }
}

LogLikMatrix gaussian_loglik_matrix(const Matrix& latents, const GaussianSeq& priors) {
  priors.validate();
  if (latents.cols() != priors.dims()) {
    throw ValidationError("gaussian_loglik_matrix: latent dim " + std::to_string(latents.cols()) +
                          " vs prior dim " + std::to_string(priors.dims()));
  }
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  const Eigen::Index n_frames = latents.rows();
  const Eigen::Index n_phonemes = priors.size();
  const Eigen::Index dims = priors.dims();

  const Matrix inv_var = (-2.0 * priors.log_stds.array()).exp().matrix();
  LogLikMatrix out{Matrix(n_frames, n_phonemes)};
  for (Eigen::Index s = 0; s < n_phonemes; ++s) {
    const double constant = -static_cast<double>(dims) * half_log_2pi - priors.log_stds.row(s).sum();
    for (Eigen::Index t = 0; t < n_frames; ++t) {
      double quad = 0.0;
      for (Eigen::Index k = 0; k < dims; ++k) {
        const double r = latents(t, k) - priors.means(s, k);
        quad += r * r * inv_var(s, k);
      }
      out.values(t, s) = constant - 0.5 * quad;
    }
  }
  return out;
}

double alignment_score(const LogLikMatrix& loglik, const Durations& durations) {
  if (durations.size() != static_cast<std::size_t>(loglik.phonemes()) ||
      durations.total() != static_cast<std::size_t>(loglik.frames())) {
    throw ValidationError("alignment_score: durations do not match the matrix");
  }
  double score = 0.0;
  Eigen::Index t = 0;
  for (std::size_t s = 0; s < durations.size(); ++s) {
    for (int k = 0; k < durations.d[s]; ++k, ++t) {
      score += loglik.values(t, static_cast<Eigen::Index>(s));
    }
  }
  return score;
}

Durations mas(const LogLikMatrix& loglik) {
  const Eigen::Index n_frames = loglik.frames();
  const Eigen::Index n_phonemes = loglik.phonemes();
  if (n_phonemes < 1) throw ValidationError("mas: no phonemes");
  if (n_frames < n_phonemes) {
    throw ValidationError("mas: " + std::to_string(n_frames) + " frames cannot cover " +
                          std::to_string(n_phonemes) + " phonemes");
  }
  if (!loglik.values.allFinite()) throw ValidationError("mas: non-finite log-likelihood");

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  // best(t, s): best score of frames 0..t with frame t on phoneme s.
  Matrix best = Matrix::Constant(n_frames, n_phonemes, kNegInf);
  best(0, 0) = loglik.values(0, 0);
  for (Eigen::Index t = 1; t < n_frames; ++t) {
    // Phoneme s at frame t needs s <= t and S-1-s <= T-1-t.
    const Eigen::Index lo = std::max<Eigen::Index>(0, n_phonemes - (n_frames - t));
    const Eigen::Index hi = std::min(t, n_phonemes - 1);
    for (Eigen::Index s = lo; s <= hi; ++s) {
      const double stay = best(t - 1, s);
      const double advance = s > 0 ? best(t - 1, s - 1) : kNegInf;
      best(t, s) = std::max(stay, advance) + loglik.values(t, s);
    }
  }

  Durations out{std::vector<int>(static_cast<std::size_t>(n_phonemes), 0)};
  Eigen::Index s = n_phonemes - 1;
  for (Eigen::Index t = n_frames - 1; t > 0; --t) {
    ++out.d[static_cast<std::size_t>(s)];
    // Ties go to the previous phoneme, pushing this phoneme's onset later.
    if (s > 0 && (s == t || best(t - 1, s - 1) >= best(t - 1, s))) --s;
  }
  ++out.d[static_cast<std::size_t>(s)];
  return out;
}

Durations mas_note_bounded(const LogLikMatrix& loglik,
                           std::span<const std::size_t> phoneme_note_idx,
                           const NoteFrameSpans& spans) {
  if (phoneme_note_idx.size() != static_cast<std::size_t>(loglik.phonemes())) {
    throw ValidationError("mas_note_bounded: " + std::to_string(phoneme_note_idx.size()) +
                          " mapped phonemes vs " + std::to_string(loglik.phonemes()) +
                          " matrix columns");
  }
  check_spans(spans, {phoneme_note_idx.begin(), phoneme_note_idx.end()},
              static_cast<std::size_t>(loglik.frames()));

  Durations out;
  out.d.reserve(phoneme_note_idx.size());
  std::size_t first = 0;
  for (std::size_t note = 0; note < spans.spans.size(); ++note) {
    std::size_t last = first;
    while (last < phoneme_note_idx.size() && phoneme_note_idx[last] == note) ++last;
    const FrameSpan& span = spans.spans[note];
    const std::size_t count = last - first;
    if (count == 1) {
      out.d.push_back(static_cast<int>(span.length()));
    } else {
      LogLikMatrix sub{loglik.values.block(static_cast<Eigen::Index>(span.start),
                                           static_cast<Eigen::Index>(first),
                                           static_cast<Eigen::Index>(span.length()),
                                           static_cast<Eigen::Index>(count))};
      const Durations part = mas(sub);
      out.d.insert(out.d.end(), part.d.begin(), part.d.end());
    }
    first = last;
  }
  return out;
}

GaussianSeq fit_segment_gaussians(const Matrix& latents, const Durations& durations,
                                  double variance_floor) {
  if (durations.total() != static_cast<std::size_t>(latents.rows())) {
    throw ValidationError("fit_segment_gaussians: durations cover " +
                          std::to_string(durations.total()) + " frames, latents have " +
                          std::to_string(latents.rows()));
  }
  if (!(variance_floor > 0.0)) throw ValidationError("fit_segment_gaussians: floor must be positive");
  const auto n = static_cast<Eigen::Index>(durations.size());
  GaussianSeq out{Matrix(n, latents.cols()), Matrix(n, latents.cols())};
  Eigen::Index start = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    const int len = durations.d[static_cast<std::size_t>(s)];
    if (len < 1) throw ValidationError("fit_segment_gaussians: empty segment");
    const auto seg = latents.middleRows(start, len);
    const Eigen::RowVectorXd mean = seg.colwise().mean();
    const Eigen::RowVectorXd var =
        (seg.rowwise() - mean).array().square().colwise().sum().matrix() / static_cast<double>(len);
    out.means.row(s) = mean;
    out.log_stds.row(s) =
        (0.5 * (var.array() + variance_floor).log()).cwiseMax(kMinLogStd).cwiseMin(kMaxLogStd);
    start += len;
  }
  return out;
}

namespace {

struct BruteForceSearch {
  const LogLikMatrix& loglik;
  int n_frames;
  int n_phonemes;
  std::vector<int> current;
  Durations best;
  double best_score = -std::numeric_limits<double>::infinity();
  bool found = false;

  // Tie rule shared with mas(): prefer the later onset of the last phoneme,
  // then of the one before it, i.e. the smaller duration read from the back.
  static bool later_onsets(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = a.size(); i-- > 0;) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  }

  void consider() {
    const double score = alignment_score(loglik, Durations{current});
    if (!found || score > best_score || (score == best_score && later_onsets(current, best.d))) {
      best_score = score;
      best.d = current;
      found = true;
    }
  }

  void recurse(int phoneme, int frames_left) {
    const int remaining_phonemes = n_phonemes - phoneme;
    if (remaining_phonemes == 1) {
      current[static_cast<std::size_t>(phoneme)] = frames_left;
      consider();
      return;
    }
    for (int d = 1; d <= frames_left - (remaining_phonemes - 1); ++d) {
      current[static_cast<std::size_t>(phoneme)] = d;
      recurse(phoneme + 1, frames_left - d);
    }
  }
};

}  // namespace

Durations brute_force_mas(const LogLikMatrix& loglik) {
  const Eigen::Index n_frames = loglik.frames();
  const Eigen::Index n_phonemes = loglik.phonemes();
  if (n_frames > kBruteForceMaxFrames || n_phonemes > kBruteForceMaxPhonemes) {
    throw ValidationError("brute_force_mas: instance " + std::to_string(n_frames) + "x" +
                          std::to_string(n_phonemes) + " exceeds the 12x5 enumeration limit");
  }
  if (n_phonemes < 1 || n_frames < n_phonemes) {
    throw ValidationError("brute_force_mas: need 1 <= S <= T");
  }
  BruteForceSearch search{loglik, static_cast<int>(n_frames), static_cast<int>(n_phonemes),
                          std::vector<int>(static_cast<std::size_t>(n_phonemes), 0), {}};
  search.recurse(0, static_cast<int>(n_frames));
  return search.best;
}

}  // namespace svs
