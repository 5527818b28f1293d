#include "svs/regulator.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "svs/error.h"

namespace svs {

PhonemeFrameExpansion frame_to_phoneme(const Durations& durations) {
  PhonemeFrameExpansion out;
  out.frame_to_phoneme.reserve(durations.total());
  for (std::size_t s = 0; s < durations.size(); ++s) {
    if (durations.d[s] < 1) {
      throw ValidationError("phoneme " + std::to_string(s) + " has duration " +
                            std::to_string(durations.d[s]));
    }
    out.frame_to_phoneme.insert(out.frame_to_phoneme.end(), static_cast<std::size_t>(durations.d[s]),
                                s);
  }
  return out;
}

Matrix expand(const Matrix& values, const Durations& durations) {
  if (static_cast<std::size_t>(values.rows()) != durations.size()) {
    throw ValidationError("expand: " + std::to_string(values.rows()) + " rows vs " +
                          std::to_string(durations.size()) + " durations");
  }
  const auto map = frame_to_phoneme(durations).frame_to_phoneme;
  Matrix out(static_cast<Eigen::Index>(map.size()), values.cols());
  for (std::size_t t = 0; t < map.size(); ++t) {
    out.row(static_cast<Eigen::Index>(t)) = values.row(static_cast<Eigen::Index>(map[t]));
  }
  return out;
}

std::vector<int> apportion(std::span<const double> weights, std::size_t total) {
  const std::size_t n = weights.size();
  if (n == 0) throw ValidationError("apportion: no weights");
  if (total < n) {
    throw ValidationError("apportion: " + std::to_string(total) + " units for " +
                          std::to_string(n) + " parts");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("apportion: weights must be positive");
    sum += w;
  }

  // Shares in 32.32 fixed point so that ulp-level noise (e.g. from scaling all
  // weights) cannot change floors or the remainder order.
  constexpr int kFracBits = 32;
  constexpr std::int64_t kFracMask = (std::int64_t{1} << kFracBits) - 1;
  std::vector<int> out(n);
  std::vector<std::int64_t> frac(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = weights[i] / sum * static_cast<double>(total);
    const auto fixed = static_cast<std::int64_t>(std::llround(std::ldexp(share, kFracBits)));
    out[i] = static_cast<int>(fixed >> kFracBits);
    frac[i] = fixed & kFracMask;
    assigned += static_cast<std::size_t>(out[i]);
  }
  if (assigned > total) throw Error("apportion: floors exceed total");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % n, ++assigned) ++out[order[k]];

  for (std::size_t i = 0; i < n; ++i) {
    if (out[i] > 0) continue;
    auto donor = std::max_element(out.begin(), out.end());
    --*donor;
    out[i] = 1;
  }
  return out;
}

Durations rhythm_adjust(std::span<const double> predicted,
                        std::span<const std::size_t> phoneme_note_idx,
                        const NoteFrameSpans& spans) {
  if (predicted.size() != phoneme_note_idx.size()) {
    throw ValidationError("rhythm_adjust: " + std::to_string(predicted.size()) +
                          " predictions for " + std::to_string(phoneme_note_idx.size()) +
                          " phonemes");
  }
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!(predicted[i] > 0.0) || !std::isfinite(predicted[i])) {
      throw ValidationError("rhythm_adjust: predicted duration of phoneme " + std::to_string(i) +
                            " must be positive");
    }
  }
  check_spans(spans, {phoneme_note_idx.begin(), phoneme_note_idx.end()}, spans.total_frames());

  Durations out;
  out.d.reserve(predicted.size());
  std::size_t first = 0;
  for (std::size_t note = 0; note < spans.spans.size(); ++note) {
    std::size_t last = first;
    while (last < phoneme_note_idx.size() && phoneme_note_idx[last] == note) ++last;
    const auto part = apportion(predicted.subspan(first, last - first), spans.spans[note].length());
    out.d.insert(out.d.end(), part.begin(), part.end());
    first = last;
  }
  return out;
}

}  // namespace svs
