#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "svs/score.h"
#include "svs/types.h"

namespace svs {

/// Frame -> phoneme index map implied by a set of durations.
struct PhonemeFrameExpansion {
  std::vector<std::size_t> frame_to_phoneme;
};

PhonemeFrameExpansion frame_to_phoneme(const Durations& durations);

/// Repeats row s of `values` durations.d[s] times.
Matrix expand(const Matrix& values, const Durations& durations);

/// Splits `total` units in proportion to `weights` (all > 0) by largest
/// remainder: floor every share, hand the leftover units to the largest
/// fractional parts (earlier index on ties), then lift any zero to one by
/// taking a unit from the currently largest share. Requires total >= weights.size().
std::vector<int> apportion(std::span<const double> weights, std::size_t total);

/// Rescales predicted phoneme durations so that every note's phonemes exactly
/// fill the note's frame span, keeping the within-note ratios.
Durations rhythm_adjust(std::span<const double> predicted,
                        std::span<const std::size_t> phoneme_note_idx,
                        const NoteFrameSpans& spans);

}  // namespace svs
