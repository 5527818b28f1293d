#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace svs {

/// Pitch value used for rests.
inline constexpr int kRestPitch = -1;

struct Note {
  int pitch = kRestPitch;  // MIDI 0..127 or kRestPitch
  double duration_sec = 0.0;

  bool is_rest() const noexcept { return pitch == kRestPitch; }
  bool operator==(const Note&) const = default;
};

/// One annotated utterance: phoneme stream, notes, and the phoneme -> note map.
/// Rests and breaths are ordinary notes that carry an explicit silence phoneme.
struct Score {
  std::string utt_id;
  std::vector<std::string> phonemes;
  std::vector<Note> notes;
  std::vector<std::size_t> phoneme_note_idx;
  // Optional per-phoneme flags (slur/aspirate markers). Kept verbatim, never interpreted.
  std::vector<std::string> flags;

  std::size_t phonemes_of_note(std::size_t note) const;
  double total_duration_sec() const;
  bool operator==(const Score&) const = default;
};

/// Half-open frame interval [start, end).
struct FrameSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  bool operator==(const FrameSpan&) const = default;
};

struct NoteFrameSpans {
  std::vector<FrameSpan> spans;

  std::size_t total_frames() const noexcept { return spans.empty() ? 0 : spans.back().end; }
  bool operator==(const NoteFrameSpans&) const = default;
};

/// Parses a single score line. `line_no` is used only for error positions.
/// Throws ParseError (Syntax, Mapping or Value).
Score parse_score(std::string_view line, std::size_t line_no = 1);

/// Parses a whole score document: one utterance per line, `#` comments and
/// blank lines skipped.
std::vector<Score> parse_score_document(std::string_view text);

/// Serializes to the line format accepted by parse_score (no trailing newline).
std::string format_score(const Score& score);

/// Checks every Score invariant; throws ValidationError.
void validate_score(const Score& score);

/// Frame boundaries from cumulative note durations:
/// boundary[i] = round(sum(duration[0..i]) * sample_rate / hop).
/// Throws InfeasibleNoteError when a note gets fewer frames than it has phonemes.
NoteFrameSpans note_frame_boundaries(const Score& score, double sample_rate, int hop);

/// Validates spans against a phoneme->note map and an expected frame count.
void check_spans(const NoteFrameSpans& spans, const std::vector<std::size_t>& phoneme_note_idx,
                 std::size_t total_frames);

}  // namespace svs
