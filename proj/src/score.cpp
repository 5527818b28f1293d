#include "svs/score.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>

#include "svs/error.h"

namespace svs {

ParseError::ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& message)
    : Error(std::string(to_string(kind)) + " error at line " + std::to_string(line) +
            (column > 0 ? ", column " + std::to_string(column) : std::string()) + ": " + message),
      kind_(kind),
      line_(line),
      column_(column),
      detail_(message) {}

const char* to_string(ParseError::Kind kind) noexcept {
  switch (kind) {
    case ParseError::Kind::Syntax:
      return "syntax";
    case ParseError::Kind::Mapping:
      return "mapping";
    case ParseError::Kind::Value:
      return "value";
  }
  return "unknown";
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<Token> split_tokens(std::string_view field, std::size_t field_column) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < field.size()) {
    while (i < field.size() && is_space(field[i])) ++i;
    std::size_t start = i;
    while (i < field.size() && !is_space(field[i])) ++i;
    if (i > start) out.push_back({field.substr(start, i - start), field_column + start});
  }
  return out;
}

struct Field {
  std::string_view text;
  std::size_t column;
};

std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t bar = line.find('|', start);
    if (bar == std::string_view::npos) {
      fields.push_back({line.substr(start), start + 1});
      break;
    }
    fields.push_back({line.substr(start, bar - start), start + 1});
    start = bar + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::size_t Score::phonemes_of_note(std::size_t note) const {
  return static_cast<std::size_t>(
      std::count(phoneme_note_idx.begin(), phoneme_note_idx.end(), note));
}

double Score::total_duration_sec() const {
  double total = 0.0;
  for (const Note& n : notes) total += n.duration_sec;
  return total;
}

Score parse_score(std::string_view line, std::size_t line_no) {
  using Kind = ParseError::Kind;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  const auto fields = split_fields(line);
  if (fields.size() != 5 && fields.size() != 6) {
    throw ParseError(Kind::Syntax, line_no, 0,
                     "expected 5 or 6 '|'-separated fields, found " + std::to_string(fields.size()));
  }

  Score score;
  {
    auto id = split_tokens(fields[0].text, fields[0].column);
    if (id.size() != 1) {
      throw ParseError(Kind::Syntax, line_no, fields[0].column,
                       "utterance id must be a single non-empty token");
    }
    score.utt_id = std::string(id[0].text);
  }

  auto phonemes = split_tokens(fields[1].text, fields[1].column);
  if (phonemes.empty()) throw ParseError(Kind::Syntax, line_no, fields[1].column, "no phonemes");
  for (const Token& t : phonemes) score.phonemes.emplace_back(t.text);

  auto pitches = split_tokens(fields[2].text, fields[2].column);
  auto durations = split_tokens(fields[3].text, fields[3].column);
  if (pitches.empty()) throw ParseError(Kind::Syntax, line_no, fields[2].column, "no notes");
  if (pitches.size() != durations.size()) {
    throw ParseError(Kind::Syntax, line_no, fields[3].column,
                     std::to_string(pitches.size()) + " pitches but " +
                         std::to_string(durations.size()) + " durations");
  }

  for (std::size_t i = 0; i < pitches.size(); ++i) {
    Note note;
    const Token& p = pitches[i];
    if (iequals(p.text, "rest")) {
      note.pitch = kRestPitch;
    } else {
      long value = 0;
      if (!parse_number(p.text, value)) {
        throw ParseError(Kind::Syntax, line_no, p.column,
                         "pitch '" + std::string(p.text) + "' is not an integer or 'rest'");
      }
      if (value < 0 || value > 127) {
        throw ParseError(Kind::Value, line_no, p.column,
                         "pitch " + std::to_string(value) + " outside MIDI range 0..127");
      }
      note.pitch = static_cast<int>(value);
    }
    const Token& d = durations[i];
    if (!parse_number(d.text, note.duration_sec)) {
      throw ParseError(Kind::Syntax, line_no, d.column,
                       "duration '" + std::string(d.text) + "' is not a decimal number");
    }
    if (!std::isfinite(note.duration_sec) || note.duration_sec <= 0.0) {
      throw ParseError(Kind::Value, line_no, d.column,
                       "note duration must be positive, got " + std::string(d.text));
    }
    score.notes.push_back(note);
  }

  auto mapping = split_tokens(fields[4].text, fields[4].column);
  if (mapping.size() != score.phonemes.size()) {
    throw ParseError(Kind::Mapping, line_no, fields[4].column,
                     std::to_string(mapping.size()) + " note indices for " +
                         std::to_string(score.phonemes.size()) + " phonemes");
  }
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    const Token& m = mapping[i];
    unsigned long idx = 0;
    if (!parse_number(m.text, idx)) {
      throw ParseError(Kind::Syntax, line_no, m.column,
                       "note index '" + std::string(m.text) + "' is not a non-negative integer");
    }
    const std::size_t expected_prev = i == 0 ? 0 : score.phoneme_note_idx.back();
    if (i == 0 && idx != 0) {
      throw ParseError(Kind::Mapping, line_no, m.column, "first phoneme must map to note 0");
    }
    if (idx < expected_prev) {
      throw ParseError(Kind::Mapping, line_no, m.column, "note indices must be non-decreasing");
    }
    if (idx > expected_prev + 1) {
      throw ParseError(Kind::Mapping, line_no, m.column,
                       "note " + std::to_string(expected_prev + 1) + " has no phoneme");
    }
    if (idx >= score.notes.size()) {
      throw ParseError(Kind::Mapping, line_no, m.column,
                       "note index " + std::to_string(idx) + " out of range");
    }
    score.phoneme_note_idx.push_back(idx);
  }
  if (score.phoneme_note_idx.back() != score.notes.size() - 1) {
    throw ParseError(Kind::Mapping, line_no, fields[4].column,
                     "notes after " + std::to_string(score.phoneme_note_idx.back()) +
                         " have no phoneme");
  }

  if (fields.size() == 6) {
    auto flags = split_tokens(fields[5].text, fields[5].column);
    if (flags.size() != score.phonemes.size()) {
      throw ParseError(Kind::Syntax, line_no, fields[5].column,
                       std::to_string(flags.size()) + " flags for " +
                           std::to_string(score.phonemes.size()) + " phonemes");
    }
    for (const Token& t : flags) score.flags.emplace_back(t.text);
  }
  return score;
}

std::vector<Score> parse_score_document(std::string_view text) {
  std::vector<Score> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') {
      out.push_back(parse_score(line, line_no));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::string format_score(const Score& score) {
  auto join = [](const auto& items, auto&& fmt) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) s += ' ';
      s += fmt(items[i]);
    }
    return s;
  };
  std::string line = score.utt_id;
  line += '|';
  line += join(score.phonemes, [](const std::string& p) { return p; });
  line += '|';
  line += join(score.notes, [](const Note& n) {
    return n.is_rest() ? std::string("rest") : std::to_string(n.pitch);
  });
  line += '|';
  line += join(score.notes, [](const Note& n) { return format_double(n.duration_sec); });
  line += '|';
  line += join(score.phoneme_note_idx, [](std::size_t i) { return std::to_string(i); });
  if (!score.flags.empty()) {
    line += '|';
    line += join(score.flags, [](const std::string& f) { return f; });
  }
  return line;
}

void validate_score(const Score& score) {
  if (score.utt_id.empty()) throw ValidationError("score has empty utterance id");
  if (score.phonemes.empty() || score.notes.empty()) {
    throw ValidationError(score.utt_id + ": score needs at least one phoneme and one note");
  }
  if (score.phoneme_note_idx.size() != score.phonemes.size()) {
    throw ValidationError(score.utt_id + ": phoneme_note_idx length differs from phoneme count");
  }
  if (!score.flags.empty() && score.flags.size() != score.phonemes.size()) {
    throw ValidationError(score.utt_id + ": flag count differs from phoneme count");
  }
  for (std::size_t i = 0; i < score.notes.size(); ++i) {
    const Note& n = score.notes[i];
    if (!(n.duration_sec > 0.0) || !std::isfinite(n.duration_sec)) {
      throw ValidationError(score.utt_id + ": note " + std::to_string(i) +
                            " has non-positive duration");
    }
    if (!n.is_rest() && (n.pitch < 0 || n.pitch > 127)) {
      throw ValidationError(score.utt_id + ": note " + std::to_string(i) + " pitch out of range");
    }
  }
  const auto& map = score.phoneme_note_idx;
  if (map.front() != 0 || map.back() != score.notes.size() - 1) {
    throw ValidationError(score.utt_id + ": phoneme_note_idx must span notes 0.." +
                          std::to_string(score.notes.size() - 1));
  }
  for (std::size_t i = 1; i < map.size(); ++i) {
    if (map[i] < map[i - 1] || map[i] > map[i - 1] + 1) {
      throw ValidationError(score.utt_id + ": phoneme_note_idx not monotone/surjective at phoneme " +
                            std::to_string(i));
    }
  }
}

NoteFrameSpans note_frame_boundaries(const Score& score, double sample_rate, int hop) {
  if (!(sample_rate > 0.0) || hop <= 0) {
    throw ValidationError("note_frame_boundaries: sample_rate and hop must be positive");
  }
  validate_score(score);
  const double frames_per_sec = sample_rate / hop;

  NoteFrameSpans out;
  out.spans.reserve(score.notes.size());
  double cumulative = 0.0;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < score.notes.size(); ++i) {
    cumulative += score.notes[i].duration_sec;
    const auto boundary = static_cast<std::size_t>(std::llround(cumulative * sample_rate / hop));
    const FrameSpan span{prev, std::max(prev, boundary)};
    const std::size_t needed = score.phonemes_of_note(i);
    if (span.length() < needed) {
      throw InfeasibleNoteError(
          i, "quantizes to " + std::to_string(span.length()) + " frame(s) but carries " +
                 std::to_string(needed) + " phoneme(s) (" +
                 format_double(score.notes[i].duration_sec) + " s at " +
                 format_double(frames_per_sec) + " frames/s)");
    }
    out.spans.push_back(span);
    prev = span.end;
  }
  return out;
}

void check_spans(const NoteFrameSpans& spans, const std::vector<std::size_t>& phoneme_note_idx,
                 std::size_t total_frames) {
  if (phoneme_note_idx.empty()) throw ValidationError("empty phoneme_note_idx");
  const std::size_t n_notes = phoneme_note_idx.back() + 1;
  if (spans.spans.size() != n_notes) {
    throw ValidationError("have " + std::to_string(spans.spans.size()) + " note spans for " +
                          std::to_string(n_notes) + " notes");
  }
  for (std::size_t i = 1; i < phoneme_note_idx.size(); ++i) {
    if (phoneme_note_idx[i] < phoneme_note_idx[i - 1] ||
        phoneme_note_idx[i] > phoneme_note_idx[i - 1] + 1) {
      throw ValidationError("phoneme_note_idx not monotone/surjective at phoneme " +
                            std::to_string(i));
    }
  }
  if (phoneme_note_idx.front() != 0) throw ValidationError("phoneme_note_idx must start at 0");
  std::size_t expected_start = 0;
  for (std::size_t n = 0; n < n_notes; ++n) {
    const FrameSpan& s = spans.spans[n];
    if (s.start != expected_start || s.end < s.start) {
      throw ValidationError("note spans are not contiguous at note " + std::to_string(n));
    }
    const auto needed = static_cast<std::size_t>(
        std::count(phoneme_note_idx.begin(), phoneme_note_idx.end(), n));
    if (s.length() < needed) {
      throw InfeasibleNoteError(n, "span of " + std::to_string(s.length()) +
                                       " frame(s) cannot hold " + std::to_string(needed) +
                                       " phoneme(s)");
    }
    expected_start = s.end;
  }
  if (expected_start != total_frames) {
    throw ValidationError("note spans cover " + std::to_string(expected_start) +
                          " frames but the utterance has " + std::to_string(total_frames));
  }
}

}  // namespace svs
