#include "svs/formats.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>

#include "svs/error.h"

namespace svs {

namespace {

using Kind = ParseError::Kind;

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

// Splits into non-empty, non-comment lines of whitespace-separated tokens.
std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t pos = 0, number = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++number;
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\r')) ++i;
      const std::size_t start = i;
      while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t' && raw[i] != '\r') ++i;
      if (i > start) line.tokens.push_back(raw.substr(start, i - start));
    }
    if (!line.tokens.empty() && line.tokens.front().front() != '#') lines.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

double to_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(Kind::Syntax, line, 0, "'" + std::string(tok) + "' is not a number");
  }
  if (!std::isfinite(v)) throw ParseError(Kind::Value, line, 0, "non-finite value");
  return v;
}

long long to_int(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(Kind::Syntax, line, 0, "'" + std::string(tok) + "' is not an integer");
  }
  return v;
}

std::size_t to_count(std::string_view tok, std::size_t line) {
  const long long v = to_int(tok, line);
  if (v < 0) throw ParseError(Kind::Value, line, 0, "count must be non-negative");
  return static_cast<std::size_t>(v);
}

const Line& header(const std::vector<Line>& lines, std::string_view tag, std::size_t n_fields) {
  if (lines.empty()) throw ParseError(Kind::Syntax, 1, 0, "missing " + std::string(tag) + " header");
  const Line& h = lines.front();
  if (h.tokens.front() != tag || h.tokens.size() != n_fields + 1) {
    throw ParseError(Kind::Syntax, h.number, 0,
                     "expected header '" + std::string(tag) + "' with " +
                         std::to_string(n_fields) + " field(s)");
  }
  return h;
}

void expect_body_lines(const std::vector<Line>& lines, std::size_t expected) {
  if (lines.size() - 1 != expected) {
    const std::size_t at = lines.size() > expected + 1 ? lines[expected + 1].number
                                                         : lines.back().number + 1;
    throw ParseError(Kind::Syntax, at, 0,
                     "expected " + std::to_string(expected) + " data line(s), found " +
                         std::to_string(lines.size() - 1));
  }
}

void read_rows(const std::vector<Line>& lines, std::size_t first, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const Line& line = lines[first + static_cast<std::size_t>(r)];
    if (line.tokens.size() != static_cast<std::size_t>(m.cols())) {
      throw ParseError(Kind::Syntax, line.number, 0,
                       "expected " + std::to_string(m.cols()) + " values, found " +
                           std::to_string(line.tokens.size()));
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = to_double(line.tokens[static_cast<std::size_t>(c)], line.number);
    }
  }
}

void write_rows(const Matrix& m, std::string& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ' ';
      out += format_number(m(r, c));
    }
    out += '\n';
  }
}

std::vector<double> read_column(const std::vector<Line>& lines, std::size_t first) {
  std::vector<double> out;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (lines[i].tokens.size() != 1) {
      throw ParseError(Kind::Syntax, lines[i].number, 0, "expected one value per line");
    }
    out.push_back(to_double(lines[i].tokens[0], lines[i].number));
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Matrix parse_matrix(std::string_view text) {
  const auto lines = tokenize(text);
  const Line& h = header(lines, "MAT", 2);
  Matrix m(static_cast<Eigen::Index>(to_count(h.tokens[1], h.number)),
           static_cast<Eigen::Index>(to_count(h.tokens[2], h.number)));
  expect_body_lines(lines, static_cast<std::size_t>(m.rows()));
  read_rows(lines, 1, m);
  return m;
}

std::string format_matrix(const Matrix& m) {
  std::string out = "MAT " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  write_rows(m, out);
  return out;
}

GaussianSeq parse_gaussians(std::string_view text) {
  const auto lines = tokenize(text);
  const Line& h = header(lines, "GAUSS", 2);
  const auto s = static_cast<Eigen::Index>(to_count(h.tokens[1], h.number));
  const auto d = static_cast<Eigen::Index>(to_count(h.tokens[2], h.number));
  expect_body_lines(lines, static_cast<std::size_t>(2 * s));
  GaussianSeq g{Matrix(s, d), Matrix(s, d)};
  read_rows(lines, 1, g.means);
  read_rows(lines, 1 + static_cast<std::size_t>(s), g.log_stds);
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw ParseError(Kind::Value, h.number, 0, e.what());
  }
  return g;
}

std::string format_gaussians(const GaussianSeq& g) {
  std::string out = "GAUSS " + std::to_string(g.size()) + " " + std::to_string(g.dims()) + "\n";
  write_rows(g.means, out);
  write_rows(g.log_stds, out);
  return out;
}

Durations parse_durations(std::string_view text) {
  const auto lines = tokenize(text);
  const Line& h = header(lines, "DUR", 1);
  const std::size_t n = to_count(h.tokens[1], h.number);
  expect_body_lines(lines, n);
  Durations d;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (line.tokens.size() != 1) {
      throw ParseError(Kind::Syntax, line.number, 0, "expected one integer per line");
    }
    const long long v = to_int(line.tokens[0], line.number);
    if (v < 1 || v > 1'000'000'000) {
      throw ParseError(Kind::Value, line.number, 0, "duration must be a positive frame count");
    }
    d.d.push_back(static_cast<int>(v));
  }
  return d;
}

std::string format_durations(const Durations& d) {
  std::string out = "DUR " + std::to_string(d.size()) + "\n";
  for (int v : d.d) out += std::to_string(v) + "\n";
  return out;
}

std::vector<double> parse_predictions(std::string_view text) {
  const auto lines = tokenize(text);
  const Line& h = header(lines, "PRED", 1);
  expect_body_lines(lines, to_count(h.tokens[1], h.number));
  return read_column(lines, 1);
}

std::string format_predictions(std::span<const double> values) {
  std::string out = "PRED " + std::to_string(values.size()) + "\n";
  for (double v : values) out += format_number(v) + "\n";
  return out;
}

MelSpectrogram parse_mel(std::string_view text) {
  const auto lines = tokenize(text);
  const Line& h = header(lines, "MEL", 4);
  MelSpectrogram mel;
  const auto t = static_cast<Eigen::Index>(to_count(h.tokens[1], h.number));
  const auto n_mels = static_cast<Eigen::Index>(to_count(h.tokens[2], h.number));
  mel.config.sample_rate = to_double(h.tokens[3], h.number);
  mel.config.hop = static_cast<int>(to_count(h.tokens[4], h.number));
  mel.config.n_mels = static_cast<int>(n_mels);
  mel.config.fmax = mel.config.sample_rate / 2.0;
  if (!(mel.config.sample_rate > 0.0) || mel.config.hop <= 0) {
    throw ParseError(Kind::Value, h.number, 0, "sample rate and hop must be positive");
  }
  expect_body_lines(lines, static_cast<std::size_t>(t));
  mel.frames.resize(t, n_mels);
  read_rows(lines, 1, mel.frames);
  return mel;
}

std::string format_mel(const MelSpectrogram& mel) {
  std::string out = "MEL " + std::to_string(mel.frames.rows()) + " " +
                    std::to_string(mel.frames.cols()) + " " +
                    format_number(mel.config.sample_rate) + " " + std::to_string(mel.config.hop) +
                    "\n";
  write_rows(mel.frames, out);
  return out;
}

F0Contour parse_f0(std::string_view text) {
  const auto lines = tokenize(text);
  F0Contour f0{read_column(lines, 0)};
  for (std::size_t i = 0; i < f0.values.size(); ++i) {
    if (f0.values[i] < 0.0) {
      throw ParseError(Kind::Value, lines[i].number, 0, "F0 must be non-negative");
    }
  }
  return f0;
}

std::string format_f0(const F0Contour& f0) {
  std::string out;
  for (double v : f0.values) out += format_number(v) + "\n";
  return out;
}

namespace {

std::uint32_t read_u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_u16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xff);
  out += static_cast<char>((v >> 8) & 0xff);
}

[[noreturn]] void wav_error(const std::string& what) {
  throw ParseError(Kind::Syntax, 1, 0, "WAV: " + what);
}

}  // namespace

Wav parse_wav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    wav_error("not a RIFF/WAVE file");
  }
  std::optional<Wav> wav;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::string_view id = b.substr(pos, 4);
    const std::size_t size = read_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > b.size()) wav_error("truncated '" + std::string(id) + "' chunk");
    if (id == "fmt ") {
      if (size < 16) wav_error("short fmt chunk");
      const auto format = read_u16(b, body);
      const auto channels = read_u16(b, body + 2);
      const auto rate = read_u32(b, body + 4);
      const auto bits = read_u16(b, body + 14);
      if (format != 1) wav_error("only PCM is supported");
      if (channels != 1) wav_error("expected mono, found " + std::to_string(channels) + " channels");
      if (bits != 16) wav_error("expected 16-bit samples, found " + std::to_string(bits));
      wav.emplace();
      wav->sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) wav_error("data chunk before fmt chunk");
      wav->samples.resize(size / 2);
      for (std::size_t i = 0; i < size / 2; ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16(b, body + 2 * i));
        wav->samples[i] = raw / 32768.0;
      }
      return *wav;
    }
    pos = body + size + (size & 1);
  }
  wav_error("no data chunk");
}

std::string format_wav(const Wav& wav) {
  const auto data_bytes = static_cast<std::uint32_t>(wav.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(wav.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(wav.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : wav.samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const long q = std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

}  // namespace svs
