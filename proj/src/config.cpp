#include "svs/config.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "svs/error.h"
#include "svs/formats.h"

namespace svs {

namespace {

using Kind = ParseError::Kind;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Binding {
  std::function<void(std::string_view, std::size_t)> set;
  std::function<std::string()> get;
};

double parse_real(std::string_view v, std::size_t line) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ParseError(Kind::Syntax, line, 0, "'" + std::string(v) + "' is not a finite number");
  }
  return out;
}

template <typename Int>
Int parse_integer(std::string_view v, std::size_t line) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParseError(Kind::Syntax, line, 0, "'" + std::string(v) + "' is not an integer");
  }
  return out;
}

Binding real(double& field) {
  return {[&field](std::string_view v, std::size_t line) { field = parse_real(v, line); },
          [&field] { return format_number(field); }};
}

template <typename Int>
Binding integer(Int& field) {
  return {[&field](std::string_view v, std::size_t line) { field = parse_integer<Int>(v, line); },
          [&field] { return std::to_string(field); }};
}

// Ordered as documented in config.h.
std::vector<std::pair<std::string, Binding>> bindings(PipelineConfig& c) {
  return {
      {"mel.sample_rate", real(c.mel.sample_rate)},
      {"mel.fft_size", integer(c.mel.fft_size)},
      {"mel.win_size", integer(c.mel.win_size)},
      {"mel.hop", integer(c.mel.hop)},
      {"mel.n_mels", integer(c.mel.n_mels)},
      {"mel.fmin", real(c.mel.fmin)},
      {"mel.fmax", real(c.mel.fmax)},
      {"mel.log_floor", real(c.mel.log_floor)},
      {"f0.kernel", integer(c.median_kernel)},
      {"loss.lambda_l", real(c.weights.lambda_l)},
      {"loss.lambda_s", real(c.weights.lambda_s)},
      {"loss.fm", real(c.weights.fm)},
      {"loss.mel", real(c.weights.mel)},
      {"loss.pitch", real(c.weights.pitch)},
      {"loss.kl_a", real(c.weights.kl_a)},
      {"loss.kl_p", real(c.weights.kl_p)},
      {"loss.dur", real(c.weights.dur)},
      {"sample.tau", real(c.tau)},
      {"synth.n_harmonics", integer(c.synth.n_harmonics)},
      {"synth.vibrato_rate", real(c.synth.vibrato_rate)},
      {"synth.vibrato_depth", real(c.synth.vibrato_depth)},
      {"synth.bend_depth", real(c.synth.bend_depth)},
      {"synth.bend_frames", integer(c.synth.bend_frames)},
      {"synth.noise_level", real(c.synth.noise_level)},
      {"synth.gain", real(c.synth.gain)},
      {"synth.timbre_depth", real(c.synth.timbre_depth)},
      {"synth.seed", integer(c.synth.seed)},
  };
}

}  // namespace

void PipelineConfig::validate() const {
  mel.validate();
  if (median_kernel < 1 || median_kernel % 2 == 0) {
    throw ValidationError("f0.kernel must be odd and positive");
  }
  weights.validate();
  if (!(tau >= 0.0)) throw ValidationError("sample.tau must be non-negative");
  if (synth.sample_rate != mel.sample_rate || synth.hop != mel.hop) {
    throw ValidationError("synth sample rate/hop must follow the mel settings");
  }
  synth.validate();
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  PipelineConfig config;
  auto table = bindings(config);
  std::map<std::string, Binding*, std::less<>> by_key;
  for (auto& [key, binding] : table) by_key.emplace(key, &binding);

  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(Kind::Syntax, line_no, 0, "expected 'key = value'");
      }
      const std::string_view key = trim(line.substr(0, eq));
      const std::string_view value = trim(line.substr(eq + 1));
      auto it = by_key.find(key);
      if (it == by_key.end()) {
        throw ParseError(Kind::Syntax, line_no, 0, "unknown key '" + std::string(key) + "'");
      }
      if (!seen.insert(std::string(key)).second) {
        throw ParseError(Kind::Syntax, line_no, 0, "duplicate key '" + std::string(key) + "'");
      }
      it->second->set(value, line_no);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }

  if (!seen.contains("mel.fmax")) config.mel.fmax = config.mel.sample_rate / 2.0;
  config.synth.sample_rate = config.mel.sample_rate;
  config.synth.hop = config.mel.hop;
  config.validate();
  return config;
}

std::string format_pipeline_config(const PipelineConfig& config) {
  PipelineConfig copy = config;
  std::string out;
  for (auto& [key, binding] : bindings(copy)) out += key + " = " + binding.get() + "\n";
  return out;
}

}  // namespace svs
