#include "svs/synth.h"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "svs/error.h"
#include "svs/regulator.h"

namespace svs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform_pm1(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

std::uint64_t fnv1a_step(std::uint64_t h, unsigned char c) {
  h ^= c;
  h *= 0x100000001b3ULL;
  // Extra avalanche so consecutive draws are not nearly collinear.
  h ^= h >> 29;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 32;
  return h;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

double midi_to_hz(double midi) {
  // Split off whole octaves so that +12 semitones is an exact doubling.
  const double offset = midi - 69.0;
  const double octaves = std::floor(offset / 12.0);
  return std::ldexp(440.0 * std::exp2((offset - 12.0 * octaves) / 12.0), static_cast<int>(octaves));
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("invalid synth config: " + what); };
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) fail("sample_rate must be positive");
  if (hop <= 0) fail("hop must be positive");
  if (n_harmonics < 1) fail("n_harmonics must be at least 1");
  if (!(vibrato_rate >= 0.0) || !(vibrato_depth >= 0.0) || !(bend_depth >= 0.0)) {
    fail("vibrato rate and depths must be non-negative");
  }
  if (bend_frames < 0) fail("bend_frames must be non-negative");
  if (!(noise_level >= 0.0 && noise_level < 1.0)) fail("noise_level must lie in [0, 1)");
  if (!(gain >= 0.0) || !std::isfinite(gain)) fail("gain must be non-negative");
  if (!(timbre_depth >= 0.0) || !std::isfinite(timbre_depth)) fail("timbre_depth must be non-negative");
}

std::vector<double> phoneme_envelope(std::string_view phoneme, int n_harmonics, double depth) {
  // Independent hashed gain in [-1, 1) per (phoneme, harmonic) pair.
  std::vector<double> env(static_cast<std::size_t>(n_harmonics));
  std::uint64_t h = fnv1a(phoneme);
  for (double& e : env) {
    h = fnv1a_step(h, 0x9e);
    e = std::exp(depth * (static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0));
  }
  return env;
}

SynthUtterance generate_utterance(const Score& score, const SynthConfig& cfg) {
  cfg.validate();
  SynthUtterance out;
  out.spans = note_frame_boundaries(score, cfg.sample_rate, cfg.hop);
  const std::size_t n_frames = out.spans.total_frames();

  const std::vector<double> ones(score.phonemes.size(), 1.0);
  out.durations = rhythm_adjust(ones, score.phoneme_note_idx, out.spans);
  const auto phoneme_of_frame = frame_to_phoneme(out.durations).frame_to_phoneme;

  out.f0.values.assign(n_frames, 0.0);
  for (std::size_t n = 0; n < score.notes.size(); ++n) {
    const Note& note = score.notes[n];
    if (note.is_rest()) continue;
    const double base = midi_to_hz(note.pitch);
    const FrameSpan& span = out.spans.spans[n];
    for (std::size_t f = span.start; f < span.end; ++f) {
      const double j = static_cast<double>(f - span.start);
      const double t = j * cfg.hop / cfg.sample_rate;
      double hz = base + cfg.vibrato_depth * std::sin(kTwoPi * cfg.vibrato_rate * t);
      if (cfg.bend_frames > 0 && j < cfg.bend_frames) {
        hz -= cfg.bend_depth * (1.0 - j / cfg.bend_frames);
      }
      if (!(hz > kMinVoicedHz)) {
        throw ValidationError("synth: note " + std::to_string(n) +
                              " drops below 20 Hz with the configured bend/vibrato");
      }
      out.f0.values[f] = hz;
    }
  }

  // Harmonic amplitudes env_k / k, normalized so the periodic part peaks at <= gain.
  std::vector<std::vector<double>> amplitudes;
  amplitudes.reserve(score.phonemes.size());
  for (const std::string& p : score.phonemes) {
    auto amp = phoneme_envelope(p, cfg.n_harmonics, cfg.timbre_depth);
    double total = 0.0;
    for (std::size_t k = 0; k < amp.size(); ++k) {
      amp[k] /= static_cast<double>(k + 1);
      total += amp[k];
    }
    for (double& a : amp) a *= cfg.gain / total;
    amplitudes.push_back(std::move(amp));
  }

  const std::size_t hop = static_cast<std::size_t>(cfg.hop);
  const std::size_t n_samples = (n_frames - 1) * hop + hop / 2;
  out.waveform.assign(n_samples, 0.0);
  std::mt19937_64 rng(cfg.seed);
  const double nyquist = cfg.sample_rate / 2.0;
  double phase = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double pos = static_cast<double>(i) / static_cast<double>(hop);
    const auto nearest = std::min(static_cast<std::size_t>(std::lround(pos)), n_frames - 1);
    double sample = 0.0;
    if (out.f0.values[nearest] > 0.0) {
      const auto left = static_cast<std::size_t>(pos);
      const std::size_t right = std::min(left + 1, n_frames - 1);
      const double a = out.f0.values[left], b = out.f0.values[right];
      double hz = out.f0.values[nearest];
      if (a > 0.0 && b > 0.0) hz = a + (b - a) * (pos - static_cast<double>(left));
      phase += kTwoPi * hz / cfg.sample_rate;
      if (phase > kTwoPi) phase -= kTwoPi;
      const auto& amp = amplitudes[phoneme_of_frame[nearest]];
      for (int k = 1; k <= cfg.n_harmonics && k * hz < nyquist; ++k) {
        sample += amp[static_cast<std::size_t>(k - 1)] * std::sin(k * phase);
      }
    }
    out.waveform[i] = sample + cfg.noise_level * uniform_pm1(rng);
  }
  return out;
}

std::vector<double> corrupt_with_breath(std::span<const double> waveform,
                                        std::span<const SampleRange> ranges, std::uint64_t seed) {
  std::vector<double> out(waveform.begin(), waveform.end());
  std::mt19937_64 rng(seed);
  for (const SampleRange& r : ranges) {
    if (r.start > r.end || r.end > waveform.size()) {
      throw ValidationError("corrupt_with_breath: range [" + std::to_string(r.start) + ", " +
                            std::to_string(r.end) + ") outside waveform of " +
                            std::to_string(waveform.size()) + " samples");
    }
    const std::size_t len = r.end - r.start;
    if (len == 0) continue;
    double original_energy = 0.0;
    for (std::size_t i = r.start; i < r.end; ++i) original_energy += waveform[i] * waveform[i];

    std::vector<double> burst(len);
    double state = 0.0, burst_energy = 0.0;
    for (double& b : burst) {
      state = 0.6 * state + 0.4 * uniform_pm1(rng);
      b = state;
      burst_energy += b * b;
    }
    const double scale = burst_energy > 0.0 ? std::sqrt(original_energy / burst_energy) : 0.0;
    for (std::size_t i = 0; i < len; ++i) out[r.start + i] = burst[i] * scale;
  }
  return out;
}

}  // namespace svs
