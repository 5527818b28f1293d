#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "svs/dsp.h"
#include "svs/score.h"
#include "svs/types.h"

namespace svs {

/// 440 * 2^((midi - 69) / 12).
double midi_to_hz(double midi);

struct SynthConfig {
  double sample_rate = 44100.0;
  int hop = 512;  // F0 / spectrogram frame hop
  int n_harmonics = 8;
  double vibrato_rate = 6.0;    // Hz
  double vibrato_depth = 10.0;  // Hz, peak deviation
  double bend_depth = 20.0;     // Hz below the note at onset
  int bend_frames = 6;          // frames to ramp up to the note pitch
  double noise_level = 0.003;   // linear amplitude of the uniform noise
  double gain = 0.8;            // peak bound of the harmonic sum
  // Per-phoneme harmonic envelope strength: harmonic k of phoneme p is scaled
  // by exp(timbre_depth * u), u in [-1, 1) hashed from (p, k). 0 gives the
  // plain 1/k spectrum for every phoneme.
  double timbre_depth = 3.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthUtterance {
  std::vector<double> waveform;
  F0Contour f0;             // one value per frame; 0 on rests
  Durations durations;      // ground-truth phoneme durations in frames
  NoteFrameSpans spans;
};

/// Harmonic (periodic) plus uniform-noise (aperiodic) rendering of a score.
///
/// Harmonic k has amplitude proportional to envelope_k / k (envelope = 1 when
/// timbre_depth is 0), scaled so the amplitudes sum to cfg.gain.
/// Frame f is centred on sample f * hop, and the waveform holds
/// (T - 1) * hop + hop / 2 samples so that a centre-padded STFT with the same
/// hop yields exactly T frames. Per note, F0 is the note pitch plus a vibrato
/// sinusoid (phase 0 at the note onset) and a linear onset bend. Each note's
/// frames are split evenly across its phonemes by largest remainder.
/// Noise uses std::mt19937_64 seeded with cfg.seed; the 53 high bits of each
/// draw map to [-1, 1).
SynthUtterance generate_utterance(const Score& score, const SynthConfig& cfg);

/// Per-harmonic amplitude multipliers for a phoneme symbol (length n_harmonics),
/// each exp(depth * u) with u in [-1, 1) a hash of the symbol and harmonic index.
std::vector<double> phoneme_envelope(std::string_view phoneme, int n_harmonics, double depth);

struct SampleRange {
  std::size_t start = 0;
  std::size_t end = 0;
};

/// Replaces each range with low-passed noise scaled to the range's original RMS.
std::vector<double> corrupt_with_breath(std::span<const double> waveform,
                                        std::span<const SampleRange> ranges, std::uint64_t seed);

}  // namespace svs
