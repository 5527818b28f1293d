#pragma once

#include <span>
#include <vector>

#include "svs/types.h"

namespace svs {

/// STFT + mel filterbank settings. Defaults: 44.1 kHz audio, 2048-point FFT
/// and window, 512-sample hop, 80 HTK mel bands over [0, sr/2].
struct MelConfig {
  double sample_rate = 44100.0;
  int fft_size = 2048;
  int win_size = 2048;
  int hop = 512;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 22050.0;
  double log_floor = 1e-5;

  /// Throws ValidationError when an invariant is broken.
  void validate() const;
  /// Frame rate of both the spectrogram and the F0 contour.
  double frames_per_second() const { return sample_rate / hop; }
};

struct MelSpectrogram {
  Matrix frames;  // T x n_mels, natural-log energies
  MelConfig config;

  std::size_t num_frames() const { return static_cast<std::size_t>(frames.rows()); }
};

/// Number of frames produced for `num_samples` samples under center padding.
std::size_t num_frames(std::size_t num_samples, int hop);

/// HTK-scale triangular filters, unnormalized. n_mels x (fft_size/2 + 1).
Matrix mel_filterbank(const MelConfig& config);

/// |STFT| with a periodic Hann window and reflect center padding.
/// T x (fft_size/2 + 1).
Matrix magnitude_spectrogram(std::span<const double> samples, const MelConfig& config);

/// ln(max(filterbank * |STFT|, log_floor)) per frame.
MelSpectrogram mel_spectrogram(std::span<const double> samples, const MelConfig& config);

/// Per-frame F0 in Hz; 0 marks an unvoiced frame.
struct F0Contour {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const F0Contour&) const = default;
};

inline constexpr double kMinVoicedHz = 20.0;
inline constexpr double kMaxVoicedHz = 2000.0;

/// Rejects negative or non-finite entries and voiced values outside (20, 2000) Hz.
void validate_f0(const F0Contour& f0);

/// Median filter applied separately inside every maximal voiced run, with
/// mirror padding at run edges. Unvoiced frames stay 0.
F0Contour median_smooth_f0(const F0Contour& f0, int kernel);

struct LogF0 {
  std::vector<double> values;  // ln(Hz) on voiced frames, 0 elsewhere
  std::vector<bool> voiced;

  std::size_t voiced_count() const;
};

LogF0 log_f0_masked(const F0Contour& f0);

}  // namespace svs
