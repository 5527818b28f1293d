#include "svs/dsp.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "svs/error.h"

namespace svs {

namespace {

// FFTW planning touches global state; execution on distinct plans does not.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(int n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n_, in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }
  void execute() { fftw_execute(plan_); }
  double magnitude(int bin) const {
    const double re = out_.get()[bin][0], im = out_.get()[bin][1];
    return std::sqrt(re * re + im * im);
  }

 private:
  int n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_ = nullptr;
};

// Whole-sample mirror (no edge repeat), folded as often as needed.
std::size_t mirror_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

void MelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("invalid mel config: " + what); };
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) fail("sample_rate must be positive");
  if (fft_size <= 0 || win_size <= 0 || hop <= 0) fail("fft_size, win_size and hop must be positive");
  if (win_size > fft_size) fail("win_size exceeds fft_size");
  if (hop > win_size) fail("hop exceeds win_size");
  if (n_mels < 1) fail("n_mels must be at least 1");
  if (!(fmin >= 0.0) || !(fmin < fmax) || fmax > sample_rate / 2.0) {
    fail("need 0 <= fmin < fmax <= sample_rate/2");
  }
  if (!(log_floor > 0.0) || !std::isfinite(log_floor)) fail("log_floor must be positive");
}

std::size_t num_frames(std::size_t num_samples, int hop) {
  return num_samples / static_cast<std::size_t>(hop) + 1;
}

Matrix mel_filterbank(const MelConfig& config) {
  config.validate();
  const int n_bins = config.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(config.fmax);

  std::vector<double> edges(static_cast<std::size_t>(config.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(config.n_mels + 1));
  }

  Matrix fb = Matrix::Zero(config.n_mels, n_bins);
  for (int m = 0; m < config.n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * config.sample_rate / config.fft_size;
      const double rising = (f - lo) / (center - lo);
      const double falling = (hi - f) / (hi - center);
      fb(m, k) = std::max(0.0, std::min(rising, falling));
    }
  }
  return fb;
}

Matrix magnitude_spectrogram(std::span<const double> samples, const MelConfig& config) {
  config.validate();
  if (samples.empty()) throw ValidationError("magnitude_spectrogram: empty waveform");

  const int n_fft = config.fft_size;
  const int n_bins = n_fft / 2 + 1;
  const int win_offset = (n_fft - config.win_size) / 2;
  std::vector<double> window(static_cast<std::size_t>(n_fft), 0.0);
  for (int i = 0; i < config.win_size; ++i) {
    window[win_offset + i] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(config.win_size));
  }

  const std::size_t n_frames = num_frames(samples.size(), config.hop);
  Matrix mag(static_cast<Eigen::Index>(n_frames), n_bins);
  RealFft fft(n_fft);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const auto origin = static_cast<std::ptrdiff_t>(t) * config.hop - n_fft / 2;
    double* in = fft.input();
    for (int j = 0; j < n_fft; ++j) {
      in[j] = window[j] * samples[mirror_index(origin + j, samples.size())];
    }
    fft.execute();
    for (int k = 0; k < n_bins; ++k) mag(static_cast<Eigen::Index>(t), k) = fft.magnitude(k);
  }
  return mag;
}

MelSpectrogram mel_spectrogram(std::span<const double> samples, const MelConfig& config) {
  const Matrix mag = magnitude_spectrogram(samples, config);
  const Matrix fb = mel_filterbank(config);
  Matrix energies = mag * fb.transpose();
  const double floor = config.log_floor;
  MelSpectrogram out{energies.unaryExpr([floor](double e) { return std::log(std::max(e, floor)); }),
                     config};
  return out;
}

void validate_f0(const F0Contour& f0) {
  for (std::size_t i = 0; i < f0.values.size(); ++i) {
    const double v = f0.values[i];
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("F0 frame " + std::to_string(i) + " is negative or not finite");
    }
    if (v != 0.0 && !(v > kMinVoicedHz && v < kMaxVoicedHz)) {
      throw ValidationError("F0 frame " + std::to_string(i) + " = " + std::to_string(v) +
                            " Hz outside the voiced range (20, 2000)");
    }
  }
}

F0Contour median_smooth_f0(const F0Contour& f0, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw ValidationError("median kernel must be odd and positive, got " + std::to_string(kernel));
  }
  const std::size_t n = f0.values.size();
  const int half = kernel / 2;
  F0Contour out{std::vector<double>(n, 0.0)};
  std::vector<double> window(static_cast<std::size_t>(kernel));

  std::size_t i = 0;
  while (i < n) {
    if (f0.values[i] <= 0.0) {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < n && f0.values[run_end] > 0.0) ++run_end;
    const std::size_t run_len = run_end - i;
    const double* run = f0.values.data() + i;
    for (std::size_t k = 0; k < run_len; ++k) {
      for (int w = -half; w <= half; ++w) {
        window[w + half] = run[mirror_index(static_cast<std::ptrdiff_t>(k) + w, run_len)];
      }
      auto mid = window.begin() + half;
      std::nth_element(window.begin(), mid, window.end());
      out.values[i + k] = *mid;
    }
    i = run_end;
  }
  return out;
}

std::size_t LogF0::voiced_count() const {
  return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), true));
}

LogF0 log_f0_masked(const F0Contour& f0) {
  LogF0 out;
  out.values.assign(f0.values.size(), 0.0);
  out.voiced.assign(f0.values.size(), false);
  for (std::size_t i = 0; i < f0.values.size(); ++i) {
    if (f0.values[i] > 0.0) {
      out.values[i] = std::log(f0.values[i]);
      out.voiced[i] = true;
    }
  }
  return out;
}

}  // namespace svs
