#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svs/align.h"
#include "svs/dsp.h"
#include "svs/types.h"

namespace svs {

// Plain-text formats. Every parser throws ParseError with a 1-based line
// number; every formatter writes values in shortest round-trip form, so
// format -> parse is lossless.
//
//   MAT <T> <D>                      then T rows of D values
//   GAUSS <S> <D>                    then S mean rows, then S log-std rows
//   DUR <S>                          then S integers, one per line
//   PRED <S>                         then S decimals, one per line
//   MEL <T> <n_mels> <sr> <hop>      then T rows of n_mels values
//   F0 files have no header: one Hz value per line, 0 = unvoiced.
//
// Blank lines and lines starting with '#' are ignored.

Matrix parse_matrix(std::string_view text);
std::string format_matrix(const Matrix& m);

GaussianSeq parse_gaussians(std::string_view text);
std::string format_gaussians(const GaussianSeq& g);

Durations parse_durations(std::string_view text);
std::string format_durations(const Durations& d);

std::vector<double> parse_predictions(std::string_view text);
std::string format_predictions(std::span<const double> values);

/// Only sample_rate and hop are carried by the header; the other config
/// fields of the result keep their defaults.
MelSpectrogram parse_mel(std::string_view text);
std::string format_mel(const MelSpectrogram& mel);

F0Contour parse_f0(std::string_view text);
std::string format_f0(const F0Contour& f0);

/// Mono 16-bit PCM RIFF/WAVE.
struct Wav {
  int sample_rate = 44100;
  std::vector<double> samples;  // [-1, 1)
};

Wav parse_wav(std::string_view bytes);
/// Samples are clipped to [-1, 1] and rounded to the nearest 16-bit step.
std::string format_wav(const Wav& wav);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

}  // namespace svs
