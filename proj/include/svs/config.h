#pragma once

#include <string>
#include <string_view>

#include "svs/dsp.h"
#include "svs/objectives.h"
#include "svs/synth.h"

namespace svs {

/// Shared settings for every CLI subcommand.
///
/// File format: one `key = value` per line, `#` starts a comment. Keys carry a
/// section prefix:
///
///   mel.sample_rate mel.fft_size mel.win_size mel.hop mel.n_mels
///   mel.fmin mel.fmax mel.log_floor
///   f0.kernel
///   loss.lambda_l loss.lambda_s loss.fm loss.mel loss.pitch
///   loss.kl_a loss.kl_p loss.dur
///   sample.tau
///   synth.n_harmonics synth.vibrato_rate synth.vibrato_depth synth.bend_depth
///   synth.bend_frames synth.noise_level synth.gain synth.timbre_depth synth.seed
///
/// Unknown keys are an error. The synthesizer always runs at the mel sample
/// rate and hop. mel.fmax defaults to half the sample rate.
struct PipelineConfig {
  MelConfig mel;
  int median_kernel = 13;
  LossWeights weights;
  double tau = 0.667;
  SynthConfig synth;

  void validate() const;
};

PipelineConfig parse_pipeline_config(std::string_view text);

/// Every key with its current value, in the documented order.
std::string format_pipeline_config(const PipelineConfig& config);

}  // namespace svs
