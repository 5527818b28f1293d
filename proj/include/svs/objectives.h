#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "svs/align.h"
#include "svs/dsp.h"
#include "svs/types.h"

namespace svs {

/// Batch of N diagonal Gaussians over D latent dims (same layout as GaussianSeq).
using DiagGaussianBatch = GaussianSeq;

struct GaussianGrad {
  Matrix d_means;
  Matrix d_log_stds;
};

/// KL(q || p), averaged over the N rows and summed over latent dims.
struct KlResult {
  double value = 0.0;
  GaussianGrad grad_q;
  GaussianGrad grad_p;
};

KlResult kl_diag_gaussian(const DiagGaussianBatch& q, const DiagGaussianBatch& p);

/// Aperiodic-branch KL: KL(q_l || p_l) + lambda_l * KL(q_a || p_a), where q_a
/// is treated as a constant (stop-gradient). grad_q_a is therefore all zeros.
struct AperiodicKlResult {
  double value = 0.0;
  double linguistic = 0.0;
  double aperiodic = 0.0;
  GaussianGrad grad_q_l;
  GaussianGrad grad_p_l;
  GaussianGrad grad_q_a;
  GaussianGrad grad_p_a;
};

AperiodicKlResult kl_aperiodic(const DiagGaussianBatch& q_l, const DiagGaussianBatch& p_l,
                               const DiagGaussianBatch& q_a_detached,
                               const DiagGaussianBatch& p_a, double lambda_l);

/// z = mean + tau * exp(log_std) * eps.
Matrix sample_gaussian(const DiagGaussianBatch& stats, double tau, const Matrix& eps);

/// L1 pitch loss in log-Hz over voiced frames of `f0_true`, plus the
/// median-smoothed term weighted by lambda_s. Gradients are w.r.t. the two
/// prediction vectors (in Hz).
struct PitchLossResult {
  double value = 0.0;
  double raw = 0.0;
  double smoothed = 0.0;
  std::vector<double> d_pred;
  std::vector<double> d_smooth_pred;
};

PitchLossResult pitch_loss(const F0Contour& f0_true, std::span<const double> f0_pred,
                           std::span<const double> f0_smooth_pred, double lambda_s, int kernel);

struct MatrixLossResult {
  double value = 0.0;
  Matrix d_pred;
};

/// Mean absolute difference over all entries.
MatrixLossResult mel_loss(const Matrix& mel_true, const Matrix& mel_pred);

struct VectorLossResult {
  double value = 0.0;
  std::vector<double> d_pred;
};

/// Mean squared difference.
VectorLossResult duration_loss(std::span<const double> d_true, std::span<const double> d_pred);

/// One discriminator output or intermediate feature map, flattened row-major.
struct FeatureMap {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  std::size_t numel() const noexcept { return values.size(); }
  void validate() const;
};

/// One entry per sub-discriminator (for LSGAN) or per layer (for feature matching).
using FeatureStack = std::vector<FeatureMap>;
using FeatureGrad = std::vector<std::vector<double>>;

/// Least-squares GAN objectives. Each sub-discriminator contributes the mean
/// over its output elements; sub-discriminators are averaged with equal weight.
struct LsganResult {
  double dis = 0.0;
  double adv = 0.0;
  FeatureGrad d_dis_real;
  FeatureGrad d_dis_fake;
  FeatureGrad d_adv_fake;
};

LsganResult lsgan_losses(const FeatureStack& d_real, const FeatureStack& d_fake);

/// Sum over layers of the per-layer mean absolute difference.
struct FeatureMatchingResult {
  double value = 0.0;
  FeatureGrad d_real;
  FeatureGrad d_fake;
};

FeatureMatchingResult feature_matching_loss(const FeatureStack& real, const FeatureStack& fake);

struct LossWeights {
  double lambda_l = 1.0;
  double lambda_s = 1.0;
  double fm = 2.0;
  double mel = 45.0;
  double pitch = 10.0;
  double kl_a = 1.0;
  double kl_p = 1.0;
  double dur = 1.0;

  void validate() const;
};

struct LossComponents {
  double adv = 0.0;
  double fm = 0.0;
  double mel = 0.0;
  double pitch = 0.0;
  double kl_a = 0.0;
  double kl_p = 0.0;
  double dur = 0.0;
};

/// adv + fm*w.fm + mel*w.mel + pitch*w.pitch + kl_a*w.kl_a + kl_p*w.kl_p + dur*w.dur.
/// Rejects non-finite components.
double final_loss(const LossComponents& components, const LossWeights& weights);

}  // namespace svs
