#include "svs/objectives.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "svs/error.h"

namespace svs {

namespace {

void require_same_shape(const DiagGaussianBatch& a, const DiagGaussianBatch& b, const char* what) {
  a.validate();
  b.validate();
  if (a.size() != b.size() || a.dims() != b.dims()) {
    throw ValidationError(std::string(what) + ": shape " + std::to_string(a.size()) + "x" +
                          std::to_string(a.dims()) + " vs " + std::to_string(b.size()) + "x" +
                          std::to_string(b.dims()));
  }
}

GaussianGrad zero_grad(const DiagGaussianBatch& g) {
  return {Matrix::Zero(g.size(), g.dims()), Matrix::Zero(g.size(), g.dims())};
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

KlResult kl_diag_gaussian(const DiagGaussianBatch& q, const DiagGaussianBatch& p) {
  require_same_shape(q, p, "kl_diag_gaussian");
  KlResult out{0.0, zero_grad(q), zero_grad(p)};
  const Eigen::Index n = q.size();
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < q.dims(); ++k) {
      const double lq = q.log_stds(i, k), lp = p.log_stds(i, k);
      const double delta = q.means(i, k) - p.means(i, k);
      const double inv_var_p = std::exp(-2.0 * lp);
      // 0.5 * (r - 1 - ln r) with r = var_q / var_p; expm1 keeps it >= 0.
      const double x = 2.0 * (lq - lp);
      const double ratio_term = 0.5 * (std::expm1(x) - x);
      total += ratio_term + 0.5 * delta * delta * inv_var_p;

      const double ratio = std::exp(x);
      out.grad_q.d_means(i, k) = delta * inv_var_p * inv_n;
      out.grad_p.d_means(i, k) = -delta * inv_var_p * inv_n;
      out.grad_q.d_log_stds(i, k) = (ratio - 1.0) * inv_n;
      out.grad_p.d_log_stds(i, k) = (1.0 - ratio - delta * delta * inv_var_p) * inv_n;
    }
  }
  out.value = total * inv_n;
  return out;
}

AperiodicKlResult kl_aperiodic(const DiagGaussianBatch& q_l, const DiagGaussianBatch& p_l,
                               const DiagGaussianBatch& q_a_detached,
                               const DiagGaussianBatch& p_a, double lambda_l) {
  if (!(lambda_l >= 0.0) || !std::isfinite(lambda_l)) {
    throw ValidationError("kl_aperiodic: lambda_l must be finite and non-negative");
  }
  KlResult linguistic = kl_diag_gaussian(q_l, p_l);
  KlResult aperiodic = kl_diag_gaussian(q_a_detached, p_a);

  AperiodicKlResult out;
  out.linguistic = linguistic.value;
  out.aperiodic = aperiodic.value;
  out.value = linguistic.value + lambda_l * aperiodic.value;
  out.grad_q_l = std::move(linguistic.grad_q);
  out.grad_p_l = std::move(linguistic.grad_p);
  out.grad_q_a = zero_grad(q_a_detached);
  out.grad_p_a = {lambda_l * aperiodic.grad_p.d_means, lambda_l * aperiodic.grad_p.d_log_stds};
  return out;
}

Matrix sample_gaussian(const DiagGaussianBatch& stats, double tau, const Matrix& eps) {
  stats.validate();
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw ValidationError("sample_gaussian: temperature must be finite and non-negative");
  }
  if (eps.rows() != stats.size() || eps.cols() != stats.dims()) {
    throw ValidationError("sample_gaussian: noise shape does not match the statistics");
  }
  return (stats.means.array() + tau * stats.log_stds.array().exp() * eps.array()).matrix();
}

PitchLossResult pitch_loss(const F0Contour& f0_true, std::span<const double> f0_pred,
                           std::span<const double> f0_smooth_pred, double lambda_s, int kernel) {
  const std::size_t n = f0_true.size();
  if (f0_pred.size() != n || f0_smooth_pred.size() != n) {
    throw ValidationError("pitch_loss: contour lengths differ (" + std::to_string(n) + ", " +
                          std::to_string(f0_pred.size()) + ", " +
                          std::to_string(f0_smooth_pred.size()) + ")");
  }
  if (!(lambda_s >= 0.0) || !std::isfinite(lambda_s)) {
    throw ValidationError("pitch_loss: lambda_s must be finite and non-negative");
  }
  const LogF0 target = log_f0_masked(f0_true);
  const LogF0 smoothed_target = log_f0_masked(median_smooth_f0(f0_true, kernel));

  PitchLossResult out;
  out.d_pred.assign(n, 0.0);
  out.d_smooth_pred.assign(n, 0.0);
  const std::size_t voiced = target.voiced_count();
  if (voiced == 0) return out;
  const double inv_v = 1.0 / static_cast<double>(voiced);

  for (std::size_t i = 0; i < n; ++i) {
    if (!target.voiced[i]) continue;
    if (!(f0_pred[i] > 0.0) || !(f0_smooth_pred[i] > 0.0)) {
      throw ValidationError("pitch_loss: non-positive prediction on voiced frame " +
                            std::to_string(i));
    }
    const double raw_diff = std::log(f0_pred[i]) - target.values[i];
    const double smooth_diff = std::log(f0_smooth_pred[i]) - smoothed_target.values[i];
    out.raw += std::abs(raw_diff);
    out.smoothed += std::abs(smooth_diff);
    out.d_pred[i] = sign(raw_diff) / f0_pred[i] * inv_v;
    out.d_smooth_pred[i] = lambda_s * sign(smooth_diff) / f0_smooth_pred[i] * inv_v;
  }
  out.raw *= inv_v;
  out.smoothed *= inv_v;
  out.value = out.raw + lambda_s * out.smoothed;
  return out;
}

MatrixLossResult mel_loss(const Matrix& mel_true, const Matrix& mel_pred) {
  if (mel_true.rows() != mel_pred.rows() || mel_true.cols() != mel_pred.cols()) {
    throw ValidationError("mel_loss: shape mismatch");
  }
  MatrixLossResult out{0.0, Matrix::Zero(mel_pred.rows(), mel_pred.cols())};
  if (mel_true.size() == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(mel_true.size());
  const auto diff = (mel_pred - mel_true).array();
  out.value = diff.abs().sum() * inv_n;
  out.d_pred = diff.unaryExpr([inv_n](double d) { return sign(d) * inv_n; }).matrix();
  return out;
}

VectorLossResult duration_loss(std::span<const double> d_true, std::span<const double> d_pred) {
  if (d_true.size() != d_pred.size()) {
    throw ValidationError("duration_loss: length mismatch (" + std::to_string(d_true.size()) +
                          " vs " + std::to_string(d_pred.size()) + ")");
  }
  VectorLossResult out{0.0, std::vector<double>(d_pred.size(), 0.0)};
  if (d_true.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(d_true.size());
  for (std::size_t i = 0; i < d_true.size(); ++i) {
    const double e = d_pred[i] - d_true[i];
    out.value += e * e;
    out.d_pred[i] = 2.0 * e * inv_n;
  }
  out.value *= inv_n;
  return out;
}

void FeatureMap::validate() const {
  const std::size_t expected =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  if (shape.empty() || expected != values.size()) {
    throw ValidationError("feature map shape does not match its element count");
  }
  if (values.empty()) throw ValidationError("feature map is empty");
}

LsganResult lsgan_losses(const FeatureStack& d_real, const FeatureStack& d_fake) {
  if (d_real.empty() || d_fake.empty()) throw ValidationError("lsgan_losses: empty input");
  if (d_real.size() != d_fake.size()) {
    throw ValidationError("lsgan_losses: " + std::to_string(d_real.size()) + " real vs " +
                          std::to_string(d_fake.size()) + " fake sub-discriminator outputs");
  }
  const double inv_k = 1.0 / static_cast<double>(d_real.size());
  LsganResult out;
  for (std::size_t k = 0; k < d_real.size(); ++k) {
    const FeatureMap& real = d_real[k];
    const FeatureMap& fake = d_fake[k];
    real.validate();
    fake.validate();
    const double inv_real = 1.0 / static_cast<double>(real.numel());
    const double inv_fake = 1.0 / static_cast<double>(fake.numel());

    double real_term = 0.0;
    std::vector<double> g_real(real.numel());
    for (std::size_t i = 0; i < real.numel(); ++i) {
      const double r = real.values[i] - 1.0;
      real_term += r * r;
      g_real[i] = 2.0 * r * inv_real * inv_k;
    }
    double fake_term = 0.0, adv_term = 0.0;
    std::vector<double> g_fake(fake.numel()), g_adv(fake.numel());
    for (std::size_t i = 0; i < fake.numel(); ++i) {
      const double f = fake.values[i];
      fake_term += f * f;
      adv_term += (f - 1.0) * (f - 1.0);
      g_fake[i] = 2.0 * f * inv_fake * inv_k;
      g_adv[i] = 2.0 * (f - 1.0) * inv_fake * inv_k;
    }
    out.dis += (real_term * inv_real + fake_term * inv_fake) * inv_k;
    out.adv += adv_term * inv_fake * inv_k;
    out.d_dis_real.push_back(std::move(g_real));
    out.d_dis_fake.push_back(std::move(g_fake));
    out.d_adv_fake.push_back(std::move(g_adv));
  }
  return out;
}

FeatureMatchingResult feature_matching_loss(const FeatureStack& real, const FeatureStack& fake) {
  if (real.size() != fake.size()) {
    throw ValidationError("feature_matching_loss: " + std::to_string(real.size()) + " vs " +
                          std::to_string(fake.size()) + " layers");
  }
  FeatureMatchingResult out;
  for (std::size_t l = 0; l < real.size(); ++l) {
    real[l].validate();
    fake[l].validate();
    if (real[l].shape != fake[l].shape) {
      throw ValidationError("feature_matching_loss: layer " + std::to_string(l) + " shape mismatch");
    }
    const double inv_n = 1.0 / static_cast<double>(real[l].numel());
    double layer = 0.0;
    std::vector<double> g_real(real[l].numel()), g_fake(real[l].numel());
    for (std::size_t i = 0; i < real[l].numel(); ++i) {
      const double d = real[l].values[i] - fake[l].values[i];
      layer += std::abs(d);
      g_real[i] = sign(d) * inv_n;
      g_fake[i] = -sign(d) * inv_n;
    }
    out.value += layer * inv_n;
    out.d_real.push_back(std::move(g_real));
    out.d_fake.push_back(std::move(g_fake));
  }
  return out;
}

void LossWeights::validate() const {
  for (double w : {lambda_l, lambda_s, fm, mel, pitch, kl_a, kl_p, dur}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("loss weights must be finite and non-negative");
    }
  }
}

double final_loss(const LossComponents& c, const LossWeights& w) {
  w.validate();
  const struct {
    const char* name;
    double value;
  } named[] = {{"adv", c.adv}, {"fm", c.fm},     {"mel", c.mel}, {"pitch", c.pitch},
               {"kl_a", c.kl_a}, {"kl_p", c.kl_p}, {"dur", c.dur}};
  for (const auto& [name, value] : named) {
    if (!std::isfinite(value)) {
      throw ValidationError(std::string("final_loss: component '") + name + "' is not finite");
    }
  }
  return c.adv + w.fm * c.fm + w.mel * c.mel + w.pitch * c.pitch + w.kl_a * c.kl_a +
         w.kl_p * c.kl_p + w.dur * c.dur;
}

}  // namespace svs
