#pragma once

#include "nlctf/phantom.hpp"
#include "nlctf/tensor.hpp"

#include <limits>
#include <string>
#include <vector>

namespace nlctf {

struct MetricReport {
  std::vector<double> rmse;
  std::vector<double> psnr;  // dB; +inf sentinel when rmse is 0
  std::vector<double> ssim;

  double mean_rmse() const;
  double mean_psnr() const;  // infinities excluded from the mean
  double mean_ssim() const;
};

/// Per-channel sqrt(mean((x - ref)^2)), raw attenuation units.
std::vector<double> rmse(const Tensor3& x, const Tensor3& ref);

/// Per-channel 20*log10(max(ref)/rmse); +inf when rmse is 0. Throws when a
/// reference channel is all zero.
std::vector<double> psnr(const Tensor3& x, const Tensor3& ref);

/// Per-channel SSIM: both images affinely rescaled so ref spans [0,255],
/// 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, L=255, averaged
/// over windows fully inside the image.
std::vector<double> ssim(const Tensor3& x, const Tensor3& ref);

MetricReport evaluate(const Tensor3& x, const Tensor3& ref);

/// Basis materials for decomposition; signatures are the per-bin mu vectors.
struct BasisSet {
  std::vector<Material> materials;
  double condition_number() const;
};

struct DecomposeResult {
  std::vector<std::vector<double>> fractions;  // per material, column-major image
  std::vector<double> residual;                // per-pixel LS residual norm
  int n_rows = 0, n_cols = 0;
};

/// Per-pixel nonnegative least squares of the S-vector against the basis
/// signatures (Lawson-Hanson active set). Ill-conditioned bases
/// (cond > 1e8) proceed with a warning flag on the result.
DecomposeResult decompose(const Tensor3& volume, const BasisSet& basis,
                          bool* ill_conditioned = nullptr);

/// Exact solver used by decompose, exposed for reuse: min ||a*f - b|| s.t.
/// f >= 0.
Eigen::VectorXd nnls(const Mat& a, const Eigen::VectorXd& b);

}  // namespace nlctf
