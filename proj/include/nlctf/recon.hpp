#pragma once

#include "nlctf/geometry.hpp"
#include "nlctf/kbr.hpp"
#include "nlctf/patch.hpp"
#include "nlctf/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nlctf {

struct ReconConfig {
  double alpha = 10.0;
  double tau = 0.05;      // delta = c_const / tau
  double theta = 250.0;
  double mu = 0.5;        // image-update coupling
  double beta = 0.03;     // data-step relaxation, in (0,2)
  double rho = 1.0;       // error-feedback step
  double epsilon = 1e-3;  // log-sum epsilon
  double c_const = 1e-3;
  PatchGridSpec patch;
  int outer_iters = 50;
  int inner_iters = 1;     // kbr_step passes per cube per outer iteration
  int match_interval = 1;  // re-run block matching every this many iterations
  bool raw_gradient = false;  // skip SART normalization in the data step
  int threads = 0;            // 0 = hardware concurrency
  std::uint64_t seed = 0;     // carried for provenance; the solver is deterministic

  double delta() const { return c_const / tau; }
  KbrParams kbr() const { return {alpha, delta(), theta, epsilon}; }
  void validate() const {
    if (!(beta > 0 && beta < 2)) throw config_error("recon: beta must lie in (0,2)");
    if (!(rho > 0)) throw config_error("recon: rho must be positive");
    if (!(tau > 0) || !(c_const > 0)) throw config_error("recon: tau and c must be positive");
    if (outer_iters < 0 || inner_iters < 1 || match_interval < 1)
      throw config_error("recon: invalid iteration counts");
    kbr().validate();
    patch.validate();
  }
};

struct IterationStats {
  int iter = 0;
  double data_residual = 0;   // ||y - Hx|| at iteration start, all bins
  double cube_residual = 0;   // sum_l ||T_l - E_l X||_F after cube updates
  std::vector<double> rmse;   // vs reference, when provided
};

struct ReconResult {
  Tensor3 volume;
  std::vector<IterationStats> trace;
};

/// SART per channel: x += beta * colsum^-1 * H^T(rowsum^-1 * (y - Hx)),
/// masked where the normalizers are zero, clamped at 0 after each sweep.
/// reference (optional) enables per-iteration RMSE in the trace.
ReconResult sart_reconstruct(const SinogramSet& sinos, const FanBeamGeometry& g,
                             int iters, double beta, int threads = 0,
                             const Tensor3* reference = nullptr,
                             bool raw_gradient = false);

/// Full NLCTF loop: image update (data step + mu-weighted count-averaged
/// aggregate of (E_l X - T_l + W_l)), volume normalization, periodic block
/// matching, per-cube KBR steps, error-feedback updates. With mu = 0 the
/// cube machinery is skipped entirely and the result is bit-identical to
/// sart_reconstruct.
ReconResult nlctf_reconstruct(const SinogramSet& sinos, const FanBeamGeometry& g,
                              const ReconConfig& cfg,
                              const Tensor3* reference = nullptr);

}  // namespace nlctf
