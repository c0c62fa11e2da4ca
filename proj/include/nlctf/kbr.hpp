#pragma once

#include "nlctf/tensor.hpp"

namespace nlctf {

/// Weights of the per-cube KBR sub-problem. delta couples the cube to its
/// target, theta couples the factorization to the mode auxiliaries.
struct KbrParams {
  double alpha = 10.0;
  double delta = 0.02;
  double theta = 250.0;
  double epsilon = 1e-3;

  double gamma() const { return 1.0 / (delta + 3.0 * theta); }
  void validate() const {
    if (alpha <= 0 || delta <= 0 || theta <= 0)
      throw config_error("KbrParams: alpha, delta, theta must be positive");
    if (epsilon <= 0 || epsilon >= 1)
      throw config_error("KbrParams: epsilon must lie in (0,1)");
  }
};

/// Normalized log-sum of tensor entries: sum_i (log(|c_i|+eps) - log eps) /
/// (-log eps). Zero iff the tensor is zero.
double logsum_core(const Tensor3& core, double epsilon);

/// Same log-sum over the singular values of m (surrogate rank measure).
double logsum_rank(const Mat& m, double epsilon);

/// Proximal map of the scalar normalized log-sum penalty:
///   argmin_c gamma*(log(|c|+eps)-log eps)/(-log eps) + (c-d)^2/2.
/// Below the threshold max(0, 2*sqrt(c1*gamma)-eps) the stationary point is
/// complex and the result is 0. Above it, the stationary point
/// sign(d)*(c2+c3)/2 is kept only when it beats c=0 on the objective; near
/// the threshold c=0 still wins, so the comparison is required for this to
/// be the actual minimizer.
double scalar_logsum_prox(double d, double gamma, double epsilon);

/// Per-cube solver state: core tensor, orthogonal factors, mode auxiliaries
/// and their multipliers. All tensors live in the cube's (normalized) units.
struct KbrState {
  Tensor3 core;
  std::array<Mat, 3> q;
  std::array<Tensor3, 3> m_aux;
  std::array<Tensor3, 3> z;

  /// Initialize from a freshly extracted cube: (core, q) by HOSVD,
  /// m_aux = cube, z = 0.
  static KbrState initialize(const Tensor3& cube);

  /// Multiply every stored tensor by f. Used when the volume normalization
  /// scale changes between outer iterations: the state is 1-homogeneous in
  /// the data, so rescaling keeps it consistent with the new units.
  void rescale(double f);

  /// core x1 q1 x2 q2 x3 q3 (the paper's Q_l reconstruction).
  Tensor3 recompose() const;
};

/// Core update: D = b x1 q1^T x2 q2^T x3 q3^T, entrywise prox with
/// (gamma, epsilon). Stores and returns the new core.
Tensor3 update_core(KbrState& state, const Tensor3& b, const KbrParams& p);

/// Orthogonal factor update for one mode (Gauss-Seidel; call in order
/// 1,2,3). Solves the Procrustes problem max <L, Q> with
/// L = unfold_mode(b x_{m != mode} q_m^T) * C_(mode)^T; Q = G V^T from the
/// SVD of L.
Mat update_factor(KbrState& state, const Tensor3& b, int mode);

/// Mode auxiliary update: weighted singular value thresholding of
/// unfold_mode(q_l + z[mode]) where the weight is
/// (alpha/theta) * prod of the other modes' logsum_rank values, floored at
/// 1e-12. q_l is the current recomposition (pass state.recompose()).
Tensor3 update_mode_aux(KbrState& state, const Tensor3& q_l, int mode,
                        const KbrParams& p);

/// z[n] <- z[n] - (m_aux[n] - q_l) for all modes.
void update_multipliers(KbrState& state, const Tensor3& q_l);

/// One split-Bregman pass over the cube sub-problems. target is the
/// (normalized) extracted cube, w the cube's error-feedback tensor in the
/// same units. Blends b = (delta*(target+w) + theta*sum(m-z))/(delta+3theta),
/// then runs core, factor x3, mode-aux x3 and multiplier updates. Returns
/// the recomposed cube (still normalized).
Tensor3 kbr_step(KbrState& state, const Tensor3& target, const Tensor3& w,
                 const KbrParams& p);

}  // namespace nlctf
