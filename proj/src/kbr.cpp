#include "nlctf/kbr.hpp"

#include <cmath>

namespace nlctf {

double logsum_core(const Tensor3& core, double epsilon) {
  const double log_eps = std::log(epsilon);
  double acc = 0.0;
  for (std::size_t i = 0; i < core.size(); ++i)
    acc += std::log(std::abs(core[i]) + epsilon) - log_eps;
  return acc / (-log_eps);
}

double logsum_rank(const Mat& m, double epsilon) {
  const double log_eps = std::log(epsilon);
  Eigen::BDCSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    acc += std::log(s[i] + epsilon) - log_eps;
  return acc / (-log_eps);
}

double scalar_logsum_prox(double d, double gamma, double epsilon) {
  const double c1 = -1.0 / std::log(epsilon);
  const double thr = std::max(0.0, 2.0 * std::sqrt(c1 * gamma) - epsilon);
  const double ad = std::abs(d);
  if (ad <= thr) return 0.0;
  const double disc = (ad + epsilon) * (ad + epsilon) - 4.0 * c1 * gamma;
  if (disc < 0.0)
    throw numeric_error("scalar_logsum_prox: negative discriminant above threshold");
  const double cand = ((ad - epsilon) + std::sqrt(disc)) / 2.0;
  // stationary point vs the boundary c = 0
  const double j_cand =
      gamma * c1 * (std::log(cand + epsilon) - std::log(epsilon)) +
      0.5 * (cand - ad) * (cand - ad);
  const double j_zero = 0.5 * ad * ad;
  if (j_cand > j_zero) return 0.0;
  return d < 0 ? -cand : cand;
}

KbrState KbrState::initialize(const Tensor3& cube) {
  KbrState st;
  HosvdFactors f = hosvd(cube);
  st.core = std::move(f.core);
  st.q = std::move(f.q);
  for (int n = 0; n < 3; ++n) {
    st.m_aux[n] = cube;
    st.z[n] = Tensor3(cube.d1(), cube.d2(), cube.d3());
  }
  return st;
}

void KbrState::rescale(double f) {
  core.scale_in_place(f);
  for (int n = 0; n < 3; ++n) {
    m_aux[n].scale_in_place(f);
    z[n].scale_in_place(f);
  }
}

Tensor3 KbrState::recompose() const {
  Tensor3 t = core;
  for (int n = 0; n < 3; ++n) t = mode_product(t, q[n], n + 1);
  return t;
}

Tensor3 update_core(KbrState& state, const Tensor3& b, const KbrParams& p) {
  Tensor3 d = b;
  for (int n = 0; n < 3; ++n)
    d = mode_product(d, state.q[n].transpose(), n + 1);
  const double gamma = p.gamma();
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = scalar_logsum_prox(d[i], gamma, p.epsilon);
  state.core = std::move(d);
  return state.core;
}

Mat update_factor(KbrState& state, const Tensor3& b, int mode) {
  Tensor3 proj = b;
  for (int n = 1; n <= 3; ++n)
    if (n != mode) proj = mode_product(proj, state.q[n - 1].transpose(), n);
  // L = B_(mode) (kron of the other factors) C_(mode)^T, computed without
  // forming the Kronecker product
  Mat l = unfold(proj, mode) * unfold(state.core, mode).transpose();
  ThinSvd svd = thin_svd(l);
  state.q[mode - 1] = svd.u * svd.v.transpose();
  return state.q[mode - 1];
}

Tensor3 update_mode_aux(KbrState& state, const Tensor3& q_l, int mode,
                        const KbrParams& p) {
  double weight = p.alpha / p.theta;
  for (int e = 1; e <= 3; ++e)
    if (e != mode) weight *= logsum_rank(unfold(state.m_aux[e - 1], e), p.epsilon);
  weight = std::max(weight, 1e-12);

  ThinSvd svd = thin_svd(unfold(q_l + state.z[mode - 1], mode));
  Eigen::VectorXd s = svd.s;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    s[i] = scalar_logsum_prox(s[i], weight, p.epsilon);
  state.m_aux[mode - 1] =
      fold(svd.u * s.asDiagonal() * svd.v.transpose(), mode, q_l.dims());
  return state.m_aux[mode - 1];
}

void update_multipliers(KbrState& state, const Tensor3& q_l) {
  for (int n = 0; n < 3; ++n) state.z[n] -= state.m_aux[n] - q_l;
}

Tensor3 kbr_step(KbrState& state, const Tensor3& target, const Tensor3& w,
                 const KbrParams& p) {
  if (!target.same_dims(w)) throw config_error("kbr_step: target/w dims differ");
  Tensor3 b = target + w;
  b.scale_in_place(p.delta);
  for (int n = 0; n < 3; ++n) {
    Tensor3 mz = state.m_aux[n] - state.z[n];
    mz.scale_in_place(p.theta);
    b += mz;
  }
  b.scale_in_place(1.0 / (p.delta + 3.0 * p.theta));

  update_core(state, b, p);
  for (int mode = 1; mode <= 3; ++mode) update_factor(state, b, mode);
  Tensor3 q_l = state.recompose();
  for (int mode = 1; mode <= 3; ++mode) update_mode_aux(state, q_l, mode, p);
  update_multipliers(state, q_l);
  if (!q_l.all_finite()) throw numeric_error("kbr_step: non-finite cube update");
  return q_l;
}

}  // namespace nlctf
