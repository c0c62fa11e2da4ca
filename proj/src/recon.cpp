#include "nlctf/recon.hpp"

#include "nlctf/parallel.hpp"

#include <cmath>

namespace nlctf {

namespace {

void check_sinos(const SinogramSet& sinos, const FanBeamGeometry& g) {
  if (sinos.empty()) throw config_error("recon: empty sinogram set");
  for (const auto& s : sinos)
    if (s.n_views != g.n_views || s.n_det != g.n_det)
      throw config_error("recon: sinogram shape does not match geometry");
}

// One normalized (or raw) gradient sweep of a single channel. Returns the
// residual norm^2 at the input x. The update is written into x.
double sart_channel_sweep(double* x, const Sinogram& y,
                          const FanBeamGeometry& g,
                          const SartNormalizers& norm, double beta,
                          bool raw_gradient, int threads) {
  Sinogram resid = project_attenuation(x, g, threads);
  double r2 = 0;
  for (std::size_t i = 0; i < resid.size(); ++i) {
    double r = y.values[i] - resid.values[i];
    r2 += r * r;
    if (!raw_gradient)
      r = norm.row_sums[i] > 0 ? r / norm.row_sums[i] : 0.0;
    resid.values[i] = r;
  }
  std::vector<double> grad = backproject_attenuation(resid, g, threads);
  const std::size_t npix = grad.size();
  for (std::size_t j = 0; j < npix; ++j) {
    double gj = grad[j];
    if (!raw_gradient) gj = norm.col_sums[j] > 0 ? gj / norm.col_sums[j] : 0.0;
    x[j] = std::max(x[j] + beta * gj, 0.0);
  }
  return r2;
}

struct CubeSlot {
  MatchSet match;
  KbrState state;
  Tensor3 t_cube;  // T_l, denormalized units
  Tensor3 w_cube;  // W_l, denormalized units
  double scale = 1.0;  // normalization in force when the state was last touched
};

}  // namespace

ReconResult sart_reconstruct(const SinogramSet& sinos, const FanBeamGeometry& g,
                             int iters, double beta, int threads,
                             const Tensor3* reference, bool raw_gradient) {
  g.validate();
  check_sinos(sinos, g);
  const int n_bins = static_cast<int>(sinos.size());
  const SartNormalizers norm = attenuation_normalizers(g, threads);
  ReconResult res;
  res.volume = Tensor3(g.n_h, g.n_w, n_bins);
  for (int k = 0; k < iters; ++k) {
    IterationStats st;
    st.iter = k;
    double r2 = 0;
    for (int s = 0; s < n_bins; ++s)
      r2 += sart_channel_sweep(res.volume.slice(s), sinos[s], g, norm, beta,
                               raw_gradient, threads);
    st.data_residual = std::sqrt(r2);
    if (reference) {
      if (!reference->same_dims(res.volume))
        throw config_error("recon: reference dims mismatch");
      std::vector<double> e(n_bins);
      const std::size_t npix = static_cast<std::size_t>(g.n_h) * g.n_w;
      for (int s = 0; s < n_bins; ++s) {
        const double *a = res.volume.slice(s), *b = reference->slice(s);
        double acc = 0;
        for (std::size_t i = 0; i < npix; ++i) {
          const double d = a[i] - b[i];
          acc += d * d;
        }
        e[s] = std::sqrt(acc / npix);
      }
      st.rmse = std::move(e);
    }
    res.trace.push_back(std::move(st));
  }
  return res;
}

ReconResult nlctf_reconstruct(const SinogramSet& sinos, const FanBeamGeometry& g,
                              const ReconConfig& cfg, const Tensor3* reference) {
  g.validate();
  cfg.validate();
  check_sinos(sinos, g);
  if (cfg.mu == 0.0) {
    // exact reduction: no cubes, pure SART
    return sart_reconstruct(sinos, g, cfg.outer_iters, cfg.beta, cfg.threads,
                            reference, cfg.raw_gradient);
  }

  const int n_bins = static_cast<int>(sinos.size());
  const SartNormalizers norm = attenuation_normalizers(g, cfg.threads);
  const KbrParams kbr_params = cfg.kbr();
  const std::vector<PatchPos> grid = build_grid(g.n_h, g.n_w, cfg.patch);

  ReconResult res;
  res.volume = Tensor3(g.n_h, g.n_w, n_bins);
  Tensor3& x = res.volume;
  std::vector<CubeSlot> slots;
  bool have_cubes = false;

  for (int k = 0; k < cfg.outer_iters; ++k) {
    IterationStats st;
    st.iter = k;

    // ---- image update, Eq.-style: data step and cube feedback both taken
    // at the current x ----
    Tensor3 reg_avg;
    if (have_cubes) {
      std::vector<std::pair<const Tensor3*, const MatchSet*>> parts;
      std::vector<Tensor3> reg(slots.size());
      parallel_for(0, static_cast<int>(slots.size()), cfg.threads, [&](int l) {
        reg[l] = extract_cube(x, slots[l].match, cfg.patch);
        reg[l] -= slots[l].t_cube;
        reg[l] += slots[l].w_cube;
      });
      parts.reserve(slots.size());
      for (std::size_t l = 0; l < slots.size(); ++l)
        parts.emplace_back(&reg[l], &slots[l].match);
      reg_avg = aggregate(parts, g.n_h, g.n_w, n_bins, cfg.patch).first;
    }
    double r2 = 0;
    for (int s = 0; s < n_bins; ++s)
      r2 += sart_channel_sweep(x.slice(s), sinos[s], g, norm, cfg.beta,
                               cfg.raw_gradient, cfg.threads);
    st.data_residual = std::sqrt(r2);
    if (have_cubes) {
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::max(x[i] - cfg.mu * reg_avg[i], 0.0);
    }

    // ---- normalize and (re)match ----
    auto [xn, scale] = normalize(x);
    if (k % cfg.match_interval == 0) {
      std::vector<MatchSet> matches(grid.size());
      parallel_for(0, static_cast<int>(grid.size()), cfg.threads, [&](int i) {
        matches[i] = match_patches(xn, grid[i], cfg.patch);
      });
      std::vector<CubeSlot> next(grid.size());
      parallel_for(0, static_cast<int>(grid.size()), cfg.threads, [&](int i) {
        if (!slots.empty() && slots[i].match == matches[i]) {
          next[i] = std::move(slots[i]);
        } else {
          // fresh membership: multipliers reset, factorization seeded by HOSVD
          CubeSlot slot;
          slot.match = std::move(matches[i]);
          const Tensor3 cube = extract_cube(xn, slot.match, cfg.patch);
          slot.state = KbrState::initialize(cube);
          slot.t_cube = Tensor3(cube.d1(), cube.d2(), cube.d3());
          slot.w_cube = slot.t_cube;
          slot.scale = scale;
          next[i] = std::move(slot);
        }
      });
      slots = std::move(next);
      have_cubes = true;
    }

    // ---- per-cube KBR passes and error-feedback update ----
    std::vector<double> cube_res(slots.size(), 0.0);
    parallel_for(0, static_cast<int>(slots.size()), cfg.threads, [&](int l) {
      CubeSlot& slot = slots[l];
      if (slot.scale != scale) {
        slot.state.rescale(slot.scale / scale);
        slot.scale = scale;
      }
      const Tensor3 cube_n = extract_cube(xn, slot.match, cfg.patch);
      Tensor3 w_n = slot.w_cube;
      w_n.scale_in_place(1.0 / scale);
      Tensor3 t_n;
      for (int inner = 0; inner < cfg.inner_iters; ++inner)
        t_n = kbr_step(slot.state, cube_n, w_n, kbr_params);
      slot.t_cube = denormalize(std::move(t_n), scale);
      Tensor3 diff = slot.t_cube - denormalize(cube_n, scale);
      cube_res[l] = diff.frobenius_norm();
      diff.scale_in_place(cfg.rho);
      slot.w_cube -= diff;
    });
    for (double v : cube_res) st.cube_residual += v;

    if (reference) {
      if (!reference->same_dims(x))
        throw config_error("recon: reference dims mismatch");
      std::vector<double> e(n_bins);
      const std::size_t npix = static_cast<std::size_t>(g.n_h) * g.n_w;
      for (int s = 0; s < n_bins; ++s) {
        const double *a = x.slice(s), *b = reference->slice(s);
        double acc = 0;
        for (std::size_t i = 0; i < npix; ++i) {
          const double d = a[i] - b[i];
          acc += d * d;
        }
        e[s] = std::sqrt(acc / npix);
      }
      st.rmse = std::move(e);
    }
    res.trace.push_back(std::move(st));
  }
  return res;
}

}  // namespace nlctf
