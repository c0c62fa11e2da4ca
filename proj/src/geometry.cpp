#include "nlctf/geometry.hpp"

#include "nlctf/parallel.hpp"

namespace nlctf {

namespace {

constexpr int kViewBlock = 16;  // fixed reduction granularity, thread-invariant

}  // namespace

Sinogram forward_project(const double* image, const FanBeamGeometry& g,
                         int threads) {
  g.validate();
  Sinogram sino(g.n_views, g.n_det);
  const int n_h = g.n_h;
  parallel_for(0, g.n_views, threads, [&](int v) {
    for (int d = 0; d < g.n_det; ++d) {
      double acc = 0.0;
      trace_ray(g, v, d, [&](int r, int c, double w) {
        acc += w * image[r + static_cast<std::size_t>(n_h) * c];
      });
      sino.at(v, d) = acc;
    }
  });
  return sino;
}

std::vector<double> back_project(const Sinogram& sino, const FanBeamGeometry& g,
                                 int threads) {
  g.validate();
  if (sino.n_views != g.n_views || sino.n_det != g.n_det)
    throw config_error("back_project: sinogram shape mismatch");
  const std::size_t npix = static_cast<std::size_t>(g.n_w) * g.n_h;
  const int n_blocks = (g.n_views + kViewBlock - 1) / kViewBlock;
  std::vector<std::vector<double>> partials(n_blocks);
  parallel_for(0, n_blocks, threads, [&](int b) {
    std::vector<double> local(npix, 0.0);
    const int v_hi = std::min(g.n_views, (b + 1) * kViewBlock);
    for (int v = b * kViewBlock; v < v_hi; ++v) {
      for (int d = 0; d < g.n_det; ++d) {
        const double val = sino.at(v, d);
        if (val == 0.0) continue;
        trace_ray(g, v, d, [&](int r, int c, double w) {
          local[r + static_cast<std::size_t>(g.n_h) * c] += w * val;
        });
      }
    }
    partials[b] = std::move(local);
  });
  std::vector<double> image(npix, 0.0);
  for (int b = 0; b < n_blocks; ++b)
    for (std::size_t i = 0; i < npix; ++i) image[i] += partials[b][i];
  return image;
}

SartNormalizers sart_normalizers(const FanBeamGeometry& g, int threads) {
  g.validate();
  SartNormalizers n;
  n.row_sums.assign(static_cast<std::size_t>(g.n_views) * g.n_det, 0.0);
  const std::size_t npix = static_cast<std::size_t>(g.n_w) * g.n_h;
  const int n_blocks = (g.n_views + kViewBlock - 1) / kViewBlock;
  std::vector<std::vector<double>> partials(n_blocks);
  parallel_for(0, n_blocks, threads, [&](int b) {
    std::vector<double> local(npix, 0.0);
    const int v_hi = std::min(g.n_views, (b + 1) * kViewBlock);
    for (int v = b * kViewBlock; v < v_hi; ++v) {
      for (int d = 0; d < g.n_det; ++d) {
        double rs = 0.0;
        trace_ray(g, v, d, [&](int r, int c, double w) {
          rs += w;
          local[r + static_cast<std::size_t>(g.n_h) * c] += w;
        });
        n.row_sums[static_cast<std::size_t>(v) * g.n_det + d] = rs;
      }
    }
    partials[b] = std::move(local);
  });
  n.col_sums.assign(npix, 0.0);
  for (int b = 0; b < n_blocks; ++b)
    for (std::size_t i = 0; i < npix; ++i) n.col_sums[i] += partials[b][i];
  return n;
}

Sinogram project_attenuation(const double* image_cm, const FanBeamGeometry& g,
                             int threads) {
  Sinogram s = forward_project(image_cm, g, threads);
  for (double& v : s.values) v *= kMmToCm;
  return s;
}

std::vector<double> backproject_attenuation(const Sinogram& sino,
                                            const FanBeamGeometry& g,
                                            int threads) {
  std::vector<double> img = back_project(sino, g, threads);
  for (double& v : img) v *= kMmToCm;
  return img;
}

SartNormalizers attenuation_normalizers(const FanBeamGeometry& g, int threads) {
  SartNormalizers n = sart_normalizers(g, threads);
  for (double& v : n.row_sums) v *= kMmToCm;
  for (double& v : n.col_sums) v *= kMmToCm;
  return n;
}

}  // namespace nlctf
