#pragma once

#include "nlctf/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace nlctf {

/// 2-D fan-beam scan with a flat detector.
///
/// Conventions: isocenter at the image center; view v looks from angle
/// phi = 2*pi*v/n_views (counterclockwise, starting at 0 rad); the source
/// sits at sod*(cos phi, sin phi) and the detector line is perpendicular to
/// the source-isocenter axis at distance sdd from the source, cells centered
/// on that axis. Image pixel (r, c) covers x in [xmin + c*p, xmin + (c+1)*p],
/// y in [ymin + r*p, ymin + (r+1)*p] with p = pixel_size; channel images are
/// stored column-major (r + n_h*c).
struct FanBeamGeometry {
  double sod = 132.0;   // source-to-isocenter [mm]
  double sdd = 180.0;   // source-to-detector [mm]
  int n_det = 512;      // detector cells
  double det_pitch = 0.1;  // cell width [mm]
  int n_views = 640;    // views over 360 degrees
  int n_w = 512;        // image columns (x)
  int n_h = 512;        // image rows (y)
  double pixel_size = 0.0727;  // [mm]

  double fov_diameter() const {
    return 2.0 * sod * std::sin(std::atan(0.5 * n_det * det_pitch / sdd));
  }
  void validate() const {
    if (!(sdd > sod && sod > 0))
      throw config_error("geometry: need sdd > sod > 0");
    if (n_det < 1 || n_views < 1 || n_w < 1 || n_h < 1)
      throw config_error("geometry: counts must be >= 1");
    if (det_pitch <= 0 || pixel_size <= 0)
      throw config_error("geometry: pitch and pixel size must be positive");
    const double circle = std::min(n_w, n_h) * pixel_size;
    if (fov_diameter() + 1e-9 < circle)
      throw config_error("geometry: field of view does not cover the reconstruction circle");
  }
};

/// Line integrals for one channel, (view, det) at index view*n_det + det.
struct Sinogram {
  int n_views = 0;
  int n_det = 0;
  std::vector<double> values;

  Sinogram() = default;
  Sinogram(int nv, int nd)
      : n_views(nv), n_det(nd),
        values(static_cast<std::size_t>(nv) * nd, 0.0) {}
  double& at(int v, int d) { return values[static_cast<std::size_t>(v) * n_det + d]; }
  double at(int v, int d) const { return values[static_cast<std::size_t>(v) * n_det + d]; }
  std::size_t size() const { return values.size(); }
};

using SinogramSet = std::vector<Sinogram>;  // one per energy bin

/// Exact ray traversal (Siddon): visits every pixel crossed by the segment
/// source -> detector-cell center with the intersection length in mm.
/// visit(r, c, length_mm) is called per crossed pixel; forward, adjoint and
/// normalizer computations all share these weights, which is what makes the
/// adjoint test exact.
template <class Fn>
void trace_ray(const FanBeamGeometry& g, int view, int det, Fn&& visit) {
  const double phi = 2.0 * M_PI * view / g.n_views;
  const double cphi = std::cos(phi), sphi = std::sin(phi);
  const double sx = g.sod * cphi, sy = g.sod * sphi;
  const double dcx = (g.sod - g.sdd) * cphi, dcy = (g.sod - g.sdd) * sphi;
  const double off = (det - 0.5 * (g.n_det - 1)) * g.det_pitch;
  const double px = dcx - off * sphi, py = dcy + off * cphi;

  const double dx = px - sx, dy = py - sy;
  const double len = std::hypot(dx, dy);
  const double xmin = -0.5 * g.n_w * g.pixel_size;
  const double ymin = -0.5 * g.n_h * g.pixel_size;
  const double xmax = -xmin, ymax = -ymin;

  double a_min = 0.0, a_max = 1.0;
  constexpr double kTiny = 1e-12;
  if (std::abs(dx) > kTiny) {
    const double a0 = (xmin - sx) / dx, a1 = (xmax - sx) / dx;
    a_min = std::max(a_min, std::min(a0, a1));
    a_max = std::min(a_max, std::max(a0, a1));
  } else if (sx < xmin || sx > xmax) {
    return;
  }
  if (std::abs(dy) > kTiny) {
    const double a0 = (ymin - sy) / dy, a1 = (ymax - sy) / dy;
    a_min = std::max(a_min, std::min(a0, a1));
    a_max = std::min(a_max, std::max(a0, a1));
  } else if (sy < ymin || sy > ymax) {
    return;
  }
  if (a_min >= a_max) return;

  // next crossing parameter and per-cell step along each axis
  const double inf = std::numeric_limits<double>::infinity();
  double ax = inf, ay = inf, dax = inf, day = inf;
  if (std::abs(dx) > kTiny) {
    dax = g.pixel_size / std::abs(dx);
    const double x_at = sx + a_min * dx;
    double k = (x_at - xmin) / g.pixel_size;
    const double plane = dx > 0 ? std::floor(k) + 1.0 : std::ceil(k) - 1.0;
    ax = ((xmin + plane * g.pixel_size) - sx) / dx;
    if (ax <= a_min) ax += dax;  // guard against landing exactly on a plane
  }
  if (std::abs(dy) > kTiny) {
    day = g.pixel_size / std::abs(dy);
    const double y_at = sy + a_min * dy;
    double k = (y_at - ymin) / g.pixel_size;
    const double plane = dy > 0 ? std::floor(k) + 1.0 : std::ceil(k) - 1.0;
    ay = ((ymin + plane * g.pixel_size) - sy) / dy;
    if (ay <= a_min) ay += day;
  }

  double a_prev = a_min;
  while (a_prev < a_max - kTiny) {
    const double a_next = std::min({ax, ay, a_max});
    const double seg = a_next - a_prev;
    if (seg > kTiny) {
      const double mid = 0.5 * (a_prev + a_next);
      int c = static_cast<int>(std::floor((sx + mid * dx - xmin) / g.pixel_size));
      int r = static_cast<int>(std::floor((sy + mid * dy - ymin) / g.pixel_size));
      if (r >= 0 && r < g.n_h && c >= 0 && c < g.n_w) visit(r, c, seg * len);
    }
    if (ax <= ay) ax += dax;
    else ay += day;
    a_prev = a_next;
  }
}

/// Sinogram of one channel image (image column-major n_h x n_w, values in
/// arbitrary units; output = unit * mm). Parallel over views.
Sinogram forward_project(const double* image, const FanBeamGeometry& g,
                         int threads = 0);

/// Exact adjoint of forward_project. Deterministic regardless of thread
/// count (fixed-size view blocks merged in order).
std::vector<double> back_project(const Sinogram& sino, const FanBeamGeometry& g,
                                 int threads = 0);

struct SartNormalizers {
  std::vector<double> row_sums;  // per (view, det): ray path length in grid [mm]
  std::vector<double> col_sums;  // per pixel (column-major)
};

/// Row sums (per-ray weight totals) and column sums (per-pixel weight
/// totals) of the system matrix. Zero entries are masked by the SART sweep.
SartNormalizers sart_normalizers(const FanBeamGeometry& g, int threads = 0);

/// mm -> cm conversion applied to line integrals. Attenuation images are in
/// cm^-1 while the geometry is in mm; this wrapper is the single place the
/// unit conversion lives.
inline constexpr double kMmToCm = 0.1;

Sinogram project_attenuation(const double* image_cm, const FanBeamGeometry& g,
                             int threads = 0);
std::vector<double> backproject_attenuation(const Sinogram& sino,
                                            const FanBeamGeometry& g,
                                            int threads = 0);
SartNormalizers attenuation_normalizers(const FanBeamGeometry& g,
                                        int threads = 0);

}  // namespace nlctf
