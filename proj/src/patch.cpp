#include "nlctf/patch.hpp"

#include <algorithm>
#include <cmath>

namespace nlctf {

std::vector<PatchPos> build_grid(int n_rows, int n_cols,
                                 const PatchGridSpec& spec) {
  spec.validate();
  if (n_rows < spec.patch_h || n_cols < spec.patch_w)
    throw config_error("build_grid: patch larger than image");
  const int last_r = n_rows - spec.patch_h;
  const int last_c = n_cols - spec.patch_w;
  auto axis = [&](int last) {
    std::vector<int> v;
    for (int p = 0; p < last; p += spec.stride) v.push_back(p);
    v.push_back(last);  // full coverage of the trailing edge
    return v;
  };
  const std::vector<int> rows = axis(last_r), cols = axis(last_c);
  std::vector<PatchPos> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows)
    for (int c : cols) out.emplace_back(r, c);
  return out;
}

namespace {

// squared distance between the spatial-spectral patches at a and b,
// aborting once the running sum exceeds cutoff
double patch_dist(const Tensor3& vol, PatchPos a, PatchPos b,
                  const PatchGridSpec& spec, double cutoff) {
  const int d1 = vol.d1();
  double acc = 0.0;
  for (int s = 0; s < vol.d3(); ++s) {
    const double* sl = vol.slice(s);
    for (int c = 0; c < spec.patch_w; ++c) {
      const double* pa = sl + a.first + static_cast<std::size_t>(d1) * (a.second + c);
      const double* pb = sl + b.first + static_cast<std::size_t>(d1) * (b.second + c);
      for (int r = 0; r < spec.patch_h; ++r) {
        const double d = pa[r] - pb[r];
        acc += d * d;
      }
    }
    if (acc > cutoff) return acc;
  }
  return acc;
}

struct Cand {
  double dist;
  long raster;  // r * n_cols + c, for tie-breaking
  PatchPos pos;
  bool operator<(const Cand& o) const {
    return dist != o.dist ? dist < o.dist : raster < o.raster;
  }
};

}  // namespace

MatchSet match_patches(const Tensor3& volume, PatchPos ref_pos,
                       const PatchGridSpec& spec) {
  spec.validate();
  const int last_r = volume.d1() - spec.patch_h;
  const int last_c = volume.d2() - spec.patch_w;
  if (ref_pos.first < 0 || ref_pos.first > last_r || ref_pos.second < 0 ||
      ref_pos.second > last_c)
    throw config_error("match_patches: reference position out of bounds");

  const int half = spec.search_window / 2;
  const int r_lo = std::max(0, ref_pos.first - half);
  const int r_hi = std::min(last_r, ref_pos.first + half);
  const int c_lo = std::max(0, ref_pos.second - half);
  const int c_hi = std::min(last_c, ref_pos.second + half);

  // keep the best t candidates in a small sorted buffer
  std::vector<Cand> best;
  best.reserve(spec.t + 1);
  const long n_cols = volume.d2();
  for (int r = r_lo; r <= r_hi; ++r) {
    for (int c = c_lo; c <= c_hi; ++c) {
      if (r == ref_pos.first && c == ref_pos.second) continue;
      const double cutoff = best.size() < static_cast<std::size_t>(spec.t)
                                ? std::numeric_limits<double>::infinity()
                                : best.back().dist;
      const double d = patch_dist(volume, ref_pos, {r, c}, spec, cutoff);
      Cand cand{d, r * n_cols + c, {r, c}};
      if (best.size() == static_cast<std::size_t>(spec.t) &&
          !(cand < best.back()))
        continue;
      best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
      if (best.size() > static_cast<std::size_t>(spec.t)) best.pop_back();
    }
  }

  MatchSet out;
  out.reference_pos = ref_pos;
  out.neighbor_pos.reserve(best.size());
  out.distances.reserve(best.size());
  for (const Cand& c : best) {
    out.neighbor_pos.push_back(c.pos);
    out.distances.push_back(c.dist);
  }
  return out;
}

namespace {

void copy_patch(const Tensor3& vol, PatchPos p, const PatchGridSpec& spec,
                int slab, Tensor3& cube) {
  const int d1 = vol.d1();
  for (int s = 0; s < vol.d3(); ++s) {
    const double* sl = vol.slice(s);
    int idx = 0;
    for (int c = 0; c < spec.patch_w; ++c) {
      const double* col = sl + p.first + static_cast<std::size_t>(d1) * (p.second + c);
      for (int r = 0; r < spec.patch_h; ++r) cube(idx++, s, slab) = col[r];
    }
  }
}

}  // namespace

Tensor3 extract_cube(const Tensor3& volume, const MatchSet& match,
                     const PatchGridSpec& spec) {
  const int slabs = 1 + static_cast<int>(match.neighbor_pos.size());
  Tensor3 cube(spec.patch_w * spec.patch_h, volume.d3(), slabs);
  copy_patch(volume, match.reference_pos, spec, 0, cube);
  for (int j = 0; j < slabs - 1; ++j)
    copy_patch(volume, match.neighbor_pos[j], spec, j + 1, cube);
  return cube;
}

void scatter_cube(const Tensor3& cube, const MatchSet& match,
                  const PatchGridSpec& spec, Tensor3& acc, Mat& counts) {
  const int slabs = cube.d3();
  const int d1 = acc.d1();
  auto scatter_slab = [&](PatchPos p, int slab) {
    for (int s = 0; s < acc.d3(); ++s) {
      double* sl = acc.slice(s);
      int idx = 0;
      for (int c = 0; c < spec.patch_w; ++c) {
        double* col = sl + p.first + static_cast<std::size_t>(d1) * (p.second + c);
        for (int r = 0; r < spec.patch_h; ++r) col[r] += cube(idx++, s, slab);
      }
    }
    counts.block(p.first, p.second, spec.patch_h, spec.patch_w).array() += 1.0;
  };
  scatter_slab(match.reference_pos, 0);
  for (int j = 0; j < slabs - 1; ++j) scatter_slab(match.neighbor_pos[j], j + 1);
}

std::pair<Tensor3, Mat> aggregate(
    const std::vector<std::pair<const Tensor3*, const MatchSet*>>& cubes,
    int n_rows, int n_cols, int n_channels, const PatchGridSpec& spec) {
  Tensor3 acc(n_rows, n_cols, n_channels);
  Mat counts = Mat::Zero(n_rows, n_cols);
  for (const auto& [cube, match] : cubes) {
    if (cube->d1() != spec.patch_w * spec.patch_h || cube->d2() != n_channels)
      throw config_error("aggregate: cube dims mismatch");
    scatter_cube(*cube, *match, spec, acc, counts);
  }
  Tensor3 avg = acc;
  for (int s = 0; s < n_channels; ++s) {
    double* sl = avg.slice(s);
    for (int c = 0; c < n_cols; ++c)
      for (int r = 0; r < n_rows; ++r) {
        const double n = counts(r, c);
        double& v = sl[r + static_cast<std::size_t>(n_rows) * c];
        v = n > 0 ? v / n : 0.0;
      }
  }
  return {std::move(avg), std::move(counts)};
}

double normalization_scale(const Tensor3& volume) {
  const double mx = volume.max_value();
  if (!(mx > 0.0)) return 1.0;
  return std::exp2(std::ceil(std::log2(mx)));
}

std::pair<Tensor3, double> normalize(const Tensor3& volume) {
  const double scale = normalization_scale(volume);
  Tensor3 out = volume;
  out.scale_in_place(1.0 / scale);
  return {std::move(out), scale};
}

Tensor3 denormalize(Tensor3 t, double scale) {
  t.scale_in_place(scale);
  return t;
}

}  // namespace nlctf
