#pragma once

#include "nlctf/tensor.hpp"

#include <utility>
#include <vector>

namespace nlctf {

/// Position of a patch: (row, col) of its top-left pixel.
using PatchPos = std::pair<int, int>;

struct PatchGridSpec {
  int patch_w = 6;
  int patch_h = 6;
  int stride = 2;
  int search_window = 80;  // square side; candidates within +-search_window/2
  int t = 50;              // matched neighbors per reference

  void validate() const {
    if (patch_w < 2 || patch_h < 2)
      throw config_error("patch size must be at least 2x2");
    if (stride < 1) throw config_error("stride must be >= 1");
    if (t < 1) throw config_error("t must be >= 1");
    if (search_window < patch_w || search_window < patch_h)
      throw config_error("search window must cover the patch size");
  }
};

struct MatchSet {
  PatchPos reference_pos;
  std::vector<PatchPos> neighbor_pos;  // sorted by (distance, raster order)
  std::vector<double> distances;       // non-decreasing, excludes reference

  bool operator==(const MatchSet& o) const {
    return reference_pos == o.reference_pos && neighbor_pos == o.neighbor_pos;
  }
};

/// One non-local cube: slab 0 is the reference patch, slabs 1..t the matched
/// neighbors; each slab is the patch vectorized row-fastest across all S
/// channels. scale records the volume normalization in force at extraction.
struct CubeStack {
  Tensor3 data;  // (patch_w*patch_h, S, t+1)
  MatchSet origin;
  double scale = 1.0;
};

/// Reference positions covering an n_rows x n_cols image at the given
/// stride, always including the last valid row/col. Raster order.
std::vector<PatchPos> build_grid(int n_rows, int n_cols,
                                 const PatchGridSpec& spec);

/// Exhaustive block matching inside the search window centered at ref_pos
/// (clipped at borders). Distance is the squared Euclidean norm over the
/// full spatial-spectral patch; the t smallest candidates excluding the
/// reference are kept, ties broken by raster order. Small images may yield
/// fewer than t neighbors.
MatchSet match_patches(const Tensor3& volume, PatchPos ref_pos,
                       const PatchGridSpec& spec);

/// Gather the reference and neighbor patches into a cube.
Tensor3 extract_cube(const Tensor3& volume, const MatchSet& match,
                     const PatchGridSpec& spec);

/// Scatter-add one cube back into acc and bump per-pixel counts (counts are
/// identical across channels since every slab covers all S channels).
void scatter_cube(const Tensor3& cube, const MatchSet& match,
                  const PatchGridSpec& spec, Tensor3& acc, Mat& counts);

/// Scatter-add a list of cubes; returns the count-averaged volume and the
/// per-pixel count map (count 0 -> value 0). Accumulation order is the list
/// order, so results are bit-reproducible.
std::pair<Tensor3, Mat> aggregate(
    const std::vector<std::pair<const Tensor3*, const MatchSet*>>& cubes,
    int n_rows, int n_cols, int n_channels, const PatchGridSpec& spec);

/// Volume normalization. The scale is the smallest power of two >= the
/// global max (1 when the volume has no positive entry), which keeps
/// normalized values in [0,1] and makes denormalize(normalize(x)) bit-exact
/// (division and multiplication by powers of two are lossless).
double normalization_scale(const Tensor3& volume);
std::pair<Tensor3, double> normalize(const Tensor3& volume);
Tensor3 denormalize(Tensor3 t, double scale);

}  // namespace nlctf
