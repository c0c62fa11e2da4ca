#pragma once

#include "nlctf/geometry.hpp"
#include "nlctf/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nlctf {

struct Material {
  std::string name;
  std::vector<double> mu;  // linear attenuation per bin [cm^-1], all > 0
};

struct Ellipse {
  double cx = 0, cy = 0;       // center [mm], isocenter origin
  double ra = 1, rb = 1;       // semi-axes [mm]
  double rot = 0;              // rotation [rad]
  int material = 0;            // index into PhantomSpec::materials
  int priority = 0;            // higher wins on overlap
};

struct PhantomSpec {
  std::vector<Material> materials;
  std::vector<Ellipse> shapes;
  int n_w = 128, n_h = 128;
  double pixel_size = 0.29;  // [mm]

  void validate(int n_bins) const;
};

/// Per-bin attenuation volume (n_h, n_w, S) plus a label map of
/// material index + 1 (0 = background), column-major like the images.
struct GroundTruth {
  Tensor3 volume;
  std::vector<std::uint8_t> labels;
};

/// Paint each pixel with the mu vector of the highest-priority ellipse
/// containing its center (ties broken by shape order; later wins).
GroundTruth rasterize_phantom(const PhantomSpec& spec, int n_bins);

struct SpectrumModel {
  std::vector<double> bin_edges;  // S+1 strictly increasing [keV]
  double photons_per_path = 2e4;  // N0, total counts per ray
  std::vector<double> fractions;  // per-bin share, >= 0, sums to 1

  int bins() const { return static_cast<int>(fractions.size()); }
  double bin_photons(int s) const { return photons_per_path * fractions[s]; }
  void validate() const;
};

/// Expected and (optionally) Poisson-sampled transmitted counts per
/// (view, det, bin). The random stream is counter-based per (bin, view, det),
/// so serial and parallel runs are bit-identical for a given seed.
Tensor3 simulate_counts(const Tensor3& truth_volume, const FanBeamGeometry& g,
                        const SpectrumModel& spectrum, std::uint64_t seed,
                        bool poisson_noise, int threads = 0);

/// Log-domain data y = ln(N0_s / max(counts, 1)) per bin.
SinogramSet counts_to_sinogram(const Tensor3& counts,
                               const SpectrumModel& spectrum);

}  // namespace nlctf
