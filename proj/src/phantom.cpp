#include "nlctf/phantom.hpp"

#include "nlctf/parallel.hpp"

#include <cmath>
#include <random>

namespace nlctf {

void PhantomSpec::validate(int n_bins) const {
  if (materials.empty()) throw config_error("phantom: materials list is empty");
  for (const auto& m : materials) {
    if (static_cast<int>(m.mu.size()) != n_bins)
      throw config_error("phantom: material '" + m.name + "' needs " +
                         std::to_string(n_bins) + " mu values");
    for (double v : m.mu)
      if (!(v > 0))
        throw config_error("phantom: material '" + m.name + "' has non-positive mu");
  }
  for (const auto& e : shapes) {
    if (e.material < 0 || e.material >= static_cast<int>(materials.size()))
      throw config_error("phantom: shape references unknown material index");
    if (!(e.ra > 0) || !(e.rb > 0))
      throw config_error("phantom: ellipse semi-axes must be positive");
  }
  if (n_w < 1 || n_h < 1 || !(pixel_size > 0))
    throw config_error("phantom: invalid grid");
}

GroundTruth rasterize_phantom(const PhantomSpec& spec, int n_bins) {
  spec.validate(n_bins);
  GroundTruth gt;
  gt.volume = Tensor3(spec.n_h, spec.n_w, n_bins);
  gt.labels.assign(static_cast<std::size_t>(spec.n_h) * spec.n_w, 0);

  // shapes sorted by priority would lose the declaration-order tie-break;
  // instead test every shape per pixel and keep the best
  for (int c = 0; c < spec.n_w; ++c) {
    const double x = (c + 0.5) * spec.pixel_size - 0.5 * spec.n_w * spec.pixel_size;
    for (int r = 0; r < spec.n_h; ++r) {
      const double y = (r + 0.5) * spec.pixel_size - 0.5 * spec.n_h * spec.pixel_size;
      int best = -1, best_prio = 0;
      for (int i = 0; i < static_cast<int>(spec.shapes.size()); ++i) {
        const Ellipse& e = spec.shapes[i];
        const double dx = x - e.cx, dy = y - e.cy;
        const double co = std::cos(e.rot), si = std::sin(e.rot);
        const double u = (dx * co + dy * si) / e.ra;
        const double v = (-dx * si + dy * co) / e.rb;
        if (u * u + v * v <= 1.0 && (best < 0 || e.priority >= best_prio)) {
          best = i;
          best_prio = e.priority;
        }
      }
      if (best >= 0) {
        const Material& m = spec.materials[spec.shapes[best].material];
        for (int s = 0; s < n_bins; ++s) gt.volume(r, c, s) = m.mu[s];
        gt.labels[r + static_cast<std::size_t>(spec.n_h) * c] =
            static_cast<std::uint8_t>(spec.shapes[best].material + 1);
      }
    }
  }
  return gt;
}

void SpectrumModel::validate() const {
  if (fractions.empty()) throw config_error("spectrum: no bins");
  if (bin_edges.size() != fractions.size() + 1)
    throw config_error("spectrum: need S+1 bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i)
    if (!(bin_edges[i] > bin_edges[i - 1]))
      throw config_error("spectrum: bin edges must be strictly increasing");
  double sum = 0;
  for (double f : fractions) {
    if (f < 0) throw config_error("spectrum: negative bin fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw config_error("spectrum: bin fractions must sum to 1");
  if (!(photons_per_path > 0))
    throw config_error("spectrum: photons_per_path must be positive");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Tensor3 simulate_counts(const Tensor3& truth_volume, const FanBeamGeometry& g,
                        const SpectrumModel& spectrum, std::uint64_t seed,
                        bool poisson_noise, int threads) {
  spectrum.validate();
  const int n_bins = spectrum.bins();
  if (truth_volume.d1() != g.n_h || truth_volume.d2() != g.n_w ||
      truth_volume.d3() != n_bins)
    throw config_error("simulate_counts: volume does not match geometry/spectrum");

  Tensor3 counts(g.n_views, g.n_det, n_bins);
  for (int s = 0; s < n_bins; ++s) {
    const Sinogram path = project_attenuation(truth_volume.slice(s), g, threads);
    const double n0 = spectrum.bin_photons(s);
    double* out = counts.slice(s);
    parallel_for(0, g.n_views, threads, [&](int v) {
      for (int d = 0; d < g.n_det; ++d) {
        const double lambda = n0 * std::exp(-path.at(v, d));
        const std::size_t idx = static_cast<std::size_t>(v) * g.n_det + d;
        if (!poisson_noise) {
          out[idx] = lambda;
        } else {
          std::uint64_t h = splitmix64(seed ^ splitmix64(
              (static_cast<std::uint64_t>(s) << 42) ^
              (static_cast<std::uint64_t>(v) << 20) ^
              static_cast<std::uint64_t>(d)));
          std::mt19937_64 rng(h);
          std::poisson_distribution<long long> pois(lambda);
          out[idx] = static_cast<double>(pois(rng));
        }
      }
    });
  }
  return counts;
}

SinogramSet counts_to_sinogram(const Tensor3& counts,
                               const SpectrumModel& spectrum) {
  spectrum.validate();
  if (counts.d3() != spectrum.bins())
    throw config_error("counts_to_sinogram: bin count mismatch");
  SinogramSet set;
  set.reserve(spectrum.bins());
  for (int s = 0; s < spectrum.bins(); ++s) {
    Sinogram sino(counts.d1(), counts.d2());
    const double n0 = spectrum.bin_photons(s);
    const double* in = counts.slice(s);
    for (std::size_t i = 0; i < sino.size(); ++i)
      sino.values[i] = std::log(n0 / std::max(in[i], 1.0));
    set.push_back(std::move(sino));
  }
  return set;
}

}  // namespace nlctf
