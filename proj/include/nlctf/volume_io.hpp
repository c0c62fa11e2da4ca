#pragma once

#include "nlctf/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nlctf {

/// Volume container: raw little-endian float64 payload in the Tensor3
/// layout plus a plain-text sidecar header "<path>.meta" holding dims and
/// provenance, enough to re-read the file without any config.
struct VolumeHeader {
  std::array<int, 3> dims{0, 0, 0};
  std::string units;                   // e.g. "cm^-1", "ln", "counts"
  std::vector<double> bin_edges_kev;   // optional
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> extra;  // free-form key = value lines
};

void write_volume(const std::string& path, const Tensor3& t,
                  const VolumeHeader& header);
std::pair<Tensor3, VolumeHeader> read_volume(const std::string& path);

/// 8-bit label map with the same sidecar scheme.
void write_labels(const std::string& path, const std::vector<std::uint8_t>& labels,
                  int rows, int cols);
std::pair<std::vector<std::uint8_t>, std::array<int, 2>> read_labels(
    const std::string& path);

/// 8-bit grayscale PNG; image is column-major rows x cols, row 0 at the
/// bottom (flipped into PNG scanline order on write).
void write_png_gray(const std::string& path, const double* image, int rows,
                    int cols, double window_lo, double window_hi);

/// 8-bit RGB PNG from three channel planes scaled to each plane's max.
void write_png_rgb(const std::string& path, const std::vector<double>& r,
                   const std::vector<double>& g, const std::vector<double>& b,
                   int rows, int cols);

}  // namespace nlctf
