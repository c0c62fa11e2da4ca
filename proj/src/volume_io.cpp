#include "nlctf/volume_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nlctf {

namespace {

std::string meta_path(const std::string& path) { return path + ".meta"; }

void write_meta_lines(std::ostream& os,
                      const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
}

std::map<std::string, std::string> read_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open header: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string k = line.substr(0, eq);
    std::string v = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t\r");
      s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
    };
    trim(k);
    trim(v);
    kv[k] = v;
  }
  return kv;
}

}  // namespace

void write_volume(const std::string& path, const Tensor3& t,
                  const VolumeHeader& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write: " + path);
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!out) throw config_error("short write: " + path);

  std::map<std::string, std::string> kv;
  kv["format"] = "spectral-volume/1";
  {
    std::ostringstream ss;
    ss << t.d1() << " " << t.d2() << " " << t.d3();
    kv["dims"] = ss.str();
  }
  kv["layout"] = "i1 + d1*i2 + d1*d2*i3, float64 little-endian";
  if (!header.units.empty()) kv["units"] = header.units;
  if (!header.bin_edges_kev.empty()) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < header.bin_edges_kev.size(); ++i)
      ss << (i ? " " : "") << header.bin_edges_kev[i];
    kv["bin_edges_kev"] = ss.str();
  }
  {
    std::ostringstream ss;
    ss.precision(17);
    ss << header.scale;
    kv["scale"] = ss.str();
  }
  kv["seed"] = std::to_string(header.seed);
  for (const auto& [k, v] : header.extra) kv[k] = v;

  std::ofstream meta(meta_path(path));
  if (!meta) throw config_error("cannot write: " + meta_path(path));
  write_meta_lines(meta, kv);
}

std::pair<Tensor3, VolumeHeader> read_volume(const std::string& path) {
  const auto kv = read_meta(meta_path(path));
  VolumeHeader h;
  {
    const auto it = kv.find("dims");
    if (it == kv.end()) throw config_error("header missing dims: " + path);
    std::istringstream ss(it->second);
    ss >> h.dims[0] >> h.dims[1] >> h.dims[2];
    if (!ss || h.dims[0] < 1 || h.dims[1] < 1 || h.dims[2] < 1)
      throw config_error("header has invalid dims: " + path);
  }
  if (auto it = kv.find("units"); it != kv.end()) h.units = it->second;
  if (auto it = kv.find("scale"); it != kv.end()) h.scale = std::stod(it->second);
  if (auto it = kv.find("seed"); it != kv.end()) h.seed = std::stoull(it->second);
  if (auto it = kv.find("bin_edges_kev"); it != kv.end()) {
    std::istringstream ss(it->second);
    double v;
    while (ss >> v) h.bin_edges_kev.push_back(v);
  }
  for (const auto& [k, v] : kv)
    if (k != "dims" && k != "units" && k != "scale" && k != "seed" &&
        k != "bin_edges_kev" && k != "format" && k != "layout")
      h.extra[k] = v;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open: " + path);
  const std::size_t n =
      static_cast<std::size_t>(h.dims[0]) * h.dims[1] * h.dims[2];
  std::vector<double> data(n);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double))
    throw config_error("payload length does not match dims: " + path);
  return {Tensor3(h.dims[0], h.dims[1], h.dims[2], std::move(data)), h};
}

void write_labels(const std::string& path, const std::vector<std::uint8_t>& labels,
                  int rows, int cols) {
  if (labels.size() != static_cast<std::size_t>(rows) * cols)
    throw config_error("label map size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write: " + path);
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
  std::map<std::string, std::string> kv;
  kv["format"] = "label-map/1";
  kv["dims"] = std::to_string(rows) + " " + std::to_string(cols);
  kv["layout"] = "r + rows*c, uint8";
  std::ofstream meta(meta_path(path));
  if (!meta) throw config_error("cannot write: " + meta_path(path));
  write_meta_lines(meta, kv);
}

std::pair<std::vector<std::uint8_t>, std::array<int, 2>> read_labels(
    const std::string& path) {
  const auto kv = read_meta(meta_path(path));
  const auto it = kv.find("dims");
  if (it == kv.end()) throw config_error("header missing dims: " + path);
  std::istringstream ss(it->second);
  int rows = 0, cols = 0;
  ss >> rows >> cols;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open: " + path);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (static_cast<std::size_t>(in.gcount()) != data.size())
    throw config_error("payload length does not match dims: " + path);
  return {std::move(data), {rows, cols}};
}

namespace {

void write_png_impl(const std::string& path, int rows, int cols,
                    const std::vector<std::uint8_t>& bytes, int color_type,
                    int channels) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw config_error("cannot write: " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw numeric_error("libpng failure writing " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, cols, rows, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows_ptr(rows);
  for (int i = 0; i < rows; ++i)
    rows_ptr[i] = const_cast<png_bytep>(bytes.data() +
                                        static_cast<std::size_t>(i) * cols * channels);
  png_write_image(png, rows_ptr.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

std::uint8_t to8(double v, double lo, double hi) {
  const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
  const double c = t < 0 ? 0.0 : (t > 1 ? 1.0 : t);
  return static_cast<std::uint8_t>(c * 255.0 + 0.5);
}

}  // namespace

void write_png_gray(const std::string& path, const double* image, int rows,
                    int cols, double window_lo, double window_hi) {
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {     // PNG scanline i = image row rows-1-i
    const int r = rows - 1 - i;
    for (int c = 0; c < cols; ++c)
      bytes[static_cast<std::size_t>(i) * cols + c] =
          to8(image[r + static_cast<std::size_t>(rows) * c], window_lo, window_hi);
  }
  write_png_impl(path, rows, cols, bytes, PNG_COLOR_TYPE_GRAY, 1);
}

void write_png_rgb(const std::string& path, const std::vector<double>& r,
                   const std::vector<double>& g, const std::vector<double>& b,
                   int rows, int cols) {
  auto plane_max = [](const std::vector<double>& p) {
    double m = 0;
    for (double v : p) m = std::max(m, v);
    return m > 0 ? m : 1.0;
  };
  const double mr = plane_max(r), mg = plane_max(g), mb = plane_max(b);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(rows) * cols * 3);
  for (int i = 0; i < rows; ++i) {
    const int row = rows - 1 - i;
    for (int c = 0; c < cols; ++c) {
      const std::size_t src = row + static_cast<std::size_t>(rows) * c;
      const std::size_t dst = (static_cast<std::size_t>(i) * cols + c) * 3;
      bytes[dst + 0] = to8(r[src], 0, mr);
      bytes[dst + 1] = to8(g[src], 0, mg);
      bytes[dst + 2] = to8(b[src], 0, mb);
    }
  }
  write_png_impl(path, rows, cols, bytes, PNG_COLOR_TYPE_RGB, 3);
}

}  // namespace nlctf
