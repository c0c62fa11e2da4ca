#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nlctf {

/// Raised when an input drives a numerical routine outside its domain
/// (non-finite values, SVD on garbage, ...). Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for invalid configuration or mismatched shapes. CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Mat = Eigen::MatrixXd;

/// Dense 3rd-order tensor of doubles.
///
/// Linear layout: element (i1,i2,i3) lives at index i1 + d1*i2 + d1*d2*i3,
/// i.e. the first index varies fastest. A spectral volume is stored as
/// (row, col, channel) in this layout, so one channel is a contiguous
/// column-major image.
class Tensor3 {
 public:
  Tensor3() : dims_{0, 0, 0} {}
  Tensor3(int d1, int d2, int d3) : dims_{d1, d2, d3} {
    if (d1 <= 0 || d2 <= 0 || d3 <= 0)
      throw config_error("Tensor3: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(d1) * d2 * d3, 0.0);
  }
  Tensor3(int d1, int d2, int d3, std::vector<double> data)
      : dims_{d1, d2, d3}, data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(d1) * d2 * d3)
      throw config_error("Tensor3: data length does not match dims");
  }

  int d1() const { return dims_[0]; }
  int d2() const { return dims_[1]; }
  int d3() const { return dims_[2]; }
  std::array<int, 3> dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int i1, int i2, int i3) {
    return data_[static_cast<std::size_t>(i1) +
                 static_cast<std::size_t>(dims_[0]) * i2 +
                 static_cast<std::size_t>(dims_[0]) * dims_[1] * i3];
  }
  double operator()(int i1, int i2, int i3) const {
    return data_[static_cast<std::size_t>(i1) +
                 static_cast<std::size_t>(dims_[0]) * i2 +
                 static_cast<std::size_t>(dims_[0]) * dims_[1] * i3];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  /// Contiguous slice i3 = k, a d1 x d2 column-major image.
  double* slice(int k) {
    return data_.data() + static_cast<std::size_t>(dims_[0]) * dims_[1] * k;
  }
  const double* slice(int k) const {
    return data_.data() + static_cast<std::size_t>(dims_[0]) * dims_[1] * k;
  }

  bool same_dims(const Tensor3& o) const { return dims_ == o.dims_; }

  void setZero() { std::fill(data_.begin(), data_.end(), 0.0); }
  void scale_in_place(double f) {
    for (double& v : data_) v *= f;
  }
  double frobenius_norm() const {
    double s = 0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }
  double max_value() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_)
      if (v > m) m = v;
    return m;
  }
  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Tensor3& operator+=(const Tensor3& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double f, Tensor3 a) {
    a.scale_in_place(f);
    return a;
  }

 private:
  void check_same(const Tensor3& o) const {
    if (dims_ != o.dims_) throw config_error("Tensor3: dimension mismatch");
  }
  std::array<int, 3> dims_;
  std::vector<double> data_;
};

/// Mode-n unfolding (mode in 1..3). Element (i1,i2,i3) of the tensor maps to
/// row i_mode and column j where the remaining indices are ordered with the
/// lower mode fastest:
///   mode 1: j = i2 + d2*i3,  mode 2: j = i1 + d1*i3,  mode 3: j = i1 + d1*i2.
Mat unfold(const Tensor3& t, int mode);

/// Inverse of unfold for the given target dims.
Tensor3 fold(const Mat& m, int mode, const std::array<int, 3>& dims);

/// t x_mode a. Requires a.cols() == d_mode; the result replaces d_mode by
/// a.rows().
Tensor3 mode_product(const Tensor3& t, const Mat& a, int mode);

struct ThinSvd {
  Mat u;
  Eigen::VectorXd s;  // non-increasing
  Mat v;
};

/// Thin SVD m = u * diag(s) * v^T with a deterministic sign convention:
/// in each column of u the entry of largest magnitude (first on ties) is
/// made nonnegative, v flipped to match.
ThinSvd thin_svd(const Mat& m);

struct HosvdFactors {
  Tensor3 core;
  std::array<Mat, 3> q;  // orthonormal columns, q[n] = left factors of mode n+1
};

/// Higher-order SVD: q[n] = left singular vectors of the mode-(n+1)
/// unfolding (thin), core = t x1 q1^T x2 q2^T x3 q3^T. Exact reconstruction
/// at full thin rank.
HosvdFactors hosvd(const Tensor3& t);

}  // namespace nlctf
