#include "nlctf/tensor.hpp"

#include <Eigen/SVD>

namespace nlctf {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) throw config_error("mode must be 1, 2 or 3");
}

}  // namespace

Mat unfold(const Tensor3& t, int mode) {
  check_mode(mode);
  const int d1 = t.d1(), d2 = t.d2(), d3 = t.d3();
  switch (mode) {
    case 1: {
      // layout is already (i1, i2 + d2*i3)-major: a straight reshape
      return Eigen::Map<const Mat>(t.data(), d1, static_cast<Eigen::Index>(d2) * d3);
    }
    case 2: {
      Mat m(d2, static_cast<Eigen::Index>(d1) * d3);
      for (int i3 = 0; i3 < d3; ++i3) {
        // slice i3 is d1 x d2 column-major; transpose it into columns i1 + d1*i3
        Eigen::Map<const Mat> sl(t.slice(i3), d1, d2);
        m.middleCols(static_cast<Eigen::Index>(d1) * i3, d1) = sl.transpose();
      }
      return m;
    }
    default: {
      Mat m(d3, static_cast<Eigen::Index>(d1) * d2);
      Eigen::Map<const Mat> flat(t.data(), static_cast<Eigen::Index>(d1) * d2, d3);
      m = flat.transpose();
      return m;
    }
  }
}

Tensor3 fold(const Mat& m, int mode, const std::array<int, 3>& dims) {
  check_mode(mode);
  const int d1 = dims[0], d2 = dims[1], d3 = dims[2];
  const Eigen::Index other = static_cast<Eigen::Index>(d1) * d2 * d3 / dims[mode - 1];
  if (m.rows() != dims[mode - 1] || m.cols() != other)
    throw config_error("fold: matrix shape does not match target dims");
  Tensor3 t(d1, d2, d3);
  switch (mode) {
    case 1: {
      Eigen::Map<Mat>(t.data(), d1, static_cast<Eigen::Index>(d2) * d3) = m;
      break;
    }
    case 2: {
      for (int i3 = 0; i3 < d3; ++i3) {
        Eigen::Map<Mat> sl(t.slice(i3), d1, d2);
        sl = m.middleCols(static_cast<Eigen::Index>(d1) * i3, d1).transpose();
      }
      break;
    }
    default: {
      Eigen::Map<Mat> flat(t.data(), static_cast<Eigen::Index>(d1) * d2, d3);
      flat = m.transpose();
      break;
    }
  }
  return t;
}

Tensor3 mode_product(const Tensor3& t, const Mat& a, int mode) {
  check_mode(mode);
  if (a.cols() != t.dims()[mode - 1])
    throw config_error("mode_product: a.cols() must equal the mode dimension");
  std::array<int, 3> nd = t.dims();
  nd[mode - 1] = static_cast<int>(a.rows());
  return fold(a * unfold(t, mode), mode, nd);
}

ThinSvd thin_svd(const Mat& m) {
  if (!m.allFinite()) throw numeric_error("thin_svd: input has non-finite entries");
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  // sign convention: largest-magnitude entry of each u column nonnegative
  for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
    Eigen::Index imax = 0;
    double amax = -1.0;
    for (Eigen::Index i = 0; i < out.u.rows(); ++i) {
      const double a = std::abs(out.u(i, j));
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    if (out.u(imax, j) < 0.0) {
      out.u.col(j) = -out.u.col(j);
      out.v.col(j) = -out.v.col(j);
    }
  }
  return out;
}

HosvdFactors hosvd(const Tensor3& t) {
  if (!t.all_finite()) throw numeric_error("hosvd: input has non-finite entries");
  HosvdFactors f;
  for (int n = 1; n <= 3; ++n) f.q[n - 1] = thin_svd(unfold(t, n)).u;
  f.core = t;
  for (int n = 1; n <= 3; ++n)
    f.core = mode_product(f.core, f.q[n - 1].transpose(), n);
  return f;
}

}  // namespace nlctf
