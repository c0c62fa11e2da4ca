#include "nlctf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nlctf {

namespace {

void check_shapes(const Tensor3& x, const Tensor3& ref) {
  if (!x.same_dims(ref)) throw config_error("metrics: shape mismatch");
}

double channel_max(const Tensor3& t, int s) {
  const double* p = t.slice(s);
  const std::size_t n = static_cast<std::size_t>(t.d1()) * t.d2();
  double m = p[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, p[i]);
  return m;
}

double channel_min(const Tensor3& t, int s) {
  const double* p = t.slice(s);
  const std::size_t n = static_cast<std::size_t>(t.d1()) * t.d2();
  double m = p[0];
  for (std::size_t i = 1; i < n; ++i) m = std::min(m, p[i]);
  return m;
}

}  // namespace

double MetricReport::mean_rmse() const {
  return std::accumulate(rmse.begin(), rmse.end(), 0.0) / rmse.size();
}

double MetricReport::mean_psnr() const {
  double acc = 0;
  int n = 0;
  for (double v : psnr)
    if (std::isfinite(v)) {
      acc += v;
      ++n;
    }
  return n > 0 ? acc / n : std::numeric_limits<double>::infinity();
}

double MetricReport::mean_ssim() const {
  return std::accumulate(ssim.begin(), ssim.end(), 0.0) / ssim.size();
}

std::vector<double> rmse(const Tensor3& x, const Tensor3& ref) {
  check_shapes(x, ref);
  const std::size_t n = static_cast<std::size_t>(x.d1()) * x.d2();
  std::vector<double> out(x.d3());
  for (int s = 0; s < x.d3(); ++s) {
    const double *a = x.slice(s), *b = ref.slice(s);
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    out[s] = std::sqrt(acc / n);
  }
  return out;
}

std::vector<double> psnr(const Tensor3& x, const Tensor3& ref) {
  std::vector<double> e = rmse(x, ref);
  std::vector<double> out(e.size());
  for (int s = 0; s < x.d3(); ++s) {
    const double peak = channel_max(ref, s);
    if (peak == 0.0 && channel_min(ref, s) == 0.0)
      throw config_error("psnr: reference channel is all zero");
    out[s] = e[s] == 0.0 ? std::numeric_limits<double>::infinity()
                         : 20.0 * std::log10(peak / e[s]);
  }
  return out;
}

namespace {

// 11-tap Gaussian, sigma 1.5, normalized
std::array<double, 11> gaussian11() {
  std::array<double, 11> k{};
  double sum = 0;
  for (int i = 0; i < 11; ++i) {
    const double d = i - 5;
    k[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// separable valid-mode filter of a col-major rows x cols image
std::vector<double> filter_valid(const std::vector<double>& img, int rows,
                                 int cols, const std::array<double, 11>& k) {
  const int orows = rows - 10, ocols = cols - 10;
  std::vector<double> tmp(static_cast<std::size_t>(orows) * cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < orows; ++r) {
      double acc = 0;
      for (int i = 0; i < 11; ++i)
        acc += k[i] * img[r + i + static_cast<std::size_t>(rows) * c];
      tmp[r + static_cast<std::size_t>(orows) * c] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(orows) * ocols);
  for (int c = 0; c < ocols; ++c)
    for (int r = 0; r < orows; ++r) {
      double acc = 0;
      for (int i = 0; i < 11; ++i)
        acc += k[i] * tmp[r + static_cast<std::size_t>(orows) * (c + i)];
      out[r + static_cast<std::size_t>(orows) * c] = acc;
    }
  return out;
}

}  // namespace

std::vector<double> ssim(const Tensor3& x, const Tensor3& ref) {
  check_shapes(x, ref);
  const int rows = x.d1(), cols = x.d2();
  if (rows < 11 || cols < 11)
    throw config_error("ssim: image smaller than the 11x11 window");
  const auto kern = gaussian11();
  constexpr double kL = 255.0;
  constexpr double c1 = (0.01 * kL) * (0.01 * kL);
  constexpr double c2 = (0.03 * kL) * (0.03 * kL);
  const std::size_t n = static_cast<std::size_t>(rows) * cols;

  std::vector<double> out(x.d3());
  for (int s = 0; s < x.d3(); ++s) {
    // rescale both by the reference range so ref spans [0, 255]
    const double lo = channel_min(ref, s), hi = channel_max(ref, s);
    const double gain = hi > lo ? kL / (hi - lo) : 1.0;
    std::vector<double> a(n), b(n);
    const double *px = x.slice(s), *pr = ref.slice(s);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = (px[i] - lo) * gain;
      b[i] = (pr[i] - lo) * gain;
    }
    std::vector<double> a2(n), b2(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
      a2[i] = a[i] * a[i];
      b2[i] = b[i] * b[i];
      ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, rows, cols, kern);
    const auto mu_b = filter_valid(b, rows, cols, kern);
    const auto m_a2 = filter_valid(a2, rows, cols, kern);
    const auto m_b2 = filter_valid(b2, rows, cols, kern);
    const auto m_ab = filter_valid(ab, rows, cols, kern);
    double acc = 0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double va = m_a2[i] - mu_a[i] * mu_a[i];
      const double vb = m_b2[i] - mu_b[i] * mu_b[i];
      const double cov = m_ab[i] - mu_a[i] * mu_b[i];
      acc += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
             ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    out[s] = acc / mu_a.size();
  }
  return out;
}

MetricReport evaluate(const Tensor3& x, const Tensor3& ref) {
  MetricReport r;
  r.rmse = rmse(x, ref);
  r.psnr = psnr(x, ref);
  r.ssim = ssim(x, ref);
  return r;
}

double BasisSet::condition_number() const {
  if (materials.empty()) return 0;
  Mat a(materials[0].mu.size(), materials.size());
  for (std::size_t m = 0; m < materials.size(); ++m)
    for (std::size_t s = 0; s < materials[m].mu.size(); ++s)
      a(s, m) = materials[m].mu[s];
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sv = svd.singularValues();
  return sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1]
                               : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd nnls(const Mat& a, const Eigen::VectorXd& b) {
  // Lawson-Hanson active set; exact for the small systems used here
  const int m = static_cast<int>(a.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  std::vector<bool> passive(m, false);
  Eigen::VectorXd w = a.transpose() * (b - a * x);
  constexpr double kTol = 1e-12;
  for (int outer = 0; outer < 3 * m + 30; ++outer) {
    int t = -1;
    double wmax = kTol;
    for (int j = 0; j < m; ++j)
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        t = j;
      }
    if (t < 0) break;
    passive[t] = true;
    for (int inner = 0; inner < 3 * m + 30; ++inner) {
      std::vector<int> pidx;
      for (int j = 0; j < m; ++j)
        if (passive[j]) pidx.push_back(j);
      Mat ap(a.rows(), pidx.size());
      for (std::size_t k = 0; k < pidx.size(); ++k) ap.col(k) = a.col(pidx[k]);
      Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
      bool feasible = true;
      for (Eigen::Index k = 0; k < zp.size(); ++k)
        if (zp[k] <= kTol) feasible = false;
      if (feasible) {
        x.setZero();
        for (std::size_t k = 0; k < pidx.size(); ++k) x[pidx[k]] = zp[k];
        break;
      }
      // step back to the feasibility boundary and drop the blocking variable
      double alpha = 1.0;
      for (std::size_t k = 0; k < pidx.size(); ++k)
        if (zp[k] <= kTol) {
          const double xk = x[pidx[k]];
          if (xk - zp[k] > 0) alpha = std::min(alpha, xk / (xk - zp[k]));
        }
      for (std::size_t k = 0; k < pidx.size(); ++k) {
        x[pidx[k]] += alpha * (zp[k] - x[pidx[k]]);
        if (x[pidx[k]] <= kTol) {
          x[pidx[k]] = 0;
          passive[pidx[k]] = false;
        }
      }
    }
    w = a.transpose() * (b - a * x);
  }
  return x;
}

DecomposeResult decompose(const Tensor3& volume, const BasisSet& basis,
                          bool* ill_conditioned) {
  const int n_mat = static_cast<int>(basis.materials.size());
  if (n_mat == 0) throw config_error("decompose: empty basis");
  if (volume.d3() < n_mat)
    throw config_error("decompose: need at least as many bins as materials");
  for (const auto& m : basis.materials)
    if (static_cast<int>(m.mu.size()) != volume.d3())
      throw config_error("decompose: basis signature length mismatch");
  const bool bad = basis.condition_number() > 1e8;
  if (ill_conditioned) *ill_conditioned = bad;

  Mat a(volume.d3(), n_mat);
  for (int m = 0; m < n_mat; ++m)
    for (int s = 0; s < volume.d3(); ++s) a(s, m) = basis.materials[m].mu[s];

  DecomposeResult res;
  res.n_rows = volume.d1();
  res.n_cols = volume.d2();
  const std::size_t npix = static_cast<std::size_t>(volume.d1()) * volume.d2();
  res.fractions.assign(n_mat, std::vector<double>(npix, 0.0));
  res.residual.assign(npix, 0.0);
  Eigen::VectorXd b(volume.d3());
  for (std::size_t i = 0; i < npix; ++i) {
    for (int s = 0; s < volume.d3(); ++s) b[s] = volume.data()[i + npix * s];
    const Eigen::VectorXd f = nnls(a, b);
    for (int m = 0; m < n_mat; ++m) res.fractions[m][i] = f[m];
    res.residual[i] = (a * f - b).norm();
  }
  return res;
}

}  // namespace nlctf
