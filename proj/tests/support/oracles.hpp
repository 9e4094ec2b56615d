#pragma once

// Reference computations that share no code with the library kernels.

#include <algorithm>
#include <cmath>
#include <limits>

#include <vector>

#include "advscene/attention.hpp"
#include "advscene/eval3d.hpp"
#include "advscene/twin_depth.hpp"

namespace advscene::testing {

// Rotated footprint as two slabs: |(p - c) . axis| <= half-extent, with the length axis
// (cos ry, -sin ry) and the width axis (sin ry, cos ry) in the (x, z) plane.
struct Footprint {
  double cx, cz, half_l, half_w, c, s;

  explicit Footprint(const eval::Box3D& b)
      : cx(b.x), cz(b.z), half_l(b.l / 2), half_w(b.w / 2), c(std::cos(b.rotation_y)), s(std::sin(b.rotation_y)) {}

  // x-interval of the horizontal line z = z0 inside the footprint; empty when lo > hi.
  void row_interval(double z0, double& lo, double& hi) const {
    lo = -std::numeric_limits<double>::infinity();
    hi = std::numeric_limits<double>::infinity();
    clip_slab(c, -s * (z0 - cz), half_l, lo, hi);
    clip_slab(s, c * (z0 - cz), half_w, lo, hi);
  }

  double min_x() const { return cx - std::abs(c) * half_l - std::abs(s) * half_w; }
  double max_x() const { return cx + std::abs(c) * half_l + std::abs(s) * half_w; }
  double min_z() const { return cz - std::abs(s) * half_l - std::abs(c) * half_w; }
  double max_z() const { return cz + std::abs(s) * half_l + std::abs(c) * half_w; }

 private:
  // |a (x - cx) + k| <= half
  void clip_slab(double a, double k, double half, double& lo, double& hi) const {
    if (std::abs(a) < 1e-15) {
      if (std::abs(k) > half) hi = -std::numeric_limits<double>::infinity();
      return;
    }
    double x1 = cx + (-half - k) / a, x2 = cx + (half - k) / a;
    if (x1 > x2) std::swap(x1, x2);
    lo = std::max(lo, x1);
    hi = std::min(hi, x2);
  }
};

// BEV intersection area by point-sampling pixel centres of an n x n grid over the joint
// bounding box. Each row's covered columns are counted from the exact row intervals.
inline double raster_bev_intersection(const eval::Box3D& a, const eval::Box3D& b, int n = 2000) {
  const Footprint fa(a), fb(b);
  const double x0 = std::min(fa.min_x(), fb.min_x()), x1 = std::max(fa.max_x(), fb.max_x());
  const double z0 = std::min(fa.min_z(), fb.min_z()), z1 = std::max(fa.max_z(), fb.max_z());
  const double dx = (x1 - x0) / n, dz = (z1 - z0) / n;
  long long count = 0;
  for (int r = 0; r < n; ++r) {
    const double z = z0 + (r + 0.5) * dz;
    double alo, ahi, blo, bhi;
    fa.row_interval(z, alo, ahi);
    fb.row_interval(z, blo, bhi);
    const double lo = std::max(alo, blo), hi = std::min(ahi, bhi);
    if (lo > hi) continue;
    // Columns j with x0 + (j + 0.5) dx in [lo, hi].
    const long long first = std::max(0LL, static_cast<long long>(std::ceil((lo - x0) / dx - 0.5)));
    const long long last = std::min<long long>(n - 1, static_cast<long long>(std::floor((hi - x0) / dx - 0.5)));
    if (last >= first) count += last - first + 1;
  }
  return static_cast<double>(count) * dx * dz;
}

inline double raster_iou_3d(const eval::Box3D& a, const eval::Box3D& b, int n = 2000) {
  const double overlap_h = std::min(a.y, b.y) - std::max(a.y - a.h, b.y - b.h);
  if (overlap_h <= 0) return 0.0;
  const double inter = raster_bev_intersection(a, b, n) * overlap_h;
  const double va = a.h * a.w * a.l, vb = b.h * b.w * b.l;
  return inter / (va + vb - inter);
}

// Scalar-loop attention for one head: softmax(q k^T / sqrt(d) + bias) v.
inline attn::Matrix naive_head(const attn::Matrix& q, const attn::Matrix& k, const attn::Matrix& v,
                               const attn::Matrix* bias) {
  const auto n_q = q.rows(), n_k = k.rows(), d = q.cols();
  attn::Matrix out = attn::Matrix::Zero(n_q, v.cols());
  for (Eigen::Index i = 0; i < n_q; ++i) {
    std::vector<double> logits(n_k);
    for (Eigen::Index j = 0; j < n_k; ++j) {
      double dot = 0.0;
      for (Eigen::Index t = 0; t < d; ++t) dot += q(i, t) * k(j, t);
      logits[j] = dot / std::sqrt(static_cast<double>(d)) + (bias ? (*bias)(i, j) : 0.0);
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& l : logits) z += (l = std::exp(l - mx));
    for (Eigen::Index j = 0; j < n_k; ++j)
      for (Eigen::Index t = 0; t < v.cols(); ++t) out(i, t) += logits[j] / z * v(j, t);
  }
  return out;
}

// Dense multi-head attention of `x_q` over `x_kv` with the library's head layout:
// head i owns projected columns [i*d, (i+1)*d), outputs are weighted, concatenated, then * Wo.
inline attn::Matrix naive_multi_head(const attn::Matrix& x_q, const attn::Matrix& x_kv,
                                     const attn::AttentionParams& p, const std::vector<attn::Matrix>* bias) {
  const attn::Matrix q = x_q * p.wq, k = x_kv * p.wk, v = x_kv * p.wv;
  const int d = p.head_dim();
  attn::Matrix concat(x_q.rows(), p.heads * d);
  for (int h = 0; h < p.heads; ++h) {
    concat.middleCols(h * d, d) =
        p.head_weights(h) * naive_head(q.middleCols(h * d, d), k.middleCols(h * d, d), v.middleCols(h * d, d),
                                       bias ? &(*bias)[h] : nullptr);
  }
  return concat * p.wo;
}

// Bias for an M x M window straight from the table: offset (query - key) in (row, col).
inline std::vector<attn::Matrix> naive_bias(const attn::AttentionParams& p, int m) {
  std::vector<attn::Matrix> out;
  for (int h = 0; h < p.heads; ++h) {
    attn::Matrix b(m * m, m * m);
    for (int qr = 0; qr < m; ++qr)
      for (int qc = 0; qc < m; ++qc)
        for (int kr = 0; kr < m; ++kr)
          for (int kc = 0; kc < m; ++kc)
            b(qr * m + qc, kr * m + kc) = p.rel_bias((qr - kr + m - 1) * (2 * m - 1) + (qc - kc + m - 1), h);
    out.push_back(b);
  }
  return out;
}

// Golden-section search for the u minimizing the loss at fixed error e.
inline double golden_minimizer(double e, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double u) { return twin::instance_depth_loss({e, u}, 0.0).value; };
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace advscene::testing
