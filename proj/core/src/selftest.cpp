#include "advscene/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "advscene/attention.hpp"
#include "advscene/rng.hpp"
#include "advscene/twin_depth.hpp"

namespace advscene {
namespace {

using attn::Matrix;

std::string fmt(const char* pattern, double value) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), pattern, value);
  return buf;
}

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, 1.0);
  }
  return m;
}

SelfTestResult fuse_matches_rss(Rng& rng) {
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const twin::LaplaceDepth a{rng.uniform(-50, 50), rng.uniform(1e-3, 10)};
    const twin::LaplaceDepth b{rng.uniform(-50, 50), rng.uniform(1e-3, 10)};
    const auto f = twin::fuse(a, b);
    const double rss = std::sqrt(a.uncertainty * a.uncertainty + b.uncertainty * b.uncertainty);
    worst = std::max({worst, std::abs(f.uncertainty - rss), std::abs(f.depth - (a.depth + b.depth))});
  }
  return {"twin.fuse_root_sum_square", worst <= 1e-12, fmt("max abs error %.3g", worst)};
}

SelfTestResult fuse_commutative_monotone(Rng& rng) {
  bool ok = true;
  for (int i = 0; i < 1000 && ok; ++i) {
    const twin::LaplaceDepth a{rng.uniform(-50, 50), rng.uniform(1e-3, 10)};
    const twin::LaplaceDepth b{rng.uniform(-50, 50), rng.uniform(1e-3, 10)};
    const auto ab = twin::fuse(a, b), ba = twin::fuse(b, a);
    ok = ab.depth == ba.depth && ab.uncertainty == ba.uncertainty &&
         ab.uncertainty >= std::max(a.uncertainty, b.uncertainty);
  }
  return {"twin.fuse_commutative_and_never_less_certain", ok, ""};
}

SelfTestResult loss_gradients(Rng& rng) {
  constexpr double h = 1e-6;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double gt = rng.uniform(1, 60);
    double d = gt + rng.uniform(-5, 5);
    if (std::abs(d - gt) < 1e-3) d = gt + 1e-2;
    const double u = rng.uniform(0.2, 5);
    const auto at = [&](double dd, double uu) { return twin::instance_depth_loss({dd, uu}, gt).value; };
    const auto g = twin::instance_depth_loss({d, u}, gt);
    const double fd_d = (at(d + h, u) - at(d - h, u)) / (2 * h);
    const double fd_u = (at(d, u + h) - at(d, u - h)) / (2 * h);
    const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    worst = std::max({worst, rel(g.d_depth, fd_d), rel(g.d_uncertainty, fd_u)});
  }
  return {"twin.instance_depth_loss_gradients", worst < 1e-5, fmt("max relative error %.3g", worst)};
}

SelfTestResult smooth_l1_continuity() {
  const auto below = twin::smooth_l1(std::nextafter(1.0, 0.0));
  const auto at = twin::smooth_l1(1.0);
  const bool ok = std::abs(below.value - at.value) < 1e-12 && std::abs(below.grad - at.grad) < 1e-12 &&
                  twin::smooth_l1(0.0).value == 0.0;
  return {"twin.smooth_l1_continuous_at_seam", ok, ""};
}

SelfTestResult uncertainty_minimizer(Rng& rng) {
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const double e = rng.uniform(0.1, 10);
    const auto loss = [&](double u) { return twin::instance_depth_loss({e, u}, 0.0).value; };
    double lo = 1e-3, hi = 100;
    const double ratio = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 200; ++it) {
      const double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
      if (loss(a) < loss(b)) {
        hi = b;
      } else {
        lo = a;
      }
    }
    worst = std::max(worst, std::abs(0.5 * (lo + hi) - std::numbers::sqrt2 * e));
  }
  return {"twin.loss_minimized_at_sqrt2_error", worst < 1e-6, fmt("max deviation %.3g", worst)};
}

SelfTestResult softmax_rows_sum(Rng& rng) {
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform(0, 20));
    const int d = 1 + static_cast<int>(rng.uniform(0, 8));
    const Matrix w = attn::attention_weights(random_matrix(rng, n, d), random_matrix(rng, n, d),
                                             random_matrix(rng, n, n));
    for (int r = 0; r < n; ++r) worst = std::max(worst, std::abs(w.row(r).sum() - 1.0));
  }
  return {"attention.softmax_rows_sum_to_one", worst <= 1e-6, fmt("max deviation %.3g", worst)};
}

SelfTestResult partition_roundtrip(Rng& rng) {
  bool ok = true;
  for (int i = 0; i < 50 && ok; ++i) {
    const int m = 1 + static_cast<int>(rng.uniform(0, 4));
    const int h = m * (1 + static_cast<int>(rng.uniform(0, 4)));
    const int w = m * (1 + static_cast<int>(rng.uniform(0, 4)));
    const int s = static_cast<int>(rng.uniform(0, m));
    attn::FeatureMap map(h, w, random_matrix(rng, h * w, 3));
    const auto windows = attn::window_partition(map, {m, s});
    ok = attn::window_reverse(windows, {m, s}, h, w).tokens() == map.tokens();
  }
  return {"attention.window_reverse_inverts_partition", ok, ""};
}

SelfTestResult zero_block_identity(Rng& rng) {
  const int c = 8;
  auto params = attn::random_block_pair_params(c, 2, 2, rng.next());
  for (auto* b : {&params.regular, &params.shifted}) {
    b->attention.wq.setZero();
    b->attention.wk.setZero();
    b->attention.wv.setZero();
    b->attention.wo.setZero();
    b->mlp.w1.setZero();
    b->mlp.w2.setZero();
  }
  const attn::FeatureMap map(4, 4, random_matrix(rng, 16, c));
  const bool ok = attn::swin_block_pair(map, params, 2).tokens() == map.tokens();
  return {"attention.zero_weight_block_pair_is_identity", ok, ""};
}

SelfTestResult convex_outputs(Rng& rng) {
  bool ok = true;
  for (int i = 0; i < 50 && ok; ++i) {
    const int n = 2 + static_cast<int>(rng.uniform(0, 10));
    const Matrix q = random_matrix(rng, n, 4), k = random_matrix(rng, n, 4), v = random_matrix(rng, n, 4);
    const attn::HeadInputs head{q, k, v};
    const double weight = 1.0;
    const Matrix out = attn::attention(std::span(&head, 1), {}, std::span(&weight, 1));
    for (int c = 0; c < 4; ++c) {
      const double lo = v.col(c).minCoeff() - 1e-12, hi = v.col(c).maxCoeff() + 1e-12;
      ok = ok && out.col(c).minCoeff() >= lo && out.col(c).maxCoeff() <= hi;
    }
  }
  return {"attention.outputs_are_convex_combinations", ok, ""};
}

SelfTestResult layer_norm_moments(Rng& rng) {
  const int c = 16;
  const Matrix x = random_matrix(rng, 32, c) * 3.0;
  const Matrix y = attn::layer_norm(x, {attn::Vector::Ones(c), attn::Vector::Zero(c)});
  double worst = 0;
  for (int r = 0; r < y.rows(); ++r) {
    const double mean = y.row(r).mean();
    const double var = (y.row(r).array() - mean).square().mean();
    worst = std::max({worst, std::abs(mean), std::abs(var - 1.0)});
  }
  return {"attention.layer_norm_zero_mean_unit_variance", worst <= 1e-6, fmt("max deviation %.3g", worst)};
}

}  // namespace

std::vector<SelfTestResult> run_kernel_selftests(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SelfTestResult> results;
  results.push_back(fuse_matches_rss(rng));
  results.push_back(fuse_commutative_monotone(rng));
  results.push_back(loss_gradients(rng));
  results.push_back(smooth_l1_continuity());
  results.push_back(uncertainty_minimizer(rng));
  results.push_back(softmax_rows_sum(rng));
  results.push_back(partition_roundtrip(rng));
  results.push_back(zero_block_identity(rng));
  results.push_back(convex_outputs(rng));
  results.push_back(layer_norm_moments(rng));
  return results;
}

}  // namespace advscene
