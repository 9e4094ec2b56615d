#include "advscene/twin_depth.hpp"

#include <cmath>
#include <numbers>

#include "advscene/error.hpp"

namespace advscene::twin {

void LaplaceDepth::validate() const {
  if (!std::isfinite(depth)) throw InvalidArgument("Laplace depth must be finite");
  if (!(uncertainty > 0.0) || !std::isfinite(uncertainty)) {
    throw InvalidArgument("Laplace uncertainty must be a finite value > 0");
  }
}

LaplaceDepth fuse(const LaplaceDepth& object, const LaplaceDepth& scene) {
  return {object.depth + scene.depth, std::hypot(object.uncertainty, scene.uncertainty)};
}

double split_depth_targets(double instance_gt, double scene_gt) { return instance_gt - scene_gt; }

ValueGrad smooth_l1(double e) {
  const double a = std::abs(e);
  if (a < 1.0) return {0.5 * e * e, e};
  return {a - 0.5, e > 0 ? 1.0 : -1.0};
}

InstanceDepthLoss instance_depth_loss(const LaplaceDepth& prediction, double ground_truth) {
  prediction.validate();
  const double u = prediction.uncertainty;
  const double diff = prediction.depth - ground_truth;
  const double err = std::abs(diff);
  const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
  InstanceDepthLoss out;
  out.value = std::numbers::sqrt2 / u * err + std::log(u);
  out.d_depth = std::numbers::sqrt2 / u * sign;
  out.d_uncertainty = -std::numbers::sqrt2 / (u * u) * err + 1.0 / u;
  return out;
}

double total_loss(const LossBreakdown& p) {
  const double terms[] = {p.heatmap, p.offset_2d, p.size_2d, p.size_3d,
                          p.heading, p.offset_3d, p.depth_ins};
  double sum = 0.0;
  for (double t : terms) {
    if (!std::isfinite(t)) throw InvalidArgument("loss component is not finite");
    sum += kLossTermWeight * t;
  }
  return sum;
}

}  // namespace advscene::twin
