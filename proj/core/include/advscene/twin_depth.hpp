#pragma once

// Twin-depth geometry: an instance depth is modelled as the sum of a scene depth and an
// object depth, each Laplace distributed. Means add; scales combine root-sum-square.

namespace advscene::twin {

struct LaplaceDepth {
  double depth = 0.0;        // meters
  double uncertainty = 1.0;  // meters, > 0

  // Throws InvalidArgument when uncertainty <= 0 or depth is not finite.
  void validate() const;
};

LaplaceDepth fuse(const LaplaceDepth& object, const LaplaceDepth& scene);

// Object-depth supervision target: instance minus scene.
double split_depth_targets(double instance_gt, double scene_gt);

struct ValueGrad {
  double value = 0.0;
  double grad = 0.0;
};

// 0.5 e^2 for |e| < 1, |e| - 0.5 otherwise.
ValueGrad smooth_l1(double e);

struct InstanceDepthLoss {
  double value = 0.0;
  double d_depth = 0.0;
  double d_uncertainty = 0.0;
};

// sqrt(2)/u * |d - gt| + log(u). The d-gradient at d == gt is 0 (sign(0) = 0).
InstanceDepthLoss instance_depth_loss(const LaplaceDepth& prediction, double ground_truth);

struct LossBreakdown {
  double heatmap = 0.0;      // L_H
  double offset_2d = 0.0;    // L_O2d
  double size_2d = 0.0;      // L_S2d
  double size_3d = 0.0;      // L_S3d
  double heading = 0.0;      // L_Theta
  double offset_3d = 0.0;    // L_O3d
  double depth_ins = 0.0;    // L_Dins, may be negative
};

// Every term is weighted 1.0.
inline constexpr double kLossTermWeight = 1.0;

double total_loss(const LossBreakdown& parts);

}  // namespace advscene::twin
