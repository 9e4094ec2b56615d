#pragma once

// KITTI-style 3D detection scoring: rotated 3D IoU, difficulty tiers, greedy score-ordered
// matching and average precision over 40 recall positions.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advscene/kitti_io.hpp"

namespace advscene::eval {

struct Point2 {
  double x = 0, y = 0;
};
using Polygon = std::vector<Point2>;

struct Box3D {
  double x = 0, y = 0, z = 0;  // camera frame; y is the bottom face
  double h = 0, w = 0, l = 0;
  double rotation_y = 0;

  static Box3D from_label(const kitti::ObjectLabel3D& label);
};

// Footprint on the (x, z) ground plane, counter-clockwise with x as the first axis.
std::array<Point2, 4> bev_polygon(const Box3D& box);

double polygon_area(std::span<const Point2> polygon);  // signed, CCW positive
// Clips `subject` by each edge of `clip` (both convex, CCW).
Polygon clip_convex(std::span<const Point2> subject, std::span<const Point2> clip);
double convex_intersection_area(std::span<const Point2> p, std::span<const Point2> q);

double iou_3d(const Box3D& a, const Box3D& b);

enum class Difficulty { Easy = 0, Moderate = 1, Hard = 2 };
inline constexpr std::array<Difficulty, 3> kDifficulties = {Difficulty::Easy, Difficulty::Moderate,
                                                            Difficulty::Hard};
const char* difficulty_name(Difficulty d);

struct DifficultyLimits {
  double min_height;     // px
  int max_occlusion;
  double max_truncation;
};
inline constexpr std::array<DifficultyLimits, 3> kDifficultyLimits = {{
    {40.0, 0, 0.15},
    {25.0, 1, 0.30},
    {25.0, 2, 0.50},
}};

// Tiers whose limits the label satisfies; empty means ignored everywhere.
struct DifficultySet {
  std::array<bool, 3> in{};
  bool contains(Difficulty d) const { return in[static_cast<int>(d)]; }
  bool ignored() const { return !in[0] && !in[1] && !in[2]; }
};
DifficultySet assign_difficulty(const kitti::ObjectLabel3D& label);

inline constexpr int kRecallPositions = 40;

struct EvalConfig {
  std::string class_name = "Car";
  double iou_threshold = 0.7;
  // A prediction covering a DontCare box by at least this fraction of its own 2D area is
  // neither TP nor FP.
  double dont_care_overlap = 0.5;

  void validate() const;
};

struct PrSample {
  double score_threshold = 0;
  double recall = 0;
  double precision = 0;
};

struct DifficultyResult {
  Difficulty difficulty = Difficulty::Easy;
  std::size_t num_gt = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  double ap = 0;                                     // percent
  std::array<double, kRecallPositions> precision{};  // interpolated, at r = k/40
  std::vector<PrSample> samples;                     // one per TP score threshold
};

struct EvalReport {
  EvalConfig config;
  std::size_t num_frames = 0;
  std::array<DifficultyResult, 3> results;

  const DifficultyResult& at(Difficulty d) const { return results[static_cast<int>(d)]; }
};

struct Frame {
  std::string id;
  std::vector<kitti::ObjectLabel3D> labels;
};

// `gt` and `pred` must cover the same frame ids (any order). Throws InvalidArgument
// listing the unmatched ids otherwise.
EvalReport evaluate(std::span<const Frame> gt, std::span<const Frame> pred, const EvalConfig& config);

// Loads every NNNNNN.txt in the two directories.
std::vector<Frame> load_label_dir(const std::string& dir);

std::string format_table(const EvalReport& report);
std::string format_keyvalue(const EvalReport& report);

}  // namespace advscene::eval
