#include "advscene/eval3d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "advscene/error.hpp"
#include "advscene/keyvalue.hpp"

namespace advscene::eval {
namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Intersection of segment (p, q) with the infinite line through (a, b).
Point2 line_intersection(const Point2& p, const Point2& q, const Point2& a, const Point2& b) {
  const double sp = cross(a, b, p);
  const double sq = cross(a, b, q);
  const double t = sp / (sp - sq);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

double overlap_fraction_of(const kitti::BBox2D& box, const kitti::BBox2D& region) {
  const double iw = std::min(box.right, region.right) - std::max(box.left, region.left);
  const double ih = std::min(box.bottom, region.bottom) - std::max(box.top, region.top);
  const double area = box.area();
  if (iw <= 0 || ih <= 0 || area <= 0) return 0.0;
  return iw * ih / area;
}

enum class Outcome { TruePositive, FalsePositive, Ignored };

struct Scored {
  double score;
  Outcome outcome;
};

double score_of(const kitti::ObjectLabel3D& label) { return label.score.value_or(1.0); }

// Greedy matching for one frame and one tier. Predictions are visited by descending score
// (ties by label index); each takes the unmatched in-tier GT with the highest IoU.
void match_frame(const Frame& gt, const Frame& pred, const EvalConfig& config, Difficulty tier,
                 std::vector<Scored>& out, std::size_t& num_gt) {
  struct GtEntry {
    Box3D box;
    bool counted;
    bool matched = false;
  };
  std::vector<GtEntry> targets;
  std::vector<kitti::BBox2D> dont_care;
  for (const auto& label : gt.labels) {
    if (label.is_dont_care()) {
      dont_care.push_back(label.bbox);
    } else if (label.class_name == config.class_name) {
      const bool counted = assign_difficulty(label).contains(tier);
      targets.push_back({Box3D::from_label(label), counted});
      if (counted) ++num_gt;
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    if (pred.labels[i].class_name == config.class_name) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return score_of(pred.labels[a]) > score_of(pred.labels[b]);
  });

  for (std::size_t idx : order) {
    const auto& det = pred.labels[idx];
    const Box3D box = Box3D::from_label(det);
    double best_iou = -1;
    GtEntry* best = nullptr;
    bool hits_ignored = false;
    for (auto& t : targets) {
      const double iou = iou_3d(box, t.box);
      if (iou < config.iou_threshold) continue;
      if (!t.counted) {
        hits_ignored = true;
      } else if (!t.matched && iou > best_iou) {
        best_iou = iou;
        best = &t;
      }
    }
    Outcome outcome = Outcome::FalsePositive;
    if (best) {
      best->matched = true;
      outcome = Outcome::TruePositive;
    } else if (hits_ignored) {
      outcome = Outcome::Ignored;
    } else {
      for (const auto& region : dont_care) {
        if (overlap_fraction_of(det.bbox, region) >= config.dont_care_overlap) {
          outcome = Outcome::Ignored;
          break;
        }
      }
    }
    if (outcome != Outcome::Ignored) out.push_back({score_of(det), outcome});
  }
}

DifficultyResult summarize(Difficulty tier, std::size_t num_gt, std::vector<Scored> scored) {
  DifficultyResult result;
  result.difficulty = tier;
  result.num_gt = num_gt;
  std::vector<double> tp, fp;
  for (const auto& s : scored) (s.outcome == Outcome::TruePositive ? tp : fp).push_back(s.score);
  std::sort(tp.begin(), tp.end(), std::greater<>());
  std::sort(fp.begin(), fp.end(), std::greater<>());
  result.true_positives = tp.size();
  result.false_positives = fp.size();
  if (num_gt == 0) return result;

  // Thresholds at every distinct TP score; counts are of detections scoring >= threshold.
  std::vector<std::size_t> tp_counts;
  std::size_t fp_seen = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (i + 1 < tp.size() && tp[i + 1] == tp[i]) continue;
    const double threshold = tp[i];
    while (fp_seen < fp.size() && fp[fp_seen] >= threshold) ++fp_seen;
    const std::size_t n_tp = i + 1;
    result.samples.push_back({threshold, static_cast<double>(n_tp) / static_cast<double>(num_gt),
                              static_cast<double>(n_tp) / static_cast<double>(n_tp + fp_seen)});
    tp_counts.push_back(n_tp);
  }

  // Interpolated precision: best precision among thresholds reaching recall k/40.
  double sum = 0;
  for (int k = 1; k <= kRecallPositions; ++k) {
    double best = 0;
    for (std::size_t s = 0; s < result.samples.size(); ++s) {
      if (tp_counts[s] * kRecallPositions >= static_cast<std::size_t>(k) * num_gt) {
        best = std::max(best, result.samples[s].precision);
      }
    }
    result.precision[k - 1] = best;
    sum += best;
  }
  result.ap = 100.0 * sum / kRecallPositions;
  return result;
}

}  // namespace

Box3D Box3D::from_label(const kitti::ObjectLabel3D& label) {
  return {label.x, label.y, label.z, label.h, label.w, label.l, label.rotation_y};
}

std::array<Point2, 4> bev_polygon(const Box3D& box) {
  const double c = std::cos(box.rotation_y), s = std::sin(box.rotation_y);
  const double hl = 0.5 * box.l, hw = 0.5 * box.w;
  // Object-frame corners (length along x, width along z) in CCW order.
  const Point2 local[4] = {{hl, -hw}, {hl, hw}, {-hl, hw}, {-hl, -hw}};
  std::array<Point2, 4> out;
  for (int i = 0; i < 4; ++i) {
    // Rotation about the camera y axis: x' = c x + s z, z' = -s x + c z.
    out[i] = {box.x + c * local[i].x + s * local[i].y, box.z - s * local[i].x + c * local[i].y};
  }
  return out;
}

double polygon_area(std::span<const Point2> polygon) {
  double twice = 0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

Polygon clip_convex(std::span<const Point2> subject, std::span<const Point2> clip) {
  Polygon current(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !current.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % clip.size()];
    Polygon next;
    next.reserve(current.size() + 1);
    for (std::size_t i = 0; i < current.size(); ++i) {
      const Point2& p = current[i];
      const Point2& q = current[(i + 1) % current.size()];
      const bool p_in = cross(a, b, p) >= 0;
      const bool q_in = cross(a, b, q) >= 0;
      if (p_in) next.push_back(p);
      if (p_in != q_in) next.push_back(line_intersection(p, q, a, b));
    }
    current = std::move(next);
  }
  return current;
}

double convex_intersection_area(std::span<const Point2> p, std::span<const Point2> q) {
  if (p.size() < 3 || q.size() < 3) return 0.0;
  const Polygon inter = clip_convex(p, q);
  if (inter.size() < 3) return 0.0;
  return std::max(0.0, polygon_area(inter));
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double vertical = std::min(a.y, b.y) - std::max(a.y - a.h, b.y - b.h);
  if (vertical <= 0) return 0.0;
  const auto pa = bev_polygon(a);
  const auto pb = bev_polygon(b);
  const double inter = convex_intersection_area(pa, pb) * vertical;
  const double vol_a = a.h * a.w * a.l;
  const double vol_b = b.h * b.w * b.l;
  const double uni = vol_a + vol_b - inter;
  if (!(uni > 0) || !(inter > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

const char* difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Moderate: return "moderate";
    case Difficulty::Hard: return "hard";
  }
  return "?";
}

DifficultySet assign_difficulty(const kitti::ObjectLabel3D& label) {
  DifficultySet set;
  const double height = label.bbox.height();
  for (std::size_t i = 0; i < kDifficultyLimits.size(); ++i) {
    const auto& lim = kDifficultyLimits[i];
    set.in[i] = height >= lim.min_height && label.occlusion <= lim.max_occlusion &&
                label.truncation <= lim.max_truncation;
  }
  return set;
}

void EvalConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw InvalidArgument("IoU threshold must lie in (0, 1]");
  if (!(dont_care_overlap > 0.0 && dont_care_overlap <= 1.0)) {
    throw InvalidArgument("DontCare overlap fraction must lie in (0, 1]");
  }
  if (class_name.empty()) throw InvalidArgument("class name must not be empty");
}

EvalReport evaluate(std::span<const Frame> gt, std::span<const Frame> pred, const EvalConfig& config) {
  config.validate();
  std::map<std::string, const Frame*> gt_by_id, pred_by_id;
  for (const auto& f : gt) gt_by_id[f.id] = &f;
  for (const auto& f : pred) pred_by_id[f.id] = &f;

  std::vector<std::string> missing;
  for (const auto& [id, f] : gt_by_id) {
    if (!pred_by_id.contains(id)) missing.push_back("pred:" + id);
  }
  for (const auto& [id, f] : pred_by_id) {
    if (!gt_by_id.contains(id)) missing.push_back("gt:" + id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw InvalidArgument("frame ids do not align, missing " + list);
  }

  EvalReport report;
  report.config = config;
  report.num_frames = gt_by_id.size();
  for (Difficulty tier : kDifficulties) {
    std::vector<Scored> scored;
    std::size_t num_gt = 0;
    for (const auto& [id, g] : gt_by_id) match_frame(*g, *pred_by_id.at(id), config, tier, scored, num_gt);
    report.results[static_cast<int>(tier)] = summarize(tier, num_gt, std::move(scored));
  }
  return report;
}

std::vector<Frame> load_label_dir(const std::string& dir) {
  std::vector<Frame> frames;
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir);
  for (int id : kitti::list_frames(dir, ".txt")) {
    const auto path = std::filesystem::path(dir) / (kitti::frame_name(id) + ".txt");
    Frame f;
    f.id = kitti::frame_name(id);
    try {
      f.labels = kitti::parse_labels(kitti::read_text_file(path));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::string format_table(const EvalReport& report) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%s AP3D_R40 @ IoU %.2f (%zu frames)\n",
                report.config.class_name.c_str(), report.config.iou_threshold, report.num_frames);
  out += buf;
  out += "difficulty      AP     num_gt   TP     FP\n";
  for (const auto& r : report.results) {
    std::snprintf(buf, sizeof(buf), "%-10s %8.2f %8zu %6zu %6zu\n", difficulty_name(r.difficulty),
                  r.ap, r.num_gt, r.true_positives, r.false_positives);
    out += buf;
  }
  return out;
}

std::string format_keyvalue(const EvalReport& report) {
  KeyValueFile kv;
  kv.set("class", report.config.class_name);
  kv.set("iou_threshold", report.config.iou_threshold);
  kv.set("recall_positions", static_cast<long long>(kRecallPositions));
  kv.set("frames", static_cast<long long>(report.num_frames));
  for (const auto& r : report.results) {
    const std::string prefix = difficulty_name(r.difficulty);
    kv.set(prefix + ".ap3d_r40", r.ap);
    kv.set(prefix + ".num_gt", static_cast<long long>(r.num_gt));
    kv.set(prefix + ".tp", static_cast<long long>(r.true_positives));
    kv.set(prefix + ".fp", static_cast<long long>(r.false_positives));
    std::string curve;
    for (double p : r.precision) curve += (curve.empty() ? "" : " ") + format_double(p);
    kv.set(prefix + ".precision", curve);
  }
  return kv.to_string();
}

}  // namespace advscene::eval
