#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "advscene/error.hpp"
#include "advscene/eval3d.hpp"
#include "advscene/rng.hpp"
#include "oracles.hpp"

namespace advscene::eval {
namespace {

using kitti::ObjectLabel3D;

bool same_vertex_set(std::array<Point2, 4> a, std::array<Point2, 4> b, double tol) {
  for (const auto& p : a) {
    const bool found = std::any_of(b.begin(), b.end(), [&](const Point2& q) {
      return std::abs(p.x - q.x) < tol && std::abs(p.y - q.y) < tol;
    });
    if (!found) return false;
  }
  return true;
}

Box3D unit_box(double x, double z, double ry = 0.0) { return Box3D{x, 1.0, z, 1.0, 1.0, 1.0, ry}; }

Polygon square(double x0, double y0, double side) {
  return {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}};
}

TEST(BevPolygon, AxisAlignedAndRotations) {
  const Box3D b{0, 0, 0, 1.5, 2.0, 4.0, 0.0};
  const auto p = bev_polygon(b);
  EXPECT_TRUE(same_vertex_set(p, {{{2, 1}, {-2, 1}, {-2, -1}, {2, -1}}}, 1e-12));
  EXPECT_GT(polygon_area(p), 0.0);
  EXPECT_NEAR(polygon_area(p), 8.0, 1e-12);

  auto quarter = b;
  quarter.rotation_y = std::numbers::pi / 2;
  EXPECT_TRUE(same_vertex_set(bev_polygon(quarter), {{{1, 2}, {-1, 2}, {-1, -2}, {1, -2}}}, 1e-12));

  auto half = b;
  half.rotation_y = std::numbers::pi;
  EXPECT_TRUE(same_vertex_set(bev_polygon(half), p, 1e-12));
  EXPECT_GT(polygon_area(bev_polygon(half)), 0.0);
}

TEST(Intersection, HandCases) {
  const auto a = square(0, 0, 1);
  EXPECT_NEAR(convex_intersection_area(a, a), 1.0, 1e-12);
  EXPECT_NEAR(convex_intersection_area(a, square(0.5, 0, 1)), 0.5, 1e-12);
  EXPECT_EQ(convex_intersection_area(a, square(3, 3, 1)), 0.0);
  EXPECT_NEAR(convex_intersection_area(a, square(0.25, 0.25, 0.5)), 0.25, 1e-12);
  // Touching edges have no area.
  EXPECT_NEAR(convex_intersection_area(a, square(1, 0, 1)), 0.0, 1e-12);
}

TEST(Intersection, SelfIntersectionIsArea) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Box3D b{rng.uniform(-20, 20), 1, rng.uniform(0, 60), 1.5, rng.uniform(0.3, 3), rng.uniform(0.3, 6),
                  rng.uniform(-4, 4)};
    const auto p = bev_polygon(b);
    EXPECT_NEAR(convex_intersection_area(p, p), polygon_area(p), 1e-9);
  }
}

TEST(Intersection, MatchesRasterOracle) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Box3D a{rng.uniform(-2, 2), 1, rng.uniform(-2, 2), 1, rng.uniform(0.5, 3), rng.uniform(0.5, 5), rng.uniform(-3.2, 3.2)};
    const Box3D b{rng.uniform(-2, 2), 1, rng.uniform(-2, 2), 1, rng.uniform(0.5, 3), rng.uniform(0.5, 5), rng.uniform(-3.2, 3.2)};
    const double exact = convex_intersection_area(bev_polygon(a), bev_polygon(b));
    const double raster = testing::raster_bev_intersection(a, b);
    EXPECT_NEAR(exact, raster, 5e-3) << i;
    EXPECT_NEAR(iou_3d(a, b), testing::raster_iou_3d(a, b), 1e-3) << i;
  }
}

TEST(Iou3d, HandCases) {
  EXPECT_NEAR(iou_3d(unit_box(0, 0), unit_box(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(iou_3d(unit_box(0, 0), unit_box(0.5, 0)), 1.0 / 3.0, 1e-9);
  EXPECT_EQ(iou_3d(unit_box(0, 0), unit_box(0, 2.5)), 0.0);
  // Vertically disjoint: second box sits entirely above the first.
  auto above = unit_box(0, 0);
  above.y = -0.5;
  above.h = 0.5;
  EXPECT_EQ(iou_3d(unit_box(0, 0), above), 0.0);
  // Half the height overlaps.
  auto shifted = unit_box(0, 0);
  shifted.y = 1.5;
  EXPECT_NEAR(iou_3d(unit_box(0, 0), shifted), 0.5 / 1.5, 1e-12);
  // Degenerate footprint.
  auto flat = unit_box(0, 0);
  flat.w = 0.0;
  EXPECT_EQ(iou_3d(flat, flat), 0.0);
}

TEST(Iou3d, SymmetricAndInvariant) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Box3D a{rng.uniform(-3, 3), rng.uniform(0, 2), rng.uniform(10, 14), rng.uniform(1, 2), rng.uniform(1, 2), rng.uniform(3, 5), rng.uniform(-3.2, 3.2)};
    const Box3D b{a.x + rng.uniform(-2, 2), a.y + rng.uniform(-0.5, 0.5), a.z + rng.uniform(-2, 2), rng.uniform(1, 2), rng.uniform(1, 2), rng.uniform(3, 5), rng.uniform(-3.2, 3.2)};
    const double iou = iou_3d(a, b);
    EXPECT_GE(iou, 0.0);
    EXPECT_LE(iou, 1.0);
    EXPECT_NEAR(iou, iou_3d(b, a), 1e-12);
    const double tx = rng.uniform(-30, 30), ty = rng.uniform(-2, 2), tz = rng.uniform(-10, 40);
    auto a2 = a, b2 = b;
    for (auto* box : {&a2, &b2}) {
      box->x += tx;
      box->y += ty;
      box->z += tz;
    }
    EXPECT_NEAR(iou, iou_3d(a2, b2), 1e-9);
    auto a3 = a, b3 = b;
    a3.rotation_y += std::numbers::pi;
    b3.rotation_y += std::numbers::pi;
    EXPECT_NEAR(iou, iou_3d(a3, b3), 1e-9);
  }
}

ObjectLabel3D car(double x, double z, double bbox_height = 50, int occ = 0, double trunc = 0.0) {
  ObjectLabel3D l;
  l.class_name = "Car";
  l.truncation = trunc;
  l.occlusion = occ;
  l.bbox = {500 + x * 10, 150, 560 + x * 10, 150 + bbox_height};
  l.h = 1.5;
  l.w = 1.6;
  l.l = 3.9;
  l.x = x;
  l.y = 1.6;
  l.z = z;
  l.rotation_y = 0.3;
  return l;
}

ObjectLabel3D scored(ObjectLabel3D l, double score) {
  l.score = score;
  return l;
}

TEST(Difficulty, ThresholdTable) {
  const auto all = assign_difficulty(car(0, 10, 45, 0, 0.0));
  EXPECT_TRUE(all.contains(Difficulty::Easy) && all.contains(Difficulty::Moderate) && all.contains(Difficulty::Hard));
  const auto mh = assign_difficulty(car(0, 10, 30, 1, 0.2));
  EXPECT_FALSE(mh.contains(Difficulty::Easy));
  EXPECT_TRUE(mh.contains(Difficulty::Moderate) && mh.contains(Difficulty::Hard));
  EXPECT_TRUE(assign_difficulty(car(0, 10, 20, 0, 0.0)).ignored());
  const auto hard = assign_difficulty(car(0, 10, 60, 2, 0.45));
  EXPECT_TRUE(hard.contains(Difficulty::Hard) && !hard.contains(Difficulty::Moderate));
  EXPECT_TRUE(assign_difficulty(car(0, 10, 60, 3, 0.0)).ignored());
  EXPECT_TRUE(assign_difficulty(car(0, 10, 60, 0, 0.6)).ignored());
  // Boundaries are inclusive.
  EXPECT_TRUE(assign_difficulty(car(0, 10, 40, 0, 0.15)).contains(Difficulty::Easy));
}

std::vector<Frame> frames_of(std::vector<std::vector<ObjectLabel3D>> per_frame) {
  std::vector<Frame> out;
  for (std::size_t i = 0; i < per_frame.size(); ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "%06zu", i);
    out.push_back({id, std::move(per_frame[i])});
  }
  return out;
}

TEST(Evaluate, PerfectDetector) {
  const auto gt = frames_of({{car(-2, 12), car(3, 20, 30, 1)}, {car(0, 15)}, {}});
  auto pred = gt;
  for (auto& f : pred)
    for (auto& l : f.labels) l.score = 1.0;
  const auto report = evaluate(gt, pred, {});
  EXPECT_EQ(report.at(Difficulty::Easy).ap, 100.0);
  EXPECT_EQ(report.at(Difficulty::Moderate).ap, 100.0);
  EXPECT_EQ(report.at(Difficulty::Hard).ap, 100.0);
  EXPECT_EQ(report.at(Difficulty::Easy).num_gt, 2u);
  EXPECT_EQ(report.at(Difficulty::Moderate).num_gt, 3u);
}

TEST(Evaluate, NoPredictions) {
  const auto gt = frames_of({{car(0, 12)}});
  const auto pred = frames_of({{}});
  const auto report = evaluate(gt, pred, {});
  for (auto d : kDifficulties) EXPECT_EQ(report.at(d).ap, 0.0);
}

TEST(Evaluate, OneHitOneFalsePositive) {
  const auto gt = frames_of({{car(-4, 12), car(4, 25)}});
  const auto pred = frames_of({{scored(car(-4, 12), 0.9), scored(car(10, 60), 0.8)}});
  const auto report = evaluate(gt, pred, {});
  const auto& easy = report.at(Difficulty::Easy);
  EXPECT_EQ(easy.ap, 50.0);
  EXPECT_EQ(easy.true_positives, 1u);
  EXPECT_EQ(easy.false_positives, 1u);
  for (int k = 0; k < kRecallPositions; ++k) EXPECT_EQ(easy.precision[k], k < 20 ? 1.0 : 0.0) << k;
}

TEST(Evaluate, IgnoredAndDontCareAreNeutral) {
  auto small = car(4, 25, 15);  // too small for any tier
  ObjectLabel3D dont_care;
  dont_care.class_name = "DontCare";
  dont_care.bbox = {700, 100, 800, 200};
  const auto gt = frames_of({{car(-4, 12), small, dont_care}});
  auto in_dc = scored(car(30, 70), 0.95);
  in_dc.bbox = {710, 110, 790, 190};
  const auto pred = frames_of({{scored(car(-4, 12), 0.9), scored(small, 0.99), in_dc}});
  const auto report = evaluate(gt, pred, {});
  const auto& easy = report.at(Difficulty::Easy);
  EXPECT_EQ(easy.num_gt, 1u);
  EXPECT_EQ(easy.true_positives, 1u);
  EXPECT_EQ(easy.false_positives, 0u);
  EXPECT_EQ(easy.ap, 100.0);
}

TEST(Evaluate, OtherClassesIgnored) {
  auto ped = car(0, 12);
  ped.class_name = "Pedestrian";
  const auto gt = frames_of({{car(-4, 12), ped}});
  const auto pred = frames_of({{scored(car(-4, 12), 0.9), scored(ped, 0.95)}});
  EXPECT_EQ(evaluate(gt, pred, {}).at(Difficulty::Easy).ap, 100.0);
}

std::vector<Frame> random_scene(Rng& rng, int frames, bool predictions, const std::vector<Frame>* gt = nullptr) {
  std::vector<std::vector<ObjectLabel3D>> out(frames);
  for (int f = 0; f < frames; ++f) {
    if (predictions) {
      for (const auto& g : (*gt)[f].labels) {
        if (rng.uniform() < 0.7) {
          auto p = g;
          p.x += rng.normal(0, 0.15);
          p.z += rng.normal(0, 0.3);
          p.score = rng.uniform();
          out[f].push_back(p);
        }
      }
      const int fps = static_cast<int>(rng.uniform(0, 3));
      for (int k = 0; k < fps; ++k) out[f].push_back(scored(car(rng.uniform(-10, 10), rng.uniform(5, 50)), rng.uniform()));
    } else {
      const int n = 1 + static_cast<int>(rng.uniform(0, 4));
      for (int k = 0; k < n; ++k) {
        out[f].push_back(car(-12 + 6.0 * k, rng.uniform(8, 40), rng.uniform(20, 80), static_cast<int>(rng.uniform(0, 3)),
                             rng.uniform(0, 0.4)));
      }
    }
  }
  return frames_of(std::move(out));
}

TEST(Evaluate, IndependentOfFrameAndLineOrder) {
  Rng rng(7);
  const auto gt = random_scene(rng, 25, false);
  const auto pred = random_scene(rng, 25, true, &gt);
  const auto base = evaluate(gt, pred, {});
  auto gt2 = gt, pred2 = pred;
  std::reverse(gt2.begin(), gt2.end());
  std::rotate(pred2.begin(), pred2.begin() + 7, pred2.end());
  for (auto& f : pred2) std::reverse(f.labels.begin(), f.labels.end());
  const auto shuffled = evaluate(gt2, pred2, {});
  for (auto d : kDifficulties) {
    EXPECT_EQ(base.at(d).ap, shuffled.at(d).ap);
    EXPECT_EQ(base.at(d).precision, shuffled.at(d).precision);
  }
}

TEST(Evaluate, MonotoneInAddedDetections) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto gt = random_scene(rng, 10, false);
    auto pred = random_scene(rng, 10, true, &gt);
    const auto before = evaluate(gt, pred, {});

    // A zero-overlap detection below every existing score cannot raise AP.
    auto with_fp = pred;
    with_fp[0].labels.push_back(scored(car(0, 200), -1.0));
    const auto after_fp = evaluate(gt, with_fp, {});

    // A perfect detection for an unmatched, non-ignored GT cannot lower AP.
    auto with_tp = pred;
    for (std::size_t f = 0; f < gt.size(); ++f) {
      for (const auto& g : gt[f].labels) {
        const bool matched = std::any_of(pred[f].labels.begin(), pred[f].labels.end(), [&](const ObjectLabel3D& p) {
          return iou_3d(Box3D::from_label(p), Box3D::from_label(g)) >= 0.7;
        });
        if (!matched) with_tp[f].labels.push_back(scored(g, 2.0));
      }
    }
    const auto after_tp = evaluate(gt, with_tp, {});
    for (auto d : kDifficulties) {
      EXPECT_LE(after_fp.at(d).ap, before.at(d).ap + 1e-12);
      EXPECT_GE(after_tp.at(d).ap, before.at(d).ap - 1e-12);
      for (std::size_t i = 1; i < before.at(d).samples.size(); ++i)
        EXPECT_GE(before.at(d).samples[i].recall, before.at(d).samples[i - 1].recall);
    }
  }
}

TEST(Evaluate, MissingFramesListed) {
  const auto gt = frames_of({{car(0, 10)}, {car(0, 10)}});
  auto pred = frames_of({{}, {}});
  pred[1].id = "000009";
  try {
    evaluate(gt, pred, {});
    FAIL();
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("000001"), std::string::npos);
    EXPECT_NE(what.find("000009"), std::string::npos);
  }
}

TEST(Evaluate, ReportFormats) {
  const auto gt = frames_of({{car(-4, 12), car(4, 25)}});
  const auto pred = frames_of({{scored(car(-4, 12), 0.9), scored(car(10, 60), 0.8)}});
  const auto report = evaluate(gt, pred, {});
  const auto kv = format_keyvalue(report);
  EXPECT_NE(kv.find("easy.ap3d_r40 = 50"), std::string::npos) << kv;
  const auto table = format_table(report);
  EXPECT_NE(table.find("50.00"), std::string::npos) << table;
  EXPECT_THROW((EvalConfig{"Car", 0.0, 0.5}.validate()), InvalidArgument);
}

}  // namespace
}  // namespace advscene::eval
