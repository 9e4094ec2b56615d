#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "advscene/depth.hpp"
#include "advscene/error.hpp"
#include "advscene/eval3d.hpp"
#include "advscene/kitti_io.hpp"
#include "advscene/parallel.hpp"
#include "advscene/selftest.hpp"
#include "advscene/synthesize.hpp"
#include "advscene/twin_depth.hpp"

namespace advscene::cli {
namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

unsigned threads_from_env() {
  const char* env = std::getenv("ADVSCENE_THREADS");
  if (!env || !*env) return default_thread_count();
  unsigned n = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, n);
  if (ec != std::errc() || ptr != end || n == 0) {
    throw UsageError(std::string("ADVSCENE_THREADS must be a positive integer, got '") + env + "'");
  }
  return n;
}

void require_dir(const fs::path& p, const char* flag) {
  std::error_code ec;
  if (!fs::is_directory(p, ec)) throw UsageError(std::string(flag) + ": not a directory: " + p.string());
}

void require_file(const fs::path& p, const char* flag) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw UsageError(std::string(flag) + ": no such file: " + p.string());
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct SynthesizeArgs {
  std::string input, output, preset, depth_source = "lidar", depth_dir, params;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

int do_synthesize(const SynthesizeArgs& a, std::ostream& out) {
  require_dir(a.input, "--input");
  synth::SynthesisOptions o;
  o.input_root = a.input;
  o.output_root = a.output;
  try {
    o.preset = degrade::preset_by_name(a.preset);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--preset: ") + e.what());
  }
  o.seed = a.seed;
  o.depth_source = a.depth_source == "files" ? synth::DepthSource::Files : synth::DepthSource::Lidar;
  o.depth_dir = a.depth_dir;
  o.threads = a.threads ? a.threads : threads_from_env();
  if (!a.params.empty()) {
    require_file(a.params, "--params");
    const auto overrides = KeyValueFile::parse(kitti::read_text_file(a.params));
    degrade::apply_overrides(o.preset, overrides);
    synth::apply_depth_overrides(o, overrides);
  }
  const auto manifest = synth::synthesize_dataset(o);
  out << "preset " << o.preset.name() << ": wrote " << manifest.written.size() << " frames, skipped "
      << manifest.skipped.size() << " -> " << (o.output_root / synth::kManifestName).string() << "\n";
  return kExitOk;
}

struct ProjectArgs {
  std::string input, output;
  bool dense = false;
  double max_radius = 64.0;
  double fill = depth::kDefaultFillValue;
  int width = 0, height = 0;
  unsigned threads = 0;
};

int do_project_depth(const ProjectArgs& a, std::ostream& out) {
  require_dir(a.input, "--input");
  if ((a.width > 0) != (a.height > 0)) throw UsageError("--width and --height must be given together");
  std::error_code ec;
  fs::create_directories(a.output, ec);
  if (ec) throw IoError("cannot create " + a.output + ": " + ec.message());
  const auto frames = kitti::list_frames(fs::path(a.input) / "velodyne", ".bin");
  std::vector<std::string> skipped(frames.size());
  parallel_for(frames.size(), a.threads ? a.threads : threads_from_env(), [&](std::size_t i) {
    const int id = frames[i];
    int w = a.width, h = a.height;
    if (w == 0) {
      const auto img = kitti::image_path(a.input, id);
      if (!fs::is_regular_file(img)) {
        skipped[i] = "no image to size the depth map";
        return;
      }
      const auto image = kitti::read_image(kitti::read_file(img), img.string());
      w = image.width();
      h = image.height();
    }
    const auto calib_file = kitti::calib_path(a.input, id);
    if (!fs::is_regular_file(calib_file)) {
      skipped[i] = "missing calibration";
      return;
    }
    const auto calib = kitti::parse_calib(kitti::read_text_file(calib_file));
    const auto cloud = kitti::read_point_cloud(kitti::read_file(kitti::velodyne_path(a.input, id)));
    auto map = depth::project_lidar_to_depth(cloud, calib, w, h);
    if (a.dense) map = depth::densify(map, a.max_radius, a.fill);
    kitti::write_file(fs::path(a.output) / (kitti::frame_name(id) + ".png"), depth::encode_depth(map));
  });
  std::size_t written = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (skipped[i].empty()) {
      ++written;
    } else {
      out << "skipped " << kitti::frame_name(frames[i]) << ": " << skipped[i] << "\n";
    }
  }
  out << "wrote " << written << " depth maps to " << a.output << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string gt, pred, class_name = "Car", report = "ap3d_report.txt";
  double iou = 0.7;
  double dont_care_overlap = 0.5;
};

int do_evaluate(const EvaluateArgs& a, std::ostream& out) {
  require_dir(a.gt, "--gt");
  require_dir(a.pred, "--pred");
  eval::EvalConfig config{a.class_name, a.iou, a.dont_care_overlap};
  try {
    config.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto report = eval::evaluate(eval::load_label_dir(a.gt), eval::load_label_dir(a.pred), config);
  out << eval::format_table(report);
  if (!a.report.empty()) kitti::write_text_file(a.report, eval::format_keyvalue(report));
  return kExitOk;
}

int do_fuse(double od, double ou, double sd, double su, std::ostream& out) {
  const twin::LaplaceDepth obj{od, ou}, sce{sd, su};
  try {
    obj.validate();
    sce.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto fused = twin::fuse(obj, sce);
  out << "depth = " << num(fused.depth) << "\nuncertainty = " << num(fused.uncertainty) << "\n";
  return kExitOk;
}

int do_loss(double d, double u, double gt, std::ostream& out) {
  if (!(u > 0)) throw UsageError("--pred-unc must be > 0");
  const auto l = twin::instance_depth_loss({d, u}, gt);
  out << "loss = " << num(l.value) << "\nd_depth = " << num(l.d_depth)
      << "\nd_uncertainty = " << num(l.d_uncertainty) << "\n";
  return kExitOk;
}

struct TargetsArgs {
  std::string input, mode = "dense";
  int frame = 0;
  double max_radius = 64.0;
  double fill = depth::kDefaultFillValue;
};

int do_depth_targets(const TargetsArgs& a, std::ostream& out) {
  require_dir(a.input, "--input");
  for (auto path : {kitti::label_path(a.input, a.frame), kitti::calib_path(a.input, a.frame),
                    kitti::velodyne_path(a.input, a.frame), kitti::image_path(a.input, a.frame)}) {
    if (!fs::is_regular_file(path)) throw IoError("missing " + path.string());
  }
  const auto labels = kitti::parse_labels(kitti::read_text_file(kitti::label_path(a.input, a.frame)));
  const auto calib = kitti::parse_calib(kitti::read_text_file(kitti::calib_path(a.input, a.frame)));
  const auto cloud = kitti::read_point_cloud(kitti::read_file(kitti::velodyne_path(a.input, a.frame)));
  const auto img_file = kitti::image_path(a.input, a.frame);
  const auto image = kitti::read_image(kitti::read_file(img_file), img_file.string());
  auto scene = depth::project_lidar_to_depth(cloud, calib, image.width(), image.height());
  if (a.mode == "dense") scene = depth::densify(scene, a.max_radius, a.fill);

  out << "# index class instance_gt scene_gt object_gt (mode " << a.mode << ")\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    if (l.is_dont_care()) continue;
    const Eigen::Vector3d center(l.x, l.y - 0.5 * l.h, l.z);
    const Eigen::Vector3d img = calib.p2.leftCols<3>() * center + calib.p2.col(3);
    std::optional<double> scene_gt;
    if (img.z() > 0) {
      const double col = std::floor(img.x() / img.z() + 0.5), row = std::floor(img.y() / img.z() + 0.5);
      if (col >= 0 && row >= 0 && col < scene.width() && row < scene.height() &&
          scene.present(static_cast<int>(row), static_cast<int>(col))) {
        scene_gt = scene.at(static_cast<int>(row), static_cast<int>(col));
      }
    }
    out << i << ' ' << l.class_name << ' ' << num(l.z) << ' ';
    if (scene_gt) {
      out << num(*scene_gt) << ' ' << num(twin::split_depth_targets(l.z, *scene_gt)) << '\n';
    } else {
      out << "missing missing\n";
    }
  }
  return kExitOk;
}

int do_selftest(std::uint64_t seed, std::ostream& out) {
  bool all = true;
  for (const auto& r : run_kernel_selftests(seed)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) out << " (" << r.detail << ")";
    out << "\n";
    all = all && r.passed;
  }
  return all ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adverse-weather KITTI synthesis, twin-depth kernels and AP3D_R40 evaluation",
               args.empty() ? "advscene" : args.front()};
  app.require_subcommand(1);
  app.fallthrough(false);

  SynthesizeArgs syn;
  auto* synthesize = app.add_subcommand("synthesize", "Degrade a KITTI split with a weather preset");
  synthesize->add_option("--input", syn.input, "KITTI root with image_2/, calib/, velodyne/")->required();
  synthesize->add_option("--output", syn.output, "Output root")->required();
  synthesize->add_option("--preset", syn.preset,
                         "mod_fog|thick_fog|dense_fog|mod_rain|heavy_rain|dense_rain|low_light")
      ->required();
  synthesize->add_option("--seed", syn.seed, "Global 64-bit seed")->required();
  synthesize->add_option("--depth-source", syn.depth_source, "lidar or files")
      ->check(CLI::IsMember({"lidar", "files"}));
  synthesize->add_option("--depth-dir", syn.depth_dir, "16-bit depth rasters (default <input>/depth)");
  synthesize->add_option("--params", syn.params, "key = value parameter overrides");
  synthesize->add_option("--threads", syn.threads, "Worker threads (default ADVSCENE_THREADS or cores)")
      ->check(CLI::PositiveNumber);

  ProjectArgs proj;
  auto* project = app.add_subcommand("project-depth", "Project LiDAR scans to 16-bit depth rasters");
  project->add_option("--input", proj.input, "KITTI root")->required();
  project->add_option("--output", proj.output, "Directory for NNNNNN.png depth maps")->required();
  project->add_flag("--dense", proj.dense, "Densify before writing");
  project->add_option("--max-radius", proj.max_radius, "Densification radius in pixels")
      ->check(CLI::NonNegativeNumber);
  project->add_option("--fill", proj.fill, "Depth (m) for pixels with no neighbour in range")
      ->check(CLI::PositiveNumber);
  project->add_option("--width", proj.width, "Raster width (default: image_2 size)")->check(CLI::PositiveNumber);
  project->add_option("--height", proj.height, "Raster height (default: image_2 size)")->check(CLI::PositiveNumber);
  project->add_option("--threads", proj.threads, "Worker threads")->check(CLI::PositiveNumber);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "AP3D_R40 of predictions against ground truth");
  evaluate->add_option("--gt", ev.gt, "Ground-truth label directory")->required();
  evaluate->add_option("--pred", ev.pred, "Prediction label directory (16-field)")->required();
  evaluate->add_option("--class", ev.class_name, "Class to score")->capture_default_str();
  evaluate->add_option("--iou", ev.iou, "3D IoU threshold")->capture_default_str();
  evaluate->add_option("--dont-care-overlap", ev.dont_care_overlap,
                       "Fraction of a prediction's 2D box inside DontCare that ignores it")
      ->capture_default_str();
  evaluate->add_option("--report", ev.report, "key = value report path (empty to skip)")->capture_default_str();

  double od = 0, ou = 0, sd = 0, su = 0;
  auto* fuse = app.add_subcommand("fuse", "Fuse object and scene Laplace depths");
  fuse->add_option("--obj-depth", od, "Object depth (m)")->required();
  fuse->add_option("--obj-unc", ou, "Object uncertainty (m)")->required();
  fuse->add_option("--sce-depth", sd, "Scene depth (m)")->required();
  fuse->add_option("--sce-unc", su, "Scene uncertainty (m)")->required();

  double pd = 0, pu = 0, gt = 0;
  auto* loss = app.add_subcommand("loss", "Instance depth uncertainty loss and gradients");
  loss->add_option("--pred-depth", pd, "Predicted instance depth (m)")->required();
  loss->add_option("--pred-unc", pu, "Predicted uncertainty (m)")->required();
  loss->add_option("--gt", gt, "Ground-truth instance depth (m)")->required();

  TargetsArgs tgt;
  auto* targets = app.add_subcommand("depth-targets", "Scene/object depth supervision for one frame");
  targets->add_option("--input", tgt.input, "KITTI root")->required();
  targets->add_option("--frame", tgt.frame, "Frame id")->required()->check(CLI::NonNegativeNumber);
  targets->add_option("--mode", tgt.mode, "sparse or dense scene depth")
      ->check(CLI::IsMember({"sparse", "dense"}))
      ->capture_default_str();
  targets->add_option("--max-radius", tgt.max_radius, "Densification radius in pixels")
      ->check(CLI::NonNegativeNumber);
  targets->add_option("--fill", tgt.fill, "Fill depth (m)")->check(CLI::PositiveNumber);

  std::uint64_t selftest_seed = 20240601;
  auto* selftest = app.add_subcommand("kernels-selftest", "Run the twin-depth and attention invariant suites");
  selftest->add_option("--seed", selftest_seed, "Random seed")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (synthesize->parsed()) return do_synthesize(syn, out);
    if (project->parsed()) return do_project_depth(proj, out);
    if (evaluate->parsed()) return do_evaluate(ev, out);
    if (fuse->parsed()) return do_fuse(od, ou, sd, su, out);
    if (loss->parsed()) return do_loss(pd, pu, gt, out);
    if (targets->parsed()) return do_depth_targets(tgt, out);
    if (selftest->parsed()) return do_selftest(selftest_seed, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace advscene::cli
