#include "advscene/synthesize.hpp"

#include <optional>

#include "advscene/error.hpp"
#include "advscene/kitti_io.hpp"
#include "advscene/parallel.hpp"
#include "advscene/rng.hpp"

namespace advscene::synth {
namespace fs = std::filesystem;

namespace {

// A required per-frame input is absent or unreadable; the frame is skipped.
class MissingInput : public Error {
 public:
  using Error::Error;
};

fs::path depth_dir_of(const SynthesisOptions& o) {
  return o.depth_dir.empty() ? o.input_root / "depth" : o.depth_dir;
}

void require(const fs::path& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw MissingInput(std::string("missing ") + what + " " + path.string());
}

struct FrameOutcome {
  bool written = false;
  std::string skip_reason;
};

}  // namespace

void apply_depth_overrides(SynthesisOptions& options, const KeyValueFile& overrides) {
  if (auto v = overrides.get_double("depth.max_radius")) options.max_radius = *v;
  if (auto v = overrides.get_double("depth.fill_value")) options.fill_value = *v;
  if (options.max_radius < 0) throw InvalidArgument("depth.max_radius must be >= 0");
  if (!(options.fill_value > 0)) throw InvalidArgument("depth.fill_value must be > 0");
}

depth::DepthMap frame_depth(const SynthesisOptions& options, int frame_id, int width, int height) {
  depth::DepthMap sparse;
  if (options.depth_source == DepthSource::Lidar) {
    const auto calib_file = kitti::calib_path(options.input_root, frame_id);
    const auto velo_file = kitti::velodyne_path(options.input_root, frame_id);
    require(calib_file, "calibration");
    require(velo_file, "LiDAR scan");
    kitti::CameraCalibration calib;
    kitti::PointCloud cloud;
    try {
      calib = kitti::parse_calib(kitti::read_text_file(calib_file));
      cloud = kitti::read_point_cloud(kitti::read_file(velo_file));
    } catch (const ParseError& e) {
      throw MissingInput(e.what());
    }
    sparse = depth::project_lidar_to_depth(cloud, calib, width, height);
  } else {
    const auto file = depth_dir_of(options) / (kitti::frame_name(frame_id) + ".png");
    require(file, "depth raster");
    try {
      sparse = depth::decode_depth(kitti::read_file(file), file.string());
    } catch (const ParseError& e) {
      throw MissingInput(e.what());
    }
    if (sparse.width() != width || sparse.height() != height) {
      throw MissingInput("depth raster " + file.string() + " does not match the image size");
    }
  }
  return depth::densify(sparse, options.max_radius, options.fill_value);
}

Manifest synthesize_dataset(const SynthesisOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(options.input_root / "image_2", ec)) {
    throw IoError("input has no image_2 directory: " + options.input_root.string());
  }
  for (const char* sub : {"image_2", "label_2", "calib"}) {
    fs::create_directories(options.output_root / sub, ec);
    if (ec) throw IoError("cannot create " + (options.output_root / sub).string() + ": " + ec.message());
  }

  const std::vector<int> frames = kitti::list_frames(options.input_root / "image_2", ".png");
  std::vector<FrameOutcome> outcomes(frames.size());
  const bool needs_depth = options.preset.needs_depth();

  parallel_for(frames.size(), options.threads, [&](std::size_t i) {
    const int id = frames[i];
    FrameOutcome& outcome = outcomes[i];
    try {
      const auto image_file = kitti::image_path(options.input_root, id);
      ImageBuffer image;
      try {
        image = kitti::read_image(kitti::read_file(image_file), image_file.string());
      } catch (const ParseError& e) {
        throw MissingInput(e.what());
      }
      depth::DepthMap dense;
      if (needs_depth) dense = frame_depth(options, id, image.width(), image.height());

      const ImageBuffer degraded =
          degrade::apply_preset(image, dense, options.preset, derive_seed(options.seed, id));
      kitti::write_file(kitti::image_path(options.output_root, id), kitti::write_image(degraded));

      for (auto path_of : {&kitti::label_path, &kitti::calib_path}) {
        const fs::path src = path_of(options.input_root, id);
        if (fs::is_regular_file(src, ec)) {
          kitti::write_file(path_of(options.output_root, id), kitti::read_file(src));
        }
      }
      outcome.written = true;
    } catch (const MissingInput& e) {
      outcome.skip_reason = e.what();
    }
  });

  Manifest manifest;
  degrade::describe(options.preset, manifest.entries);
  manifest.entries.set("seed", std::to_string(options.seed));
  manifest.entries.set("depth_source",
                       std::string(options.depth_source == DepthSource::Lidar ? "lidar" : "files"));
  manifest.entries.set("depth.max_radius", options.max_radius);
  manifest.entries.set("depth.fill_value", options.fill_value);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (outcomes[i].written) {
      manifest.written.push_back(frames[i]);
    } else {
      manifest.skipped.push_back({frames[i], outcomes[i].skip_reason});
    }
  }
  manifest.entries.set("frame_count", static_cast<long long>(manifest.written.size()));
  manifest.entries.set("skipped_count", static_cast<long long>(manifest.skipped.size()));
  for (const auto& s : manifest.skipped) {
    manifest.entries.set("skipped." + kitti::frame_name(s.frame_id), s.reason);
  }
  kitti::write_text_file(options.output_root / kManifestName, manifest.entries.to_string());
  return manifest;
}

}  // namespace advscene::synth
