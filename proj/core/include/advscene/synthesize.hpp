#pragma once

// Batch conversion of a clean KITTI object split into one adverse-weather condition.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "advscene/degrade.hpp"
#include "advscene/keyvalue.hpp"

namespace advscene::synth {

enum class DepthSource { Lidar, Files };

struct SynthesisOptions {
  std::filesystem::path input_root;
  std::filesystem::path output_root;
  degrade::WeatherPreset preset = degrade::default_preset(degrade::PresetKind::ModFog);
  std::uint64_t seed = 0;
  DepthSource depth_source = DepthSource::Lidar;
  // 16-bit depth rasters named NNNNNN.png; defaults to <input_root>/depth.
  std::filesystem::path depth_dir;
  double max_radius = 64.0;
  double fill_value = depth::kDefaultFillValue;
  unsigned threads = 1;
};

struct SkippedFrame {
  int frame_id = 0;
  std::string reason;
};

struct Manifest {
  KeyValueFile entries;  // preset, parameters, seed, counts, skipped frames
  std::vector<int> written;
  std::vector<SkippedFrame> skipped;
};

inline constexpr const char* kManifestName = "manifest.txt";

// Reads depth.max_radius / depth.fill_value from an override file.
void apply_depth_overrides(SynthesisOptions& options, const KeyValueFile& overrides);

// Frames come from <input_root>/image_2. Output mirrors image_2, label_2 and calib, plus
// manifest.txt. Frames missing a required input are skipped and listed in the manifest.
Manifest synthesize_dataset(const SynthesisOptions& options);

// Dense depth for one frame according to the options (LiDAR projection or raster file,
// both densified).
depth::DepthMap frame_depth(const SynthesisOptions& options, int frame_id, int width, int height);

}  // namespace advscene::synth
