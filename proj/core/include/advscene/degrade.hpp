#pragma once

// Physically-motivated weather degradations on normalized sRGB images:
//   fog        I = B*T + A*(1 - T),            T = exp(-beta * d)
//   rain       I = T*(B + sum_i R_i) + (1 - T)*A
//   low light  I = LUT_gamma(B)
// plus the seven named severity presets.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "advscene/depth.hpp"
#include "advscene/image.hpp"
#include "advscene/keyvalue.hpp"

namespace advscene::degrade {

using Rgb = std::array<double, 3>;

struct FogParams {
  double beta = 0.0;  // 1/m
  Rgb atmospheric_light{0.85, 0.85, 0.85};

  void validate() const;
};

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct RainParams {
  int n_layers = 2;
  int streaks_per_layer = 400;
  double angle_mean = 0.2;  // radians from vertical, positive leans right
  double angle_std = 0.05;
  Range length{10.0, 30.0};     // px
  Range width{1.0, 2.0};        // px
  Range intensity{0.05, 0.15};  // additive, normalized units
  FogParams fog_coupling{0.02, {0.85, 0.85, 0.85}};

  void validate() const;
};

struct LowLightParams {
  double gamma = 2.5;

  void validate() const;
};

enum class PresetKind { ModFog, ThickFog, DenseFog, ModRain, HeavyRain, DenseRain, LowLight };

struct WeatherPreset {
  PresetKind kind = PresetKind::ModFog;
  std::variant<FogParams, RainParams, LowLightParams> params;

  std::string_view name() const;
  bool needs_depth() const { return !std::holds_alternative<LowLightParams>(params); }
};

inline constexpr std::array<std::string_view, 7> kPresetNames = {
    "mod_fog", "thick_fog", "dense_fog", "mod_rain", "heavy_rain", "dense_rain", "low_light"};

WeatherPreset default_preset(PresetKind kind);
// Throws InvalidArgument for names outside kPresetNames.
WeatherPreset preset_by_name(std::string_view name);

// Override keys: fog.beta, fog.A (one value or "r,g,b"), rain.n_layers,
// rain.streaks_per_layer, rain.angle_mean, rain.angle_std, rain.length_min/max,
// rain.width_min/max, rain.intensity_min/max, rain.beta, rain.A, low_light.gamma.
// Keys for other preset families and depth.* keys are ignored here.
void apply_overrides(WeatherPreset& preset, const KeyValueFile& overrides);
void describe(const WeatherPreset& preset, KeyValueFile& out);

// Row-major H x W map in (0, 1].
struct TransmissionMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
};

TransmissionMap transmission(const depth::DepthMap& depth, double beta);

ImageBuffer apply_fog(const ImageBuffer& image, const depth::DepthMap& depth, const FogParams& params);
ImageBuffer apply_fog(const ImageBuffer& image, const TransmissionMap& t, const Rgb& airlight);

// One additive rain layer, H x W, values >= 0 (shared across channels).
struct RainLayer {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  RainLayer() = default;
  RainLayer(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}
  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  friend bool operator==(const RainLayer&, const RainLayer&) = default;
};

struct Streak {
  double center_x = 0, center_y = 0;  // px, pixel centres at integer coordinates
  double angle = 0;                   // radians from vertical
  double length = 0, width = 0;       // px
  double intensity = 0;
};

// Adds intensity * coverage, where coverage is the separable box-filtered overlap of the
// pixel footprint with the streak rectangle in streak-aligned coordinates.
void draw_streak(RainLayer& layer, const Streak& streak);

std::vector<RainLayer> render_rain_layers(int width, int height, const RainParams& params,
                                          std::uint64_t seed);

ImageBuffer composite_rain(const ImageBuffer& image, std::span<const RainLayer> layers,
                           const TransmissionMap& t, const Rgb& airlight);
ImageBuffer apply_rain(const ImageBuffer& image, const depth::DepthMap& depth,
                       const RainParams& params, std::uint64_t seed);

std::array<std::uint8_t, 256> gamma_lut(double gamma);
ImageBuffer apply_low_light(const ImageBuffer& image, const LowLightParams& params);

// Dispatches on the preset family. `depth` may be empty for low_light.
ImageBuffer apply_preset(const ImageBuffer& image, const depth::DepthMap& depth,
                         const WeatherPreset& preset, std::uint64_t seed);

}  // namespace advscene::degrade
