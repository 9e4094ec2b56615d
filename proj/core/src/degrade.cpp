#include "advscene/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "advscene/error.hpp"
#include "advscene/rng.hpp"

namespace advscene::degrade {
namespace {

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
}

void check_range(const Range& r, const char* what) {
  if (!(r.min <= r.max)) throw InvalidArgument(std::string(what) + ": min must be <= max");
}

void check_same_shape(const ImageBuffer& image, int width, int height) {
  if (image.width() != width || image.height() != height) {
    throw InvalidArgument("image is " + std::to_string(image.width()) + "x" +
                          std::to_string(image.height()) + " but depth/transmission is " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
}

// Length of [t - 0.5, t + 0.5] intersected with [-extent/2, extent/2].
double box_overlap(double t, double extent) {
  const double half = 0.5 * extent;
  return std::max(0.0, std::min(t + 0.5, half) - std::max(t - 0.5, -half));
}

Rgb parse_rgb(const std::string& text, const char* key) {
  Rgb out{};
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> v;
  double x = 0;
  while (in >> x) v.push_back(x);
  if (!in.eof() || (v.size() != 1 && v.size() != 3)) {
    throw ParseError(std::string(key) + ": expected one value or three comma-separated values");
  }
  for (int c = 0; c < 3; ++c) out[c] = v.size() == 1 ? v[0] : v[c];
  return out;
}

std::string format_rgb(const Rgb& rgb) {
  return format_double(rgb[0]) + "," + format_double(rgb[1]) + "," + format_double(rgb[2]);
}

}  // namespace

void FogParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("fog beta must be >= 0");
  for (double a : atmospheric_light) check_unit(a, "atmospheric light");
}

void RainParams::validate() const {
  if (n_layers < 0) throw InvalidArgument("rain n_layers must be >= 0");
  if (streaks_per_layer < 0) throw InvalidArgument("rain streaks_per_layer must be >= 0");
  if (!(angle_std >= 0.0)) throw InvalidArgument("rain angle_std must be >= 0");
  check_range(length, "rain length");
  check_range(width, "rain width");
  check_range(intensity, "rain intensity");
  if (length.min < 0 || width.min < 0) throw InvalidArgument("rain streak extents must be >= 0");
  check_unit(intensity.min, "rain intensity");
  check_unit(intensity.max, "rain intensity");
  fog_coupling.validate();
}

void LowLightParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be > 0");
}

std::string_view WeatherPreset::name() const { return kPresetNames[static_cast<int>(kind)]; }

WeatherPreset default_preset(PresetKind kind) {
  const auto fog = [&](double beta) { return WeatherPreset{kind, FogParams{beta, {0.85, 0.85, 0.85}}}; };
  const auto rain = [&](int streaks, int layers, double beta) {
    RainParams p;
    p.streaks_per_layer = streaks;
    p.n_layers = layers;
    p.fog_coupling.beta = beta;
    return WeatherPreset{kind, p};
  };
  switch (kind) {
    case PresetKind::ModFog: return fog(0.05);
    case PresetKind::ThickFog: return fog(0.10);
    case PresetKind::DenseFog: return fog(0.20);
    case PresetKind::ModRain: return rain(400, 2, 0.02);
    case PresetKind::HeavyRain: return rain(800, 3, 0.03);
    case PresetKind::DenseRain: return rain(1500, 4, 0.05);
    case PresetKind::LowLight: return WeatherPreset{kind, LowLightParams{2.5}};
  }
  throw InvalidArgument("unknown preset kind");
}

WeatherPreset preset_by_name(std::string_view name) {
  for (std::size_t i = 0; i < kPresetNames.size(); ++i) {
    if (kPresetNames[i] == name) return default_preset(static_cast<PresetKind>(i));
  }
  std::string known;
  for (auto n : kPresetNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw InvalidArgument("unknown preset '" + std::string(name) + "' (expected one of " + known + ")");
}

void apply_overrides(WeatherPreset& preset, const KeyValueFile& kv) {
  auto number = [&](const char* key, double& target) {
    if (auto v = kv.get_double(key)) target = *v;
  };
  auto count = [&](const char* key, int& target) {
    if (auto v = kv.get_double(key)) {
      if (*v != std::floor(*v) || *v < 0 || *v > 1e7) {
        throw ParseError(std::string(key) + ": expected a non-negative integer");
      }
      target = static_cast<int>(*v);
    }
  };
  auto rgb = [&](const char* key, Rgb& target) {
    if (auto v = kv.get(key)) target = parse_rgb(*v, key);
  };
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FogParams>) {
          number("fog.beta", p.beta);
          rgb("fog.A", p.atmospheric_light);
        } else if constexpr (std::is_same_v<T, RainParams>) {
          count("rain.n_layers", p.n_layers);
          count("rain.streaks_per_layer", p.streaks_per_layer);
          number("rain.angle_mean", p.angle_mean);
          number("rain.angle_std", p.angle_std);
          number("rain.length_min", p.length.min);
          number("rain.length_max", p.length.max);
          number("rain.width_min", p.width.min);
          number("rain.width_max", p.width.max);
          number("rain.intensity_min", p.intensity.min);
          number("rain.intensity_max", p.intensity.max);
          number("rain.beta", p.fog_coupling.beta);
          rgb("rain.A", p.fog_coupling.atmospheric_light);
        } else {
          number("low_light.gamma", p.gamma);
        }
        p.validate();
      },
      preset.params);
}

void describe(const WeatherPreset& preset, KeyValueFile& out) {
  out.set("preset", std::string(preset.name()));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FogParams>) {
          out.set("fog.beta", p.beta);
          out.set("fog.A", format_rgb(p.atmospheric_light));
        } else if constexpr (std::is_same_v<T, RainParams>) {
          out.set("rain.n_layers", static_cast<long long>(p.n_layers));
          out.set("rain.streaks_per_layer", static_cast<long long>(p.streaks_per_layer));
          out.set("rain.angle_mean", p.angle_mean);
          out.set("rain.angle_std", p.angle_std);
          out.set("rain.length_min", p.length.min);
          out.set("rain.length_max", p.length.max);
          out.set("rain.width_min", p.width.min);
          out.set("rain.width_max", p.width.max);
          out.set("rain.intensity_min", p.intensity.min);
          out.set("rain.intensity_max", p.intensity.max);
          out.set("rain.beta", p.fog_coupling.beta);
          out.set("rain.A", format_rgb(p.fog_coupling.atmospheric_light));
        } else {
          out.set("low_light.gamma", p.gamma);
        }
      },
      preset.params);
}

TransmissionMap transmission(const depth::DepthMap& depth, double beta) {
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be >= 0");
  TransmissionMap t{depth.width(), depth.height(), {}};
  t.values.reserve(depth.values().size());
  for (double d : depth.values()) {
    if (!(d > 0) || !std::isfinite(d)) {
      throw InvalidArgument("transmission needs a dense depth map (densify first)");
    }
    t.values.push_back(std::exp(-beta * d));
  }
  return t;
}

ImageBuffer apply_fog(const ImageBuffer& image, const TransmissionMap& t, const Rgb& airlight) {
  check_same_shape(image, t.width, t.height);
  ImageBuffer out(image.width(), image.height());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const double tr = t.at(r, c);
      for (int ch = 0; ch < 3; ++ch) {
        const double v = image.at(r, c, ch) * tr + airlight[ch] * (1.0 - tr);
        out.at(r, c, ch) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

ImageBuffer apply_fog(const ImageBuffer& image, const depth::DepthMap& depth, const FogParams& params) {
  params.validate();
  check_same_shape(image, depth.width(), depth.height());
  return apply_fog(image, transmission(depth, params.beta), params.atmospheric_light);
}

void draw_streak(RainLayer& layer, const Streak& s) {
  if (!(s.length > 0) || !(s.width > 0) || s.intensity == 0.0) return;
  const double dx = std::sin(s.angle), dy = std::cos(s.angle);  // along the streak
  const double nx = dy, ny = -dx;                                // across
  const double reach_x = 0.5 * (std::abs(dx) * s.length + std::abs(nx) * s.width) + 1.0;
  const double reach_y = 0.5 * (std::abs(dy) * s.length + std::abs(ny) * s.width) + 1.0;
  const int c0 = std::max(0, static_cast<int>(std::floor(s.center_x - reach_x)));
  const int c1 = std::min(layer.width - 1, static_cast<int>(std::ceil(s.center_x + reach_x)));
  const int r0 = std::max(0, static_cast<int>(std::floor(s.center_y - reach_y)));
  const int r1 = std::min(layer.height - 1, static_cast<int>(std::ceil(s.center_y + reach_y)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double px = c - s.center_x, py = r - s.center_y;
      const double along = px * dx + py * dy;
      const double across = px * nx + py * ny;
      const double coverage = box_overlap(along, s.length) * box_overlap(across, s.width);
      if (coverage > 0.0) layer.values[static_cast<std::size_t>(r) * layer.width + c] += s.intensity * coverage;
    }
  }
}

std::vector<RainLayer> render_rain_layers(int width, int height, const RainParams& params,
                                          std::uint64_t seed) {
  params.validate();
  std::vector<RainLayer> layers;
  layers.reserve(params.n_layers);
  for (int i = 0; i < params.n_layers; ++i) {
    RainLayer layer(width, height);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (int k = 0; k < params.streaks_per_layer; ++k) {
      Streak s;
      s.center_x = rng.uniform(-0.5, width - 0.5);
      s.center_y = rng.uniform(-0.5, height - 0.5);
      s.angle = rng.normal(params.angle_mean, params.angle_std);
      s.length = rng.uniform(params.length.min, params.length.max);
      s.width = rng.uniform(params.width.min, params.width.max);
      s.intensity = rng.uniform(params.intensity.min, params.intensity.max);
      draw_streak(layer, s);
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

ImageBuffer composite_rain(const ImageBuffer& image, std::span<const RainLayer> layers,
                           const TransmissionMap& t, const Rgb& airlight) {
  check_same_shape(image, t.width, t.height);
  for (const auto& layer : layers) check_same_shape(image, layer.width, layer.height);
  ImageBuffer out(image.width(), image.height());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      double rain = 0.0;
      for (const auto& layer : layers) rain += layer.at(r, c);
      const double tr = t.at(r, c);
      for (int ch = 0; ch < 3; ++ch) {
        const double v = tr * (image.at(r, c, ch) + rain) + (1.0 - tr) * airlight[ch];
        out.at(r, c, ch) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

ImageBuffer apply_rain(const ImageBuffer& image, const depth::DepthMap& depth,
                       const RainParams& params, std::uint64_t seed) {
  params.validate();
  check_same_shape(image, depth.width(), depth.height());
  const auto t = transmission(depth, params.fog_coupling.beta);
  const auto layers = render_rain_layers(image.width(), image.height(), params, seed);
  return composite_rain(image, layers, t, params.fog_coupling.atmospheric_light);
}

std::array<std::uint8_t, 256> gamma_lut(double gamma) {
  LowLightParams{gamma}.validate();
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    lut[v] = static_cast<std::uint8_t>(std::lround(255.0 * std::pow(v / 255.0, gamma)));
  }
  return lut;
}

ImageBuffer apply_low_light(const ImageBuffer& image, const LowLightParams& params) {
  const auto lut = gamma_lut(params.gamma);
  ImageBuffer out(image.width(), image.height());
  auto src = image.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = byte_to_unit(lut[unit_to_byte(src[i])]);
  return out;
}

ImageBuffer apply_preset(const ImageBuffer& image, const depth::DepthMap& depth,
                         const WeatherPreset& preset, std::uint64_t seed) {
  return std::visit(
      [&](const auto& p) -> ImageBuffer {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FogParams>) {
          return apply_fog(image, depth, p);
        } else if constexpr (std::is_same_v<T, RainParams>) {
          return apply_rain(image, depth, p, seed);
        } else {
          return apply_low_light(image, p);
        }
      },
      preset.params);
}

}  // namespace advscene::degrade
