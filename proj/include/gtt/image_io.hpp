#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gtt/scene.hpp"

namespace gtt {

/// 8-bit sRGB-ish display value: round(255 * clamp(v, 0, 1)^(1/2.2)).
std::uint8_t encode_gamma(double linear);

/// Binary P6, maxval 255, gamma 2.2.
std::string encode_ppm(const Image& image);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// RGB8 PNG with the same gamma encoding as the PPM output.
std::string encode_png(const Image& image);
void write_png(const std::filesystem::path& path, const Image& image);

/// 8-bit decoded raster, as stored on disk.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

Raster read_ppm(const std::filesystem::path& path);

/// Decodes a PPM or PNG file (detected by signature) to 8-bit RGB.
Raster read_image(const std::filesystem::path& path);

/// Mean absolute difference of 8-bit channel values, scaled to [0, 1].
double mean_abs_difference(const Raster& a, const Raster& b);

/// Root-mean-square difference of linear radiance over all channels.
double rmse(const Image& a, const Image& b);

}  // namespace gtt
