#include "gtt/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gtt/errors.hpp"

namespace gtt {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::vector<std::uint8_t> encode_rgb8(const Image& image) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(std::size_t(image.pixels.size()));
  for (Eigen::Index i = 0; i < image.pixels.rows(); ++i) {
    for (int c = 0; c < 3; ++c) rgb.push_back(encode_gamma(image.pixels(i, c)));
  }
  return rgb;
}

}  // namespace

std::uint8_t encode_gamma(double linear) {
  if (!(linear > 0.0)) return 0;
  const double v = std::pow(std::min(linear, 1.0), 1.0 / 2.2);
  return std::uint8_t(std::lround(255.0 * v));
}

std::string encode_ppm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  const auto rgb = encode_rgb8(image);
  out.append(rgb.begin(), rgb.end());
  return out;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_ppm(image));
}

std::string encode_png(const Image& image) {
  const auto rgb = encode_rgb8(image);
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = png_uint_32(image.width);
  png.height = png_uint_32(image.height);
  png.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encoding failed: ") + png.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, rgb.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encoding failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_png(image));
}

Raster read_ppm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t begin = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(begin, pos - begin);
  };
  if (next_token() != "P6") throw InvalidArgument(path.string() + ": not a binary PPM");
  Raster r;
  try {
    r.width = std::stoi(next_token());
    r.height = std::stoi(next_token());
    if (std::stoi(next_token()) != 255) throw InvalidArgument(path.string() + ": maxval must be 255");
  } catch (const std::logic_error&) {
    throw InvalidArgument(path.string() + ": malformed PPM header");
  }
  ++pos;  // single whitespace before the raster
  const std::size_t n = std::size_t(r.width) * std::size_t(r.height) * 3;
  if (r.width < 1 || r.height < 1 || bytes.size() < pos + n) {
    throw InvalidArgument(path.string() + ": truncated PPM");
  }
  r.rgb.assign(bytes.begin() + std::ptrdiff_t(pos), bytes.begin() + std::ptrdiff_t(pos + n));
  return r;
}

Raster read_image(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
    return read_ppm(path);
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw InvalidArgument(path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Raster r;
  r.width = int(png.width);
  r.height = int(png.height);
  r.rgb.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, r.rgb.data(), 0, nullptr)) {
    throw InvalidArgument(path.string() + ": " + png.message);
  }
  return r;
}

double mean_abs_difference(const Raster& a, const Raster& b) {
  if (a.width != b.width || a.height != b.height || a.rgb.size() != b.rgb.size() || a.rgb.empty()) {
    throw InvalidArgument("images differ in size or are not decoded");
  }
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    total += std::uint64_t(std::abs(int(a.rgb[i]) - int(b.rgb[i])));
  }
  return double(total) / (255.0 * double(a.rgb.size()));
}

double rmse(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) throw InvalidArgument("image sizes differ");
  return std::sqrt((a.pixels - b.pixels).square().mean());
}

}  // namespace gtt
