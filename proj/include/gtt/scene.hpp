#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gtt/algebra.hpp"

namespace gtt {

/// Lambertian surface. Albedo in [0,1] per channel; emission is radiance.
struct Material {
  std::string name;
  Rgbd albedo = Rgbd::Zero();
  Rgbd emission = Rgbd::Zero();
};

struct Sphere {
  Vector3d center = Vector3d::Zero();
  double radius = 1.0;
};

struct Triangle {
  Vector3d v0 = Vector3d::Zero();
  Vector3d v1 = Vector3d::UnitX();
  Vector3d v2 = Vector3d::UnitY();
};

struct Primitive {
  std::variant<Sphere, Triangle> shape;
  std::size_t material = 0;
};

struct Camera {
  Vector3d position = Vector3d::Zero();
  Vector3d forward = -Vector3d::UnitZ();
  Vector3d up = Vector3d::UnitY();
  double vertical_fov = 0.8;  // radians
  int width = 64;
  int height = 64;
};

struct Scene {
  std::vector<Material> materials;
  std::vector<Primitive> primitives;
  Rgbd environment = Rgbd::Zero();
  Camera camera;
};

struct RenderConfig {
  int samples_per_pixel = 16;
  int max_path_depth = 8;
  std::uint64_t rng_seed = 0;
};

/// Linear-radiance framebuffer, row-major with y = 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  PixelArray<double> pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(PixelArray<double>::Zero(std::size_t(w) * h, 3)) {}

  auto pixel(int x, int y) { return pixels.row(std::ptrdiff_t(y) * width + x); }
  auto pixel(int x, int y) const { return pixels.row(std::ptrdiff_t(y) * width + x); }
};

/// Throws InvalidArgument describing the first violated invariant.
void validate(const Scene& scene);
void validate(const Camera& camera);
void validate(const RenderConfig& config);

/// Camera with forward normalized and up re-orthogonalized against it.
Camera orthonormalized(const Camera& camera);

namespace presets {

/// Closed white box with an open front, a ceiling light and two spheres.
Scene cornell_box(int width = 64, int height = 64);

/// Unit-albedo, non-emissive sphere filling most of the view, in a unit
/// environment. Every pixel's expected radiance is exactly 1.
Scene white_furnace(int width = 32, int height = 32);

/// Camera inside a closed sphere with albedo rho and emission (1 - rho).
/// With depth cutoff D the expected radiance is sum_{k=1..D} (1-rho) rho^(k-1).
Scene emissive_enclosure(double albedo, int width = 8, int height = 8);

}  // namespace presets

}  // namespace gtt
