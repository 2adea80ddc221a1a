#include "gtt/scene.hpp"

#include <cmath>
#include <numbers>

#include "gtt/errors.hpp"

namespace gtt {

namespace {

bool finite_non_negative(const Rgbd& c) { return c.allFinite() && (c >= 0.0).all(); }

}  // namespace

void validate(const Scene& scene) {
  if (!finite_non_negative(scene.environment)) {
    throw InvalidArgument("environment radiance must be finite and non-negative");
  }
  for (const auto& m : scene.materials) {
    if (!m.albedo.allFinite() || (m.albedo < 0.0).any() || (m.albedo > 1.0).any()) {
      throw InvalidArgument("material '" + m.name + "': albedo must lie in [0, 1]");
    }
    if (!finite_non_negative(m.emission)) {
      throw InvalidArgument("material '" + m.name + "': emission must be finite and >= 0");
    }
  }
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const auto& p = scene.primitives[i];
    if (p.material >= scene.materials.size()) {
      throw InvalidArgument("primitive " + std::to_string(i) + ": unknown material");
    }
    if (const auto* s = std::get_if<Sphere>(&p.shape)) {
      if (!s->center.allFinite() || !(s->radius > 0.0) || !std::isfinite(s->radius)) {
        throw InvalidArgument("primitive " + std::to_string(i) + ": sphere radius must be > 0");
      }
    } else {
      const auto& t = std::get<Triangle>(p.shape);
      const Vector3d e1 = t.v1 - t.v0;
      const Vector3d e2 = t.v2 - t.v0;
      const double scale = e1.norm() * e2.norm();
      if (!t.v0.allFinite() || !t.v1.allFinite() || !t.v2.allFinite() ||
          !(e1.cross(e2).norm() > 1e-12 * scale) || scale == 0.0) {
        throw InvalidArgument("primitive " + std::to_string(i) + ": triangle is degenerate");
      }
    }
  }
  validate(scene.camera);
}

void validate(const Camera& camera) {
  if (camera.width < 1 || camera.height < 1) {
    throw InvalidArgument("camera resolution must be at least 1x1");
  }
  if (!(camera.vertical_fov > 0.0 && camera.vertical_fov < std::numbers::pi)) {
    throw InvalidArgument("vertical field of view must lie in (0, pi)");
  }
  if (!camera.position.allFinite() || !camera.forward.allFinite() || !camera.up.allFinite()) {
    throw InvalidArgument("camera vectors must be finite");
  }
  if (camera.forward.norm() == 0.0 || camera.forward.cross(camera.up).norm() < 1e-9 * camera.up.norm()) {
    throw InvalidArgument("camera forward and up must be non-zero and not parallel");
  }
}

void validate(const RenderConfig& config) {
  if (config.samples_per_pixel < 1) throw InvalidArgument("samples per pixel must be >= 1");
  if (config.max_path_depth < 1) throw InvalidArgument("max path depth must be >= 1");
}

Camera orthonormalized(const Camera& camera) {
  Camera c = camera;
  c.forward = camera.forward.normalized();
  c.up = (camera.up - camera.up.dot(c.forward) * c.forward).normalized();
  return c;
}

namespace presets {

namespace {

void add_quad(Scene& scene, const Vector3d& a, const Vector3d& b, const Vector3d& c,
              const Vector3d& d, std::size_t material) {
  scene.primitives.push_back({Triangle{a, b, c}, material});
  scene.primitives.push_back({Triangle{a, c, d}, material});
}

}  // namespace

Scene cornell_box(int width, int height) {
  Scene s;
  s.materials = {
      {"white", Rgbd(0.73, 0.73, 0.73), Rgbd::Zero()},
      {"red", Rgbd(0.63, 0.065, 0.05), Rgbd::Zero()},
      {"green", Rgbd(0.14, 0.45, 0.091), Rgbd::Zero()},
      {"light", Rgbd(0.78, 0.78, 0.78), Rgbd(15.0, 15.0, 15.0)},
  };
  constexpr std::size_t white = 0, red = 1, green = 2, light = 3;
  // Floor, ceiling, back wall.
  add_quad(s, {-1, -1, 1}, {1, -1, 1}, {1, -1, -1}, {-1, -1, -1}, white);
  add_quad(s, {-1, 1, 1}, {-1, 1, -1}, {1, 1, -1}, {1, 1, 1}, white);
  add_quad(s, {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1}, white);
  add_quad(s, {-1, -1, 1}, {-1, -1, -1}, {-1, 1, -1}, {-1, 1, 1}, red);
  add_quad(s, {1, -1, -1}, {1, -1, 1}, {1, 1, 1}, {1, 1, -1}, green);
  add_quad(s, {-0.3, 0.99, -0.3}, {0.3, 0.99, -0.3}, {0.3, 0.99, 0.3}, {-0.3, 0.99, 0.3}, light);
  s.primitives.push_back({Sphere{{-0.45, -0.6, -0.35}, 0.4}, white});
  s.primitives.push_back({Sphere{{0.45, -0.65, 0.25}, 0.35}, white});
  s.environment = Rgbd::Zero();
  s.camera.position = {0.0, 0.0, 3.4};
  s.camera.forward = -Vector3d::UnitZ();
  s.camera.up = Vector3d::UnitY();
  s.camera.vertical_fov = 45.0 * std::numbers::pi / 180.0;
  s.camera.width = width;
  s.camera.height = height;
  return s;
}

Scene white_furnace(int width, int height) {
  Scene s;
  s.materials = {{"unit", Rgbd::Ones(), Rgbd::Zero()}};
  s.primitives.push_back({Sphere{{0.0, 0.0, -3.0}, 1.4}, 0});
  s.environment = Rgbd::Ones();
  s.camera.position = Vector3d::Zero();
  s.camera.vertical_fov = 60.0 * std::numbers::pi / 180.0;
  s.camera.width = width;
  s.camera.height = height;
  return s;
}

Scene emissive_enclosure(double albedo, int width, int height) {
  Scene s;
  s.materials = {{"enclosure", Rgbd::Constant(albedo), Rgbd::Constant(1.0 - albedo)}};
  s.primitives.push_back({Sphere{Vector3d::Zero(), 1.0}, 0});
  s.environment = Rgbd::Zero();
  s.camera.position = Vector3d::Zero();
  s.camera.vertical_fov = 1.5;
  s.camera.width = width;
  s.camera.height = height;
  return s;
}

}  // namespace presets

}  // namespace gtt
