#include "gtt/render.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>
#include <vector>

#include "gtt/errors.hpp"

namespace gtt {

std::optional<Hit> intersect(const Scene& scene, const Ray<double>& ray) {
  std::optional<Hit> best;
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& prim : scene.primitives) {
    if (const auto* s = std::get_if<Sphere>(&prim.shape)) {
      const auto t = intersect_sphere(ray, s->center, s->radius);
      if (t && *t < nearest) {
        nearest = *t;
        best = Hit{*t, (ray.at(*t) - s->center) / s->radius, prim.material};
      }
    } else {
      const auto& tri = std::get<Triangle>(prim.shape);
      const auto t = intersect_triangle(ray, tri.v0, tri.v1, tri.v2);
      if (t && *t < nearest) {
        nearest = *t;
        best = Hit{*t, (tri.v1 - tri.v0).cross(tri.v2 - tri.v0).normalized(), prim.material};
      }
    }
  }
  if (best) best->normal.normalize();
  return best;
}

Rgbd estimate_radiance(const Scene& scene, const Ray<double>& primary,
                       const RenderConfig& config, CounterRng& rng) {
  Rgbd radiance = Rgbd::Zero();
  Rgbd throughput = Rgbd::Ones();
  Ray<double> ray = primary;
  for (int depth = 1; depth <= config.max_path_depth; ++depth) {
    const auto hit = intersect(scene, ray);
    if (!hit) {
      radiance += throughput * scene.environment;
      break;
    }
    const Material& mat = scene.materials[hit->material];
    radiance += throughput * mat.emission;
    if (depth == config.max_path_depth) break;
    throughput *= mat.albedo;
    if ((throughput == 0.0).all()) break;
    // Two-sided shading: bounce on the side the ray came from.
    const Vector3d n = hit->normal.dot(ray.direction) < 0.0 ? hit->normal : Vector3d(-hit->normal);
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    ray = Ray<double>{ray.at(hit->distance), sample_cosine_hemisphere(n, u1, u2)};
  }
  return radiance;
}

Ray<double> camera_ray(const Camera& camera, double px, double py) {
  const Vector3d right = camera.forward.cross(camera.up);
  const double half_h = std::tan(0.5 * camera.vertical_fov);
  const double half_w = half_h * double(camera.width) / double(camera.height);
  const double sx = (2.0 * px / camera.width - 1.0) * half_w;
  const double sy = (1.0 - 2.0 * py / camera.height) * half_h;
  return Ray<double>{camera.position, (camera.forward + sx * right + sy * camera.up).normalized()};
}

RenderResult render(const Scene& scene, const Camera& camera_in, const RenderConfig& config,
                    unsigned workers) {
  validate(scene);
  validate(camera_in);
  validate(config);
  const Camera camera = orthonormalized(camera_in);
  const auto start = std::chrono::steady_clock::now();

  Image image(camera.width, camera.height);
  const int n = config.samples_per_pixel;
  const int strata_x = int(std::ceil(std::sqrt(double(n))));
  const int strata_y = (n + strata_x - 1) / strata_x;

  auto render_row = [&](int y) {
    for (int x = 0; x < camera.width; ++x) {
      Rgbd sum = Rgbd::Zero();
      for (int s = 0; s < n; ++s) {
        CounterRng rng(CounterRng::stream_key(config.rng_seed, std::uint64_t(x), std::uint64_t(y),
                                              std::uint64_t(s)));
        const double jx = rng.uniform();
        const double jy = rng.uniform();
        const double px = x + ((s % strata_x) + jx) / strata_x;
        const double py = y + ((s / strata_x) + jy) / strata_y;
        sum += estimate_radiance(scene, camera_ray(camera, px, py), config, rng);
      }
      image.pixel(x, y) = (sum / double(n)).transpose();
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, unsigned(camera.height));
  if (workers <= 1) {
    for (int y = 0; y < camera.height; ++y) render_row(y);
  } else {
    std::atomic<int> next_row{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int y = next_row++; y < camera.height; y = next_row++) render_row(y);
      });
    }
  }

  const auto stop = std::chrono::steady_clock::now();
  return {std::move(image), std::chrono::duration<double>(stop - start).count()};
}

void validate(const CpuDescriptor& cpu) {
  if (!(cpu.clock_ghz > 0.0) || !std::isfinite(cpu.clock_ghz)) {
    throw InvalidArgument("CPU clock must be > 0 GHz");
  }
  if (!(cpu.gflops > 0.0) || !std::isfinite(cpu.gflops)) {
    throw InvalidArgument("CPU GFlops must be > 0");
  }
}

double median(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

FrameTiming measure_frame_time(const std::function<double()>& timed_frame, int repetitions,
                               const CpuDescriptor& reference) {
  if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  validate(reference);
  std::vector<double> times;
  times.reserve(std::size_t(repetitions));
  for (int i = 0; i < repetitions; ++i) times.push_back(timed_frame());
  return {median(times), reference};
}

FrameTiming measure_frame_time(const Scene& scene, const Camera& camera,
                               const RenderConfig& config, int repetitions,
                               const CpuDescriptor& reference) {
  return measure_frame_time(
      [&] { return render(scene, camera, config, 1).wall_seconds; }, repetitions, reference);
}

}  // namespace gtt
