#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "gtt/geometry.hpp"
#include "gtt/rng.hpp"
#include "gtt/scene.hpp"

namespace gtt {

struct Hit {
  double distance = 0.0;
  Vector3d normal = Vector3d::UnitZ();  // unit, outward from the surface
  std::size_t material = 0;
};

/// Nearest hit farther than kHitEpsilon, or nothing.
std::optional<Hit> intersect(const Scene& scene, const Ray<double>& ray);

/// One-sample estimate of incoming radiance along `ray`.
///
/// Lambertian surfaces, cosine-weighted bounce sampling (path weight is
/// exactly the albedo) and a hard cutoff after `config.max_path_depth`
/// surface hits: the D-th hit contributes its emission and the path stops.
/// Rays that escape return the environment radiance.
Rgbd estimate_radiance(const Scene& scene, const Ray<double>& ray,
                       const RenderConfig& config, CounterRng& rng);

struct RenderResult {
  Image image;
  double wall_seconds = 0.0;
};

/// Renders with `workers` threads (0 picks hardware concurrency). Each pixel
/// sample draws from its own stream keyed by (seed, x, y, sample index), so
/// the image does not depend on the worker count.
RenderResult render(const Scene& scene, const Camera& camera,
                    const RenderConfig& config, unsigned workers = 0);

/// Primary ray through continuous film coordinates (px, py) in pixels.
Ray<double> camera_ray(const Camera& camera, double px, double py);

/// Reference processor the measured frame time is attributed to.
struct CpuDescriptor {
  std::string name = "reference";
  double clock_ghz = 2.4;
  double gflops = 4.8;
};

void validate(const CpuDescriptor& cpu);

struct FrameTiming {
  double seconds_per_frame = 0.0;
  CpuDescriptor reference;
};

/// Median; mean of the two middle values for even counts. Empty input throws.
double median(std::span<const double> values);

/// Median single-worker wall time over `repetitions` renders.
FrameTiming measure_frame_time(const Scene& scene, const Camera& camera,
                               const RenderConfig& config, int repetitions,
                               const CpuDescriptor& reference);

/// Same, with the timed action injected (used for deterministic tests).
FrameTiming measure_frame_time(const std::function<double()>& timed_frame,
                               int repetitions, const CpuDescriptor& reference);

}  // namespace gtt
