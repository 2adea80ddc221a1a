#pragma once

#include <cstdint>
#include <optional>

#include "gtt/render.hpp"

namespace gtt {

struct WorkloadMeasurement {
  double seconds_per_frame = 0.0;
  CpuDescriptor reference;
};

struct TargetInteractivity {
  double frames_per_second = 30.0;
};

inline constexpr double kDefaultEfficiency = 0.5;

struct ScaleInputs {
  WorkloadMeasurement measurement;
  TargetInteractivity target;
  double efficiency = kDefaultEfficiency;
  CpuDescriptor per_cpu;
};

/// Compute needed for interactive rendering of the measured workload.
struct ScaleEstimate {
  std::uint64_t n_processors = 1;
  double peak_tflops = 0.0;
  double sustained_tflops = 0.0;
  double efficiency = 1.0;
  std::optional<ScaleInputs> inputs;  // set by extrapolate()
};

/// ceil(seconds_per_frame * fps). Products within 1e-9 relative of an
/// integer are taken as that integer so that e.g. (1/30 s, 30 fps) is 1.
std::uint64_t required_parallelism(const WorkloadMeasurement& measurement,
                                   const TargetInteractivity& target);

/// peak = n * gflops / 1000, sustained = peak * efficiency.
ScaleEstimate turing_scale(std::uint64_t n, const CpuDescriptor& per_cpu, double efficiency);

ScaleEstimate extrapolate(const WorkloadMeasurement& measurement,
                          const TargetInteractivity& target, double efficiency,
                          const CpuDescriptor& per_cpu);

struct MachineCapacity {
  double peak_tflops = 0.0;
  double sustained_tflops = 0.0;
};

struct ThresholdVerdict {
  bool pass = false;
  double margin_tflops = 0.0;  // machine sustained minus required sustained
};

ThresholdVerdict passes_threshold(const MachineCapacity& machine, const ScaleEstimate& required);

}  // namespace gtt
