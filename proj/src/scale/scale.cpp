#include "gtt/scale.hpp"

#include <cmath>

#include "gtt/errors.hpp"

namespace gtt {

std::uint64_t required_parallelism(const WorkloadMeasurement& measurement,
                                   const TargetInteractivity& target) {
  const double spf = measurement.seconds_per_frame;
  const double fps = target.frames_per_second;
  if (!(spf > 0.0) || !std::isfinite(spf)) throw InvalidArgument("seconds per frame must be > 0");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw InvalidArgument("frames per second must be > 0");
  const double product = spf * fps;
  const double nearest = std::round(product);
  const double n = std::abs(product - nearest) <= 1e-9 * std::max(1.0, product) ? nearest : std::ceil(product);
  if (n >= 0x1.0p63) throw InvalidArgument("required processor count overflows");
  return std::max<std::uint64_t>(1, std::uint64_t(n));
}

ScaleEstimate turing_scale(std::uint64_t n, const CpuDescriptor& per_cpu, double efficiency) {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidArgument("efficiency must lie in (0, 1]");
  if (n < 1) throw InvalidArgument("processor count must be >= 1");
  validate(per_cpu);
  ScaleEstimate e;
  e.n_processors = n;
  e.peak_tflops = double(n) * per_cpu.gflops / 1000.0;
  e.sustained_tflops = e.peak_tflops * efficiency;
  e.efficiency = efficiency;
  return e;
}

ScaleEstimate extrapolate(const WorkloadMeasurement& measurement, const TargetInteractivity& target,
                          double efficiency, const CpuDescriptor& per_cpu) {
  ScaleEstimate e = turing_scale(required_parallelism(measurement, target), per_cpu, efficiency);
  e.inputs = ScaleInputs{measurement, target, efficiency, per_cpu};
  return e;
}

ThresholdVerdict passes_threshold(const MachineCapacity& machine, const ScaleEstimate& required) {
  const double margin = machine.sustained_tflops - required.sustained_tflops;
  return {machine.sustained_tflops >= required.sustained_tflops, margin};
}

}  // namespace gtt
