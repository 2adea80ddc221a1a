#pragma once

#include <json.hpp>

#include "gtt/distsim.hpp"
#include "gtt/protocol.hpp"
#include "gtt/scale.hpp"

namespace gtt {

/// Machine-readable performance record shared by `scale` and `simulate`:
/// {record, system, n_processors, frame_time_s, achieved_fps, peak_tflops,
///  sustained_tflops, efficiency, inputs}. Fields a producer does not know
/// are null.
nlohmann::json performance_record(const ScaleEstimate& estimate);
nlohmann::json performance_record(const SystemArchetype& arch, const RenderJob& job, double ref_gflops,
                                  const SimResult& sim);

nlohmann::json to_json(const TestResult& result);
TestResult test_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SystemArchetype& arch);
nlohmann::json to_json(const GtsReport& report);

}  // namespace gtt
