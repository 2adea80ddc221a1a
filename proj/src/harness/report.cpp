#include "gtt/report.hpp"

#include <cmath>

#include "gtt/errors.hpp"

namespace gtt {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json record_skeleton(const char* kind) {
  return json{{"record", kind},          {"system", nullptr},       {"n_processors", nullptr},
              {"frame_time_s", nullptr}, {"achieved_fps", nullptr}, {"peak_tflops", nullptr},
              {"sustained_tflops", nullptr}, {"efficiency", nullptr}, {"inputs", json::object()}};
}

}  // namespace

json performance_record(const ScaleEstimate& e) {
  json r = record_skeleton("scale");
  r["n_processors"] = e.n_processors;
  r["peak_tflops"] = e.peak_tflops;
  r["sustained_tflops"] = e.sustained_tflops;
  r["efficiency"] = e.efficiency;
  if (e.inputs) {
    const auto& in = *e.inputs;
    r["inputs"] = {{"seconds_per_frame", in.measurement.seconds_per_frame},
                   {"frames_per_second", in.target.frames_per_second},
                   {"efficiency", in.efficiency},
                   {"cpu", {{"name", in.per_cpu.name}, {"clock_ghz", in.per_cpu.clock_ghz}, {"gflops", in.per_cpu.gflops}}}};
    r["frame_time_s"] = 1.0 / in.target.frames_per_second;
    r["achieved_fps"] = in.target.frames_per_second;
  }
  return r;
}

json performance_record(const SystemArchetype& arch, const RenderJob& job, double ref_gflops, const SimResult& sim) {
  json r = record_skeleton("simulate");
  r["system"] = arch.name;
  r["n_processors"] = arch.node_count;
  r["frame_time_s"] = sim.frame_time_s;
  r["achieved_fps"] = sim.achieved_fps;
  r["peak_tflops"] = sim.peak_tflops;
  r["sustained_tflops"] = sim.sustained_tflops;
  r["efficiency"] = sim.efficiency;
  r["inputs"] = {{"total_work_s_ref", job.total_work_s_ref},
                 {"tile_count", job.tile_count},
                 {"bytes_per_tile_result", job.bytes_per_tile_result},
                 {"ref_gflops", ref_gflops},
                 {"workers_used", sim.workers_used},
                 {"link_latency_s", arch.link_latency_s},
                 {"bandwidth_bytes_per_s", finite_or_null(arch.bandwidth_bytes_per_s)}};
  return r;
}

json to_json(const TestResult& t) {
  return {{"n", t.n},
          {"k_correct", t.k_correct},
          {"p_value", t.p_value},
          {"alpha", t.alpha},
          {"verdict", to_string(t.verdict)}};
}

TestResult test_result_from_json(const json& j) {
  try {
    TestResult t;
    t.n = j.at("n").get<std::uint64_t>();
    t.k_correct = j.at("k_correct").get<std::uint64_t>();
    t.p_value = j.at("p_value").get<double>();
    t.alpha = j.at("alpha").get<double>();
    const auto v = j.at("verdict").get<std::string>();
    if (v != "PASSED" && v != "FAILED") throw InvalidArgument("verdict must be PASSED or FAILED");
    t.verdict = v == "PASSED" ? Verdict::passed : Verdict::failed;
    return t;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("test result: ") + e.what());
  }
}

json to_json(const SystemArchetype& a) {
  json j = {{"name", a.name},
            {"node_count", a.node_count},
            {"gflops_per_node", a.gflops_per_node},
            {"gpu_render_speedup", a.gpu_render_speedup},
            {"link_latency_s", a.link_latency_s},
            {"bandwidth_bytes_per_s", finite_or_null(a.bandwidth_bytes_per_s)},
            {"interactive", a.interactive},
            {"geometry_bytes_per_worker", a.geometry_bytes_per_worker},
            {"nominal_peak_tflops", nominal_peak_tflops(a)},
            {"notes", a.notes}};
  j["all_to_all_latency_s"] = a.all_to_all_latency_s ? json(*a.all_to_all_latency_s) : json(nullptr);
  j["peak_tflops"] = a.catalog_peak_tflops ? json(*a.catalog_peak_tflops) : json(nullptr);
  j["sustained_tflops"] = a.catalog_sustained_tflops ? json(*a.catalog_sustained_tflops) : json(nullptr);
  const auto eps = catalog_efficiency(a);
  j["catalog_efficiency"] = eps ? json(*eps) : json(nullptr);
  j["physics_speedup"] =
      a.physics_speedup ? json::array({a.physics_speedup->first, a.physics_speedup->second}) : json(nullptr);
  return j;
}

json to_json(const GtsReport& r) {
  return {{"verdict", r.pass ? "pass" : "fail"}, {"target_fps", r.target_fps}, {"reasons", r.reasons}};
}

}  // namespace gtt
