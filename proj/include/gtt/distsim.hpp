#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gtt/scale.hpp"

namespace gtt {

/// A parallel machine as seen by the frame-rendering model.
struct SystemArchetype {
  std::string name;
  std::uint64_t node_count = 1;
  double gflops_per_node = 1.0;
  /// Rendering throughput multiplier over a CPU of the same GFlops (>= 1).
  double gpu_render_speedup = 1.0;
  double link_latency_s = 0.0;
  /// +infinity means transfers take no time beyond latency.
  double bandwidth_bytes_per_s = std::numeric_limits<double>::infinity();
  /// Batch-queued systems are not interactive.
  bool interactive = true;
  /// Scene distribution message each worker receives before computing.
  double geometry_bytes_per_worker = 0.0;

  // Catalog metadata. Not used by the frame model.
  std::optional<double> all_to_all_latency_s;
  std::optional<double> catalog_peak_tflops;
  std::optional<double> catalog_sustained_tflops;
  std::optional<std::pair<double, double>> physics_speedup;
  std::string notes;
};

void validate(const SystemArchetype& arch);

/// node_count * gflops_per_node / 1000.
double nominal_peak_tflops(const SystemArchetype& arch);

/// Peak counting the GPU render speedup: the denominator of the simulated
/// efficiency.
double effective_peak_tflops(const SystemArchetype& arch);

/// catalog sustained / catalog peak, when the catalog lists both.
std::optional<double> catalog_efficiency(const SystemArchetype& arch);

struct RenderJob {
  double total_work_s_ref = 0.0;  // single reference CPU seconds per frame
  std::size_t tile_count = 1;
  double bytes_per_tile_result = 0.0;
  std::vector<double> work_split;  // per-tile fractions, sum 1
};

void validate(const RenderJob& job);

struct UniformSplit {};
struct WeightedSplit {
  std::vector<double> fractions;
};
using SplitStrategy = std::variant<UniformSplit, WeightedSplit>;

RenderJob decompose(double job_work_s, std::size_t tile_count, const SplitStrategy& strategy,
                    double bytes_per_tile_result = 0.0);

enum class EventKind {
  geometry_received,
  compute_start,
  compute_end,
  result_arrived,
  receive_start,
  receive_end,
};

const char* to_string(EventKind kind);

struct SimEvent {
  double time = 0.0;
  std::uint64_t worker = 0;
  EventKind kind = EventKind::compute_start;
  std::size_t tile = 0;

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

struct SimResult {
  double frame_time_s = 0.0;
  double achieved_fps = 0.0;
  double peak_tflops = 0.0;
  double sustained_tflops = 0.0;
  double efficiency = 0.0;
  double busy_compute_s = 0.0;  // summed over workers
  std::uint64_t workers_used = 0;
  std::vector<SimEvent> event_log;
};

struct SimOptions {
  bool record_events = true;
};

/// Simulates one frame: tiles are dealt round-robin to min(nodes, tiles)
/// workers, each result message reaches the master after the link latency
/// and is then ingested serially (FIFO by arrival, ties by worker index) for
/// bytes / bandwidth seconds. The frame ends when the last ingestion ends.
SimResult simulate_frame(const SystemArchetype& arch, const RenderJob& job, double ref_gflops,
                         const SimOptions& options = {});

enum class SweepParameter { latency, node_count, tile_count };

SweepParameter parse_sweep_parameter(const std::string& name);
const char* to_string(SweepParameter p);

struct SweepRow {
  double value = 0.0;
  std::variant<SimResult, std::string> outcome;  // result or error message
};

/// One row per grid point; an invalid grid value yields an error row and the
/// sweep continues. Empty grid throws.
std::vector<SweepRow> sweep(const SystemArchetype& arch, const RenderJob& job, double ref_gflops,
                            SweepParameter parameter, const std::vector<double>& grid);

/// Header: parameter,frame_time_s,achieved_fps,peak_tflops,sustained_tflops,efficiency.
/// Error rows carry the parameter value and empty fields.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct GtsReport {
  bool pass = false;
  double target_fps = 30.0;
  std::vector<std::string> reasons;  // one per failed condition
};

/// Passes when the simulated frame rate meets the target recorded in
/// `required` (30 fps if it carries no inputs) on an interactive system.
GtsReport gts_verdict(const SystemArchetype& arch, const ScaleEstimate& required, const SimResult& sim);

/// Archetype catalog stored as a JSON document (data/presets.json).
std::vector<SystemArchetype> load_catalog(const std::filesystem::path& path);
const SystemArchetype& find_archetype(const std::vector<SystemArchetype>& catalog,
                                      const std::string& name);

}  // namespace gtt
