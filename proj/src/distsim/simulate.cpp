#include "gtt/distsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gtt/errors.hpp"

namespace gtt {

void validate(const SystemArchetype& arch) {
  if (arch.node_count < 1) throw InvalidArgument(arch.name + ": node count must be >= 1");
  if (!(arch.gflops_per_node > 0.0) || !std::isfinite(arch.gflops_per_node)) {
    throw InvalidArgument(arch.name + ": GFlops per node must be > 0");
  }
  if (!(arch.gpu_render_speedup >= 1.0) || !std::isfinite(arch.gpu_render_speedup)) {
    throw InvalidArgument(arch.name + ": GPU render speedup must be >= 1");
  }
  if (!(arch.link_latency_s >= 0.0) || !std::isfinite(arch.link_latency_s)) {
    throw InvalidArgument(arch.name + ": link latency must be >= 0");
  }
  if (!(arch.bandwidth_bytes_per_s > 0.0)) throw InvalidArgument(arch.name + ": bandwidth must be > 0");
  if (!(arch.geometry_bytes_per_worker >= 0.0) || !std::isfinite(arch.geometry_bytes_per_worker)) {
    throw InvalidArgument(arch.name + ": geometry bytes must be >= 0");
  }
}

double nominal_peak_tflops(const SystemArchetype& arch) {
  return double(arch.node_count) * arch.gflops_per_node / 1000.0;
}

double effective_peak_tflops(const SystemArchetype& arch) {
  return double(arch.node_count) * arch.gflops_per_node * arch.gpu_render_speedup / 1000.0;
}

std::optional<double> catalog_efficiency(const SystemArchetype& arch) {
  if (!arch.catalog_peak_tflops || !arch.catalog_sustained_tflops) return std::nullopt;
  return *arch.catalog_sustained_tflops / *arch.catalog_peak_tflops;
}

void validate(const RenderJob& job) {
  if (!(job.total_work_s_ref > 0.0) || !std::isfinite(job.total_work_s_ref)) {
    throw InvalidArgument("job work must be > 0 seconds");
  }
  if (job.tile_count < 1) throw InvalidArgument("tile count must be >= 1");
  if (job.work_split.size() != job.tile_count) throw InvalidArgument("work split size must equal tile count");
  if (!(job.bytes_per_tile_result >= 0.0) || !std::isfinite(job.bytes_per_tile_result)) {
    throw InvalidArgument("bytes per tile must be >= 0");
  }
  double sum = 0.0;
  for (double f : job.work_split) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw InvalidArgument("work fractions must be >= 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("work fractions must sum to 1");
}

RenderJob decompose(double job_work_s, std::size_t tile_count, const SplitStrategy& strategy,
                    double bytes_per_tile_result) {
  if (tile_count < 1) throw InvalidArgument("tile count must be >= 1");
  RenderJob job;
  job.total_work_s_ref = job_work_s;
  job.tile_count = tile_count;
  job.bytes_per_tile_result = bytes_per_tile_result;
  if (const auto* w = std::get_if<WeightedSplit>(&strategy)) {
    if (w->fractions.size() != tile_count) throw InvalidArgument("weighted split needs one fraction per tile");
    job.work_split = w->fractions;
  } else {
    job.work_split.assign(tile_count, 1.0 / double(tile_count));
  }
  validate(job);
  return job;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::geometry_received: return "geometry_received";
    case EventKind::compute_start: return "compute_start";
    case EventKind::compute_end: return "compute_end";
    case EventKind::result_arrived: return "result_arrived";
    case EventKind::receive_start: return "receive_start";
    case EventKind::receive_end: return "receive_end";
  }
  return "unknown";
}

SimResult simulate_frame(const SystemArchetype& arch, const RenderJob& job, double ref_gflops,
                         const SimOptions& options) {
  validate(arch);
  validate(job);
  if (!(ref_gflops > 0.0) || !std::isfinite(ref_gflops)) throw InvalidArgument("reference GFlops must be > 0");

  const std::uint64_t workers = std::min<std::uint64_t>(arch.node_count, job.tile_count);
  const double slowdown = ref_gflops / (arch.gflops_per_node * arch.gpu_render_speedup);
  const double ingest_s = job.bytes_per_tile_result / arch.bandwidth_bytes_per_s;

  SimResult result;
  result.workers_used = workers;
  std::vector<SimEvent> log;
  auto record = [&](double t, std::uint64_t w, EventKind k, std::size_t tile) {
    if (options.record_events) log.push_back({t, w, k, tile});
  };

  double ready = 0.0;
  if (arch.geometry_bytes_per_worker > 0.0) {
    ready = arch.link_latency_s + arch.geometry_bytes_per_worker / arch.bandwidth_bytes_per_s;
  }

  struct Message {
    double arrival;
    std::uint64_t worker;
    std::size_t tile;
  };
  std::vector<Message> messages;
  messages.reserve(job.tile_count);

  // Worker w owns tiles w, w + W, w + 2W, ... and computes them back to back;
  // sends are asynchronous.
  std::vector<double> clock(workers, ready);
  if (ready > 0.0) {
    for (std::uint64_t w = 0; w < workers; ++w) record(ready, w, EventKind::geometry_received, 0);
  }
  for (std::size_t tile = 0; tile < job.tile_count; ++tile) {
    const std::uint64_t w = tile % workers;
    const double duration = job.work_split[tile] * job.total_work_s_ref * slowdown;
    record(clock[w], w, EventKind::compute_start, tile);
    clock[w] += duration;
    result.busy_compute_s += duration;
    record(clock[w], w, EventKind::compute_end, tile);
    messages.push_back({clock[w] + arch.link_latency_s, w, tile});
  }

  std::stable_sort(messages.begin(), messages.end(), [](const Message& a, const Message& b) {
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    return a.worker < b.worker;
  });
  double master_free = 0.0;
  for (const auto& m : messages) {
    record(m.arrival, m.worker, EventKind::result_arrived, m.tile);
    const double start = std::max(m.arrival, master_free);
    record(start, m.worker, EventKind::receive_start, m.tile);
    master_free = start + ingest_s;
    record(master_free, m.worker, EventKind::receive_end, m.tile);
  }

  result.frame_time_s = master_free;
  result.achieved_fps = 1.0 / result.frame_time_s;
  result.peak_tflops = effective_peak_tflops(arch);
  result.sustained_tflops = (job.total_work_s_ref * ref_gflops / 1000.0) / result.frame_time_s;
  result.efficiency = std::min(1.0, result.sustained_tflops / result.peak_tflops);

  if (options.record_events) {
    std::stable_sort(log.begin(), log.end(), [](const SimEvent& a, const SimEvent& b) {
      if (a.time != b.time) return a.time < b.time;
      return a.worker < b.worker;
    });
    result.event_log = std::move(log);
  }
  return result;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "latency") return SweepParameter::latency;
  if (name == "node_count" || name == "nodes") return SweepParameter::node_count;
  if (name == "tile_count" || name == "tiles") return SweepParameter::tile_count;
  throw InvalidArgument("unknown sweep parameter '" + name + "' (latency, node_count, tile_count)");
}

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::latency: return "latency";
    case SweepParameter::node_count: return "node_count";
    case SweepParameter::tile_count: return "tile_count";
  }
  return "unknown";
}

namespace {

std::uint64_t as_count(double value) {
  if (!(value >= 1.0) || value != std::floor(value) || value > 0x1.0p62) {
    throw InvalidArgument("count must be a positive integer, got " + std::to_string(value));
  }
  return std::uint64_t(value);
}

}  // namespace

std::vector<SweepRow> sweep(const SystemArchetype& arch, const RenderJob& job, double ref_gflops,
                            SweepParameter parameter, const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double value : grid) {
    SweepRow row{value, std::string{}};
    try {
      SystemArchetype a = arch;
      RenderJob j = job;
      switch (parameter) {
        case SweepParameter::latency:
          a.link_latency_s = value;
          break;
        case SweepParameter::node_count:
          a.node_count = as_count(value);
          break;
        case SweepParameter::tile_count:
          j = decompose(job.total_work_s_ref, std::size_t(as_count(value)), UniformSplit{},
                        job.bytes_per_tile_result);
          break;
      }
      row.outcome = simulate_frame(a, j, ref_gflops, SimOptions{.record_events = false});
    } catch (const InvalidArgument& e) {
      row.outcome = std::string(e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  auto num = [](double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
  };
  out << "parameter,frame_time_s,achieved_fps,peak_tflops,sustained_tflops,efficiency\n";
  for (const auto& row : rows) {
    out << num(row.value);
    if (const auto* r = std::get_if<SimResult>(&row.outcome)) {
      out << ',' << num(r->frame_time_s) << ',' << num(r->achieved_fps) << ',' << num(r->peak_tflops) << ','
          << num(r->sustained_tflops) << ',' << num(r->efficiency);
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
}

GtsReport gts_verdict(const SystemArchetype& arch, const ScaleEstimate& required, const SimResult& sim) {
  GtsReport report;
  report.target_fps = required.inputs ? required.inputs->target.frames_per_second : 30.0;
  if (!arch.interactive) {
    report.reasons.push_back(arch.name + " is not interactive (batch-queued or render-farm operation)");
  }
  if (!(sim.achieved_fps >= report.target_fps)) {
    std::ostringstream ss;
    ss << "achieved " << sim.achieved_fps << " fps is below the target " << report.target_fps << " fps";
    report.reasons.push_back(ss.str());
  }
  report.pass = report.reasons.empty();
  return report;
}

}  // namespace gtt
