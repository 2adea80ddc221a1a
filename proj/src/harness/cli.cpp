#include "gtt/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "gtt/distsim.hpp"
#include "gtt/errors.hpp"
#include "gtt/image_io.hpp"
#include "gtt/manifest.hpp"
#include "gtt/protocol.hpp"
#include "gtt/render.hpp"
#include "gtt/report.hpp"
#include "gtt/scale.hpp"
#include "gtt/scene_io.hpp"
#include "gtt/service.hpp"
#include "gtt/session_log.hpp"

#ifndef GTT_DEFAULT_PRESETS
#define GTT_DEFAULT_PRESETS "data/presets.json"
#endif

namespace gtt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int precision = 10) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

fs::path default_presets() {
  if (const char* p = std::getenv("GTT_PRESETS"); p && *p) return p;
  return GTT_DEFAULT_PRESETS;
}

struct SceneOptions {
  std::string scene_path;
  std::string preset = "cornell";
  std::optional<int> width;
  std::optional<int> height;
  int spp = 16;
  int depth = 8;
  std::uint64_t seed = 1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--scene", scene_path, "Scene document (JSON)");
    cmd.add_option("--preset", preset, "Built-in scene when --scene is absent")
        ->check(CLI::IsMember({"cornell", "furnace"}))
        ->capture_default_str();
    cmd.add_option("--width", width, "Override image width");
    cmd.add_option("--height", height, "Override image height");
    cmd.add_option("--spp", spp, "Samples per pixel")->capture_default_str();
    cmd.add_option("--depth", depth, "Maximum path depth (surface hits)")->capture_default_str();
    cmd.add_option("--seed", seed, "RNG seed")->capture_default_str();
  }

  Scene scene() const {
    Scene s = !scene_path.empty() ? load_scene(scene_path)
              : preset == "furnace" ? presets::white_furnace()
                                    : presets::cornell_box();
    if (width) s.camera.width = *width;
    if (height) s.camera.height = *height;
    return s;
  }

  RenderConfig config() const { return {spp, depth, seed}; }
};

struct CpuOptions {
  std::string name = "Pentium IV";
  double clock_ghz = 2.4;
  double gflops = 4.8;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--cpu-name", name, "Reference CPU name")->capture_default_str();
    cmd.add_option("--clock-ghz", clock_ghz, "Reference CPU clock (GHz)")->capture_default_str();
    cmd.add_option("--gflops", gflops, "Reference CPU GFlops (2 flops/cycle at 2.4 GHz = 4.8)")
        ->capture_default_str();
  }

  CpuDescriptor cpu() const { return {name, clock_ghz, gflops}; }
};

void print_scale_report(std::ostream& out, const ScaleEstimate& e, const std::vector<SystemArchetype>& catalog) {
  const auto& in = *e.inputs;
  out << "Interactive rendering scale\n"
      << "  frame time on reference CPU : " << fmt(in.measurement.seconds_per_frame) << " s ("
      << in.per_cpu.name << ", " << fmt(in.per_cpu.clock_ghz) << " GHz, " << fmt(in.per_cpu.gflops) << " GFlops)\n"
      << "  target interactivity        : " << fmt(in.target.frames_per_second) << " fps\n"
      << "  processors required         : " << e.n_processors << "\n"
      << "  peak                        : " << fmt(e.peak_tflops) << " TFlops\n"
      << "  sustained (efficiency " << fmt(e.efficiency) << ")  : " << fmt(e.sustained_tflops) << " TFlops\n"
      << "  processor count readings    : " << e.n_processors << " equivalent CPUs at full efficiency; "
      << fmt(std::ceil(double(e.n_processors) / e.efficiency)) << " CPUs if each runs at efficiency "
      << fmt(e.efficiency) << "\n";
  if (catalog.empty()) return;
  out << "  archetype comparison (sustained vs required " << fmt(e.sustained_tflops) << " TFlops):\n";
  for (const auto& a : catalog) {
    MachineCapacity m;
    m.peak_tflops = a.catalog_peak_tflops.value_or(nominal_peak_tflops(a));
    m.sustained_tflops = a.catalog_sustained_tflops.value_or(m.peak_tflops * e.efficiency);
    const auto v = passes_threshold(m, e);
    out << "    " << std::left << std::setw(16) << a.name << std::right << " peak " << std::setw(10)
        << fmt(m.peak_tflops) << "  sustained " << std::setw(10) << fmt(m.sustained_tflops)
        << (a.catalog_sustained_tflops ? " (listed)" : " (at efficiency)") << "  " << (v.pass ? "pass" : "fail")
        << "  margin " << fmt(v.margin_tflops) << " TFlops" << (a.interactive ? "" : "  [not interactive]") << "\n";
    if (a.name == "BlueGeneL" && !v.pass) {
      out << "      note: BlueGeneL is commonly described as sufficient, but its listed sustained rate is "
             "below this requirement.\n";
    }
  }
}

int cmd_render(const SceneOptions& so, const std::string& out_path, const std::string& png_path,
               const std::string& save_scene_path, unsigned workers, std::ostream& out) {
  const Scene scene = so.scene();
  if (!save_scene_path.empty()) save_scene(save_scene_path, scene);
  const auto result = render(scene, scene.camera, so.config(), workers);
  write_ppm(out_path, result.image);
  if (!png_path.empty()) write_png(png_path, result.image);
  out << "wrote " << out_path << " (" << result.image.width << "x" << result.image.height << ", "
      << so.spp << " spp) in " << fmt(result.wall_seconds, 4) << " s\n";
  return 0;
}

SimResult run_simulation(const SystemArchetype& arch, const RenderJob& job, double ref_gflops) {
  return simulate_frame(arch, job, ref_gflops, SimOptions{.record_events = true});
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("grid value '" + item + "' is not a number");
    }
  }
  if (grid.empty()) throw InvalidArgument("grid is empty");
  return grid;
}

struct SimOptionsCli {
  std::string presets;
  std::string preset = "BlueGeneL";
  double work_seconds = 7200.0;
  std::size_t tiles = 0;
  double bytes_per_tile = 12288.0;
  double ref_gflops = 4.8;
  double fps = 30.0;
  double efficiency = kDefaultEfficiency;
  std::optional<double> latency;
  std::optional<double> bandwidth;
  std::optional<std::uint64_t> nodes;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--presets", presets, "Archetype catalog (JSON); default: shipped catalog or $GTT_PRESETS");
    cmd.add_option("--preset", preset, "Archetype name")->capture_default_str();
    cmd.add_option("--work-seconds", work_seconds, "Single reference-CPU seconds per frame")->capture_default_str();
    cmd.add_option("--tiles", tiles, "Tile count (default: one per node)");
    cmd.add_option("--bytes-per-tile", bytes_per_tile, "Result bytes sent per tile")->capture_default_str();
    cmd.add_option("--ref-gflops", ref_gflops, "GFlops of the reference CPU")->capture_default_str();
    cmd.add_option("--fps", fps, "Target frames per second")->capture_default_str();
    cmd.add_option("--efficiency", efficiency, "Efficiency for the required-scale estimate")->capture_default_str();
    cmd.add_option("--latency", latency, "Override link latency (s)");
    cmd.add_option("--bandwidth", bandwidth, "Override bandwidth (bytes/s)");
    cmd.add_option("--nodes", nodes, "Override node count");
  }

  std::vector<SystemArchetype> catalog() const { return load_catalog(presets.empty() ? default_presets() : fs::path(presets)); }

  SystemArchetype archetype() const {
    SystemArchetype a = find_archetype(catalog(), preset);
    if (latency) a.link_latency_s = *latency;
    if (bandwidth) a.bandwidth_bytes_per_s = *bandwidth;
    if (nodes) a.node_count = *nodes;
    return a;
  }

  RenderJob job(const SystemArchetype& a) const {
    const std::size_t t = tiles > 0 ? tiles : std::size_t(std::min<std::uint64_t>(a.node_count, 1u << 24));
    return decompose(work_seconds, t, UniformSplit{}, bytes_per_tile);
  }
};

int cmd_simulate(const SimOptionsCli& o, std::size_t show_events, std::ostream& out) {
  const SystemArchetype arch = o.archetype();
  const RenderJob job = o.job(arch);
  const SimResult sim = run_simulation(arch, job, o.ref_gflops);
  const ScaleEstimate required = extrapolate({o.work_seconds, {"reference", 2.4, o.ref_gflops}}, {o.fps},
                                             o.efficiency, {"reference", 2.4, o.ref_gflops});
  const GtsReport verdict = gts_verdict(arch, required, sim);
  out << "Simulated frame on " << arch.name << " (" << arch.node_count << " nodes x " << fmt(arch.gflops_per_node)
      << " GFlops, render speedup " << fmt(arch.gpu_render_speedup) << ")\n"
      << "  tiles / workers      : " << job.tile_count << " / " << sim.workers_used << "\n"
      << "  frame time           : " << fmt(sim.frame_time_s) << " s\n"
      << "  achieved fps         : " << fmt(sim.achieved_fps) << "\n"
      << "  peak                 : " << fmt(sim.peak_tflops) << " TFlops\n"
      << "  sustained            : " << fmt(sim.sustained_tflops) << " TFlops\n"
      << "  efficiency           : " << fmt(sim.efficiency) << "\n";
  if (const auto eps = catalog_efficiency(arch)) out << "  listed efficiency    : " << fmt(*eps, 4) << "\n";
  out << "  interactive test     : " << (verdict.pass ? "pass" : "fail") << " (target " << fmt(verdict.target_fps)
      << " fps)\n";
  for (const auto& r : verdict.reasons) out << "    - " << r << "\n";
  for (std::size_t i = 0; i < std::min(show_events, sim.event_log.size()); ++i) {
    const auto& e = sim.event_log[i];
    out << "  event t=" << fmt(e.time) << " worker=" << e.worker << " " << to_string(e.kind) << " tile=" << e.tile
        << "\n";
  }
  json record = performance_record(arch, job, o.ref_gflops, sim);
  record["gts_verdict"] = to_json(verdict);
  out << record.dump() << "\n";
  return 0;
}

int cmd_analyze(const fs::path& log_arg, std::ostream& out, std::ostream& err) {
  const fs::path path = resolve_log_path(log_arg);
  const auto sessions = replay_log(path);
  if (sessions.empty()) {
    err << "no sessions in " << path.string() << "\n";
    return 1;
  }
  std::size_t complete = 0;
  for (const auto& s : sessions) {
    json row = {{"session_id", s.record.plan.session_id}, {"answered", s.record.responses.size()}, {"n", s.record.plan.n}};
    if (s.record.status == SessionStatus::complete) {
      ++complete;
      const TestResult r = evaluate(s.record, s.truth, s.alpha);
      row["result"] = to_json(r);
      if (s.logged_result && !(*s.logged_result == r)) row["logged_result_mismatch"] = true;
    } else {
      row["status"] = "incomplete";
    }
    out << row.dump() << "\n";
  }
  out << "# " << sessions.size() << " session(s), " << complete << " complete. " << kPassCaveat << "\n";
  return 0;
}

struct SelftestOptions {
  std::string workdir;
  std::optional<double> accuracy;
  std::size_t seeds = 50;
  std::size_t n = 0;
  double alpha = kDefaultAlpha;
  double threshold = 0.15;
};

int selftest_calibration(const SelftestOptions& o, std::ostream& out) {
  const double q = *o.accuracy;
  const std::size_t n = o.n > 0 ? o.n : kDefaultTrialCount;
  const std::vector<Stimulus> pool = {{"real-0", StimulusKind::real, "real-0.ppm", "placeholder", {}},
                                      {"synthetic-0", StimulusKind::synthetic, "synthetic-0.ppm", "placeholder", {}}};
  std::size_t passed = 0;
  for (std::size_t s = 0; s < o.seeds; ++s) {
    const TrialPlan plan = plan_trials(pool, n, s);
    const SessionRecord rec = simulate_subject({AccuracyObserver{q}, 0xC0FFEEULL + s}, plan, pool);
    if (evaluate(rec, pool, o.alpha).verdict == Verdict::passed) ++passed;
  }
  const std::uint64_t k_crit = critical_k(n, o.alpha);
  // P(K < k_crit) under accuracy q, as an upper tail of the error count.
  const double expected_pass = k_crit > n ? 1.0 : q == 1.0 ? 0.0 : q == 0.0 ? 1.0 : binomial_p_value(n, n - k_crit + 1, 1.0 - q);
  json summary = {{"observer_accuracy", q},
                  {"n", n},
                  {"seeds", o.seeds},
                  {"alpha", o.alpha},
                  {"passed", passed},
                  {"passed_fraction", double(passed) / double(o.seeds)},
                  {"expected_passed_fraction", expected_pass}};
  out << "selftest calibration: " << passed << "/" << o.seeds << " sessions PASSED (fraction "
      << fmt(double(passed) / double(o.seeds), 4) << ", exact expectation " << fmt(expected_pass, 4) << ")\n"
      << summary.dump() << "\n";
  return 0;
}

int selftest_end_to_end(const SelftestOptions& o, std::ostream& out) {
  fs::path dir = o.workdir;
  if (dir.empty()) {
    dir = fs::temp_directory_path() /
          ("gtt-selftest-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  }
  fs::create_directories(dir);
  const std::size_t n = o.n > 0 ? o.n : 8;

  // The "real" stimulus stands in for a photograph: a converged render
  // compared against an independent converged render of the same scene.
  const Scene scene = presets::cornell_box(32, 32);
  const auto reference = render(scene, scene.camera, {256, 8, 101});
  const auto real = render(scene, scene.camera, {256, 8, 202});
  const auto synthetic = render(scene, scene.camera, {4, 8, 303});
  write_ppm(dir / "reference.ppm", reference.image);
  write_ppm(dir / "real.ppm", real.image);
  write_ppm(dir / "synthetic.ppm", synthetic.image);
  write_png(dir / "real.png", real.image);
  write_png(dir / "synthetic.png", synthetic.image);

  StimulusManifest manifest;
  manifest.root = dir;
  manifest.entries = {
      {"stimulus-a", StimulusKind::real, dir / "real.ppm", "converged render, 256 spp", dir / "reference.ppm"},
      {"stimulus-b", StimulusKind::synthetic, dir / "synthetic.ppm", "noisy render, 4 spp", dir / "reference.ppm"},
  };
  for (const auto& s : manifest.entries) validate(s);
  save_manifest(dir / "manifest.json", manifest);

  const fs::path log_path = dir / kSessionLogFile;
  fs::remove(log_path);
  TestResult live;
  std::string session_id;
  {
    SessionLog log(log_path);
    const TrialPlan plan = plan_trials(manifest.entries, n, 0x5E1F7E57ULL);
    session_id = plan.session_id;
    std::vector<StimulusKind> truth;
    for (const auto& t : plan.trials) truth.push_back(find_stimulus(manifest.entries, t.stimulus_id).kind);
    log.append(plan_created_event(plan, truth, o.alpha, 0));
    const SessionRecord rec =
        simulate_subject({ThresholdObserver{o.threshold}, 7}, plan, manifest.entries, 1'000);
    for (const auto& r : rec.responses) log.append(response_event(plan.session_id, r));
    live = evaluate(rec, manifest.entries, o.alpha);
    log.append(evaluation_event(plan.session_id, live));
  }

  const auto replayed = replay_log(log_path);
  if (replayed.size() != 1 || replayed.front().record.plan.session_id != session_id) {
    throw std::runtime_error("selftest: replay did not recover the session");
  }
  const auto& rs = replayed.front();
  const TestResult again = evaluate(rs.record, rs.truth, rs.alpha);
  const std::string live_bytes = to_json(live).dump();
  const std::string replay_bytes = to_json(again).dump();
  const bool identical = live_bytes == replay_bytes && rs.logged_result && to_json(*rs.logged_result).dump() == live_bytes;

  const double d_real = mean_abs_difference(read_ppm(dir / "real.ppm"), read_ppm(dir / "reference.ppm"));
  const double d_synth = mean_abs_difference(read_ppm(dir / "synthetic.ppm"), read_ppm(dir / "reference.ppm"));
  out << "selftest end-to-end in " << dir.string() << "\n"
      << "  stimuli: real (diff to reference " << fmt(d_real, 4) << "), synthetic (diff " << fmt(d_synth, 4)
      << "), observer threshold " << fmt(o.threshold, 4) << "\n"
      << "  session " << session_id << ": " << live.k_correct << "/" << live.n << " correct, p = " << fmt(live.p_value)
      << ", verdict " << to_string(live.verdict) << "\n";
  if (live.verdict == Verdict::passed) out << "  " << kPassCaveat << "\n";
  out << "  result: " << live_bytes << "\n"
      << "  replay: " << (identical ? "identical" : "MISMATCH " + replay_bytes) << "\n";
  return identical ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Render, measure, scale, simulate and run real-vs-synthetic discrimination tests",
               "gtt"};
  app.require_subcommand(1);

  // render
  SceneOptions render_scene;
  std::string render_out, render_png, render_save_scene;
  unsigned render_workers = 0;
  auto* render_cmd = app.add_subcommand("render", "Path-trace a scene to a PPM (and optionally PNG)");
  render_scene.add_to(*render_cmd);
  render_cmd->add_option("--out", render_out, "Output PPM path")->required();
  render_cmd->add_option("--png", render_png, "Also write a PNG");
  render_cmd->add_option("--save-scene", render_save_scene, "Write the scene document used");
  render_cmd->add_option("--workers", render_workers, "Worker threads (0 = all cores)")->capture_default_str();

  // measure
  SceneOptions measure_scene;
  CpuOptions measure_cpu;
  int repetitions = 3;
  double measure_fps = 30.0, measure_eff = kDefaultEfficiency;
  auto* measure_cmd = app.add_subcommand("measure", "Median single-worker frame time, then extrapolate the scale");
  measure_scene.add_to(*measure_cmd);
  measure_cpu.add_to(*measure_cmd);
  measure_cmd->add_option("--repetitions", repetitions, "Timed renders")->capture_default_str();
  measure_cmd->add_option("--fps", measure_fps, "Target frames per second")->capture_default_str();
  measure_cmd->add_option("--efficiency", measure_eff, "Efficiency for sustained TFlops")->capture_default_str();

  // scale
  double spf = 7200.0, fps = 30.0, efficiency = kDefaultEfficiency;
  CpuOptions scale_cpu;
  std::string scale_presets;
  bool scale_json_only = false;
  auto* scale_cmd = app.add_subcommand("scale", "Processor count and TFlops needed for interactive rendering");
  scale_cmd->add_option("--seconds-per-frame", spf, "Measured seconds per frame on the reference CPU")
      ->capture_default_str();
  scale_cmd->add_option("--fps", fps, "Target frames per second")->capture_default_str();
  scale_cpu.add_to(*scale_cmd);
  scale_cmd->add_option("--efficiency", efficiency, "Sustained/peak efficiency in (0,1]")->capture_default_str();
  scale_cmd->add_option("--presets", scale_presets, "Archetype catalog to compare against");
  scale_cmd->add_flag("--json", scale_json_only, "Print only the machine-readable record");

  // simulate
  SimOptionsCli sim_opts;
  std::size_t show_events = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate one parallel frame on a system archetype");
  sim_opts.add_to(*sim_cmd);
  sim_cmd->add_option("--events", show_events, "Print the first N events of the log");

  // sweep
  SimOptionsCli sweep_opts;
  std::string sweep_param = "latency", sweep_grid, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Efficiency table over a parameter grid (CSV)");
  sweep_opts.add_to(*sweep_cmd);
  sweep_cmd->add_option("--parameter", sweep_param, "latency | node_count | tile_count")->capture_default_str();
  sweep_cmd->add_option("--grid", sweep_grid, "Comma-separated values")->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: stdout)");

  // serve
  ServiceConfig serve;
  std::string serve_log_dir;
  std::optional<std::uint64_t> serve_seed;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP service for live test sessions");
  serve_cmd->add_option("--manifest", serve.manifest, "Stimulus manifest (JSON)")->required();
  serve_cmd->add_option("--log-dir", serve_log_dir, "Session log directory (default: $GTT_LOG_DIR or ./sessions)");
  serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "Port")->capture_default_str();
  serve_cmd->add_option("--alpha", serve.alpha, "Significance level")->capture_default_str();
  serve_cmd->add_option("--n", serve.default_n, "Default trials per session")->capture_default_str();
  serve_cmd->add_option("--ui-dir", serve.ui_dir, "Static UI assets to serve at /");
  serve_cmd->add_option("--presets", serve.presets, "Archetype catalog for /api/presets");
  serve_cmd->add_option("--seed", serve_seed, "Fix session seeds (testing)");

  // analyze
  std::string analyze_log;
  auto* analyze_cmd = app.add_subcommand("analyze", "Recompute test results from a session log");
  analyze_cmd->add_option("log", analyze_log, "Log file or directory (default: $GTT_LOG_DIR or ./sessions)");

  // selftest
  SelftestOptions st;
  auto* selftest_cmd = app.add_subcommand("selftest", "Simulated-observer end-to-end run or calibration");
  selftest_cmd->add_option("--workdir", st.workdir, "Directory for stimuli and the log");
  selftest_cmd->add_option("--observer-accuracy", st.accuracy, "Run calibration with this per-trial accuracy");
  selftest_cmd->add_option("--seeds", st.seeds, "Calibration sessions")->capture_default_str();
  selftest_cmd->add_option("--n", st.n, "Trials per session (8 end-to-end, 64 calibration)");
  selftest_cmd->add_option("--alpha", st.alpha, "Significance level")->capture_default_str();
  selftest_cmd->add_option("--threshold", st.threshold, "Threshold observer difference")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }

  try {
    if (render_cmd->parsed()) return cmd_render(render_scene, render_out, render_png, render_save_scene, render_workers, out);

    if (measure_cmd->parsed()) {
      const Scene scene = measure_scene.scene();
      const FrameTiming t =
          measure_frame_time(scene, scene.camera, measure_scene.config(), repetitions, measure_cpu.cpu());
      const ScaleEstimate e = extrapolate({t.seconds_per_frame, t.reference}, {measure_fps}, measure_eff, t.reference);
      out << "median frame time: " << fmt(t.seconds_per_frame, 6) << " s over " << repetitions << " run(s)\n";
      print_scale_report(out, e, {});
      json record = performance_record(e);
      record["reference_descriptor"] = {{"name", t.reference.name}, {"clock_ghz", t.reference.clock_ghz}, {"gflops", t.reference.gflops}};
      out << record.dump() << "\n";
      return 0;
    }

    if (scale_cmd->parsed()) {
      const CpuDescriptor cpu = scale_cpu.cpu();
      const ScaleEstimate e = extrapolate({spf, cpu}, {fps}, efficiency, cpu);
      if (!scale_json_only) {
        std::vector<SystemArchetype> catalog;
        const fs::path catalog_path = scale_presets.empty() ? default_presets() : fs::path(scale_presets);
        if (fs::exists(catalog_path)) catalog = load_catalog(catalog_path);
        print_scale_report(out, e, catalog);
      }
      out << performance_record(e).dump() << "\n";
      return 0;
    }

    if (sim_cmd->parsed()) return cmd_simulate(sim_opts, show_events, out);

    if (sweep_cmd->parsed()) {
      const SystemArchetype arch = sweep_opts.archetype();
      const auto rows = sweep(arch, sweep_opts.job(arch), sweep_opts.ref_gflops, parse_sweep_parameter(sweep_param),
                              parse_grid(sweep_grid));
      for (const auto& r : rows) {
        if (const auto* msg = std::get_if<std::string>(&r.outcome)) err << "row " << fmt(r.value) << ": " << *msg << "\n";
      }
      if (sweep_out.empty()) {
        write_sweep_csv(out, rows);
      } else {
        std::ofstream f(sweep_out, std::ios::trunc);
        if (!f) throw InvalidArgument("cannot write " + sweep_out);
        write_sweep_csv(f, rows);
        out << "wrote " << sweep_out << "\n";
      }
      return 0;
    }

    if (serve_cmd->parsed()) {
      serve.log_dir = serve_log_dir.empty() ? log_dir_from_env("sessions") : fs::path(serve_log_dir);
      serve.seed = serve_seed;
      if (serve.presets.empty() && fs::exists(default_presets())) serve.presets = default_presets();
      HttpService service(serve);
      out << "serving on http://" << serve.host << ":" << serve.port << " (log " << serve.log_dir.string() << ", "
          << service.sessions().session_count() << " session(s) replayed)" << std::endl;
      service.run();
      return 0;
    }

    if (analyze_cmd->parsed()) {
      return cmd_analyze(analyze_log.empty() ? log_dir_from_env("sessions") : fs::path(analyze_log), out, err);
    }

    if (selftest_cmd->parsed()) {
      return st.accuracy ? selftest_calibration(st, out) : selftest_end_to_end(st, out);
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NotFound& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace gtt
