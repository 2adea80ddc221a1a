#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "gtt/cli.hpp"
#include "gtt/errors.hpp"
#include "gtt/image_io.hpp"
#include "gtt/manifest.hpp"
#include "gtt/report.hpp"
#include "gtt/service.hpp"
#include "gtt/session_log.hpp"

#include <httplib.h>

using namespace gtt;
using nlohmann::json;

namespace {

const std::filesystem::path kData = GTT_TEST_DATA_DIR;
const std::filesystem::path kPool = kData / "pool" / "manifest.json";

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gtt_harness_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string last_line(const std::string& text) {
  auto end = text.find_last_not_of('\n');
  auto start = text.rfind('\n', end);
  return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

// Anything that would tell the subject which answer is right.
void check_no_leak(const json& j) {
  static const std::set<std::string> forbidden = {"kind", "label", "stimulus_id", "provenance", "truth", "image"};
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      CHECK_MESSAGE(!forbidden.count(key), "leaked key " << key);
      check_no_leak(value);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) check_no_leak(v);
  } else if (j.is_string()) {
    const auto s = j.get<std::string>();
    CHECK(s != "real");
    CHECK(s != "synthetic");
    CHECK(s.find("real_") == std::string::npos);
    CHECK(s.find("synth_") == std::string::npos);
  }
}

struct Server {
  HttpService service;
  int port;
  httplib::Client client;

  explicit Server(const ServiceConfig& cfg) : service(cfg), port(service.start()), client("127.0.0.1", port) {}

  std::pair<int, json> get(const std::string& path) {
    auto r = client.Get(path);
    REQUIRE(r);
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }
  std::pair<int, json> post(const std::string& path, const std::string& body) {
    auto r = client.Post(path, body, "application/json");
    REQUIRE(r);
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }
};

ServiceConfig config_for(const std::filesystem::path& log_dir, std::uint64_t seed = 5) {
  ServiceConfig cfg;
  cfg.port = 0;
  cfg.manifest = kPool;
  cfg.log_dir = log_dir;
  cfg.seed = seed;
  cfg.presets = std::filesystem::path(GTT_DATA_DIR) / "presets.json";
  return cfg;
}

std::string trial_path(const std::string& id, std::size_t k) {
  return "/api/session/" + id + "/trial/" + std::to_string(k);
}

}  // namespace

TEST_SUITE("manifest") {
  TEST_CASE("fixture pool loads") {
    const auto m = load_manifest(kPool);
    REQUIRE(m.entries.size() == 4);
    CHECK(m.entries[0].id == "real_a");
    CHECK(std::filesystem::exists(m.entries[0].image_path));
  }

  TEST_CASE("save and reload; duplicates and missing images are rejected") {
    const auto dir = fresh_dir("manifest");
    auto m = load_manifest(kPool);
    save_manifest(dir / "m.json", m);
    const auto again = load_manifest(dir / "m.json");
    REQUIRE(again.entries.size() == 4);
    CHECK(std::filesystem::equivalent(again.entries[3].image_path, m.entries[3].image_path));

    m.entries.push_back(m.entries[0]);
    save_manifest(dir / "dup.json", m);
    CHECK_THROWS_AS(load_manifest(dir / "dup.json"), InvalidArgument);
    m.entries.pop_back();
    m.entries[1].image_path = dir / "missing.ppm";
    save_manifest(dir / "missing.json", m);
    CHECK_THROWS_AS(load_manifest(dir / "missing.json"), InvalidArgument);
    CHECK_THROWS_AS(load_manifest(dir / "nope.json"), InvalidArgument);
  }
}

TEST_SUITE("session log") {
  TEST_CASE("recorded fixture replays") {
    const auto sessions = replay_log(kData / "recorded_sessions.jsonl");
    REQUIRE(sessions.size() == 2);
    const auto& a = sessions[0];
    CHECK(a.record.status == SessionStatus::complete);
    REQUIRE(a.logged_result);
    const auto recomputed = evaluate(a.record, a.truth, a.alpha);
    CHECK(recomputed == *a.logged_result);
    CHECK(recomputed.k_correct == 3);
    CHECK(recomputed.p_value == 0.3125);
    CHECK(recomputed.verdict == Verdict::passed);
    const auto& b = sessions[1];
    CHECK(b.record.status == SessionStatus::open);
    CHECK(b.record.responses.size() == 6);
    CHECK_FALSE(b.logged_result);
  }

  TEST_CASE("missing log is empty, malformed log is an error") {
    const auto dir = fresh_dir("log_errors");
    CHECK(replay_log(dir / "none.jsonl").empty());
    std::ofstream(dir / "bad.jsonl") << R"({"format_version":1,"event":"response","session_id":"x","trial_index":0,"choice":"real","timestamp_ms":0})"
                                     << "\n";
    CHECK_THROWS_AS(replay_log(dir / "bad.jsonl"), InvalidArgument);
    std::ofstream(dir / "version.jsonl") << R"({"format_version":7,"event":"plan_created","session_id":"x"})" << "\n";
    CHECK_THROWS_AS(replay_log(dir / "version.jsonl"), InvalidArgument);
    CHECK(resolve_log_path(dir) == dir / kSessionLogFile);
  }

  TEST_CASE("torn final record is dropped") {
    const auto dir = fresh_dir("torn");
    std::filesystem::copy_file(kData / "recorded_sessions.jsonl", dir / kSessionLogFile);
    std::ofstream(dir / kSessionLogFile, std::ios::app) << R"({"format_version":1,"event":"resp)";
    CHECK(replay_log(dir / kSessionLogFile).size() == 2);
    SessionService svc(load_manifest(kPool).entries, dir, 0.05, 8, 1);
    svc.respond("gtt-00000000000000b2", 6, Choice::real);
    const auto replayed = replay_log(dir / kSessionLogFile);
    CHECK(replayed[1].record.responses.size() == 7);
  }
}

TEST_SUITE("service") {
  TEST_CASE("restart continues recorded sessions") {
    const auto dir = fresh_dir("restart_fixture");
    std::filesystem::copy_file(kData / "recorded_sessions.jsonl", dir / kSessionLogFile);
    SessionService svc(load_manifest(kPool).entries, dir, 0.05, 8, 1);
    CHECK(svc.session_count() == 2);
    CHECK(svc.result("gtt-00000000000000a1")["p_value"] == 0.3125);
    CHECK_THROWS_AS(svc.result("gtt-00000000000000b2"), StateError);
    CHECK(svc.session_status("gtt-00000000000000b2")["answered"].size() == 6);
  }

  TEST_CASE("HTTP happy path") {
    const auto dir = fresh_dir("http_happy");
    Server s(config_for(dir));
    auto [code, created] = s.post("/api/session", R"({"n": 4})");
    CHECK(code == 201);
    check_no_leak(created);
    const std::string id = created["session_id"];
    CHECK(created["n"] == 4);

    auto [scode, status] = s.get("/api/session/" + id);
    CHECK(scode == 200);
    CHECK(status["status"] == "open");
    CHECK(status["answered"].empty());

    for (std::size_t k = 0; k < 4; ++k) {
      auto [tcode, trial] = s.get(trial_path(id, k));
      CHECK(tcode == 200);
      check_no_leak(trial);
      CHECK(trial["trial_index"] == k);
      auto img = s.client.Get(trial["image_url"].get<std::string>());
      REQUIRE(img);
      CHECK(img->status == 200);
      CHECK(img->body.substr(0, 2) == "P6");
      auto [rcode, ack] = s.post(trial_path(id, k) + "/response", R"({"choice": "real"})");
      CHECK(rcode == 200);
      CHECK(ack["accepted"] == true);
      check_no_leak(ack);
      if (k < 3) {
        auto [pcode, pending] = s.get("/api/session/" + id + "/result");
        CHECK(pcode == 409);
      }
    }
    auto [rcode, result] = s.get("/api/session/" + id + "/result");
    CHECK(rcode == 200);
    CHECK(result["n"] == 4);
    CHECK(result["k_correct"] == 2);  // balanced plan, always "real"
    CHECK(result["verdict"] == "PASSED");
    auto [lcode, list] = s.get("/api/sessions");
    CHECK(lcode == 200);
    REQUIRE(list.size() == 1);
    CHECK(list[0]["status"] == "complete");
    auto [pcode, presets] = s.get("/api/presets");
    CHECK(pcode == 200);
    CHECK(presets.size() == 6);
  }

  TEST_CASE("HTTP error statuses") {
    const auto dir = fresh_dir("http_errors");
    Server s(config_for(dir));
    const std::string id = s.post("/api/session", R"({"n": 2})").second["session_id"];
    CHECK(s.post(trial_path(id, 0) + "/response", R"({"choice": "real"})").first == 200);
    CHECK(s.post(trial_path(id, 0) + "/response", R"({"choice": "synthetic"})").first == 409);
    CHECK(s.post(trial_path(id, 1) + "/response", R"({"choice": "maybe"})").first == 400);
    CHECK(s.post(trial_path(id, 1) + "/response", R"({"answer": "real"})").first == 400);
    CHECK(s.post(trial_path(id, 1) + "/response", "not json").first == 400);
    CHECK(s.post(trial_path(id, 5) + "/response", R"({"choice": "real"})").first == 400);
    CHECK(s.get(trial_path(id, 5)).first == 404);
    CHECK(s.get("/api/session/gtt-nope").first == 404);
    CHECK(s.get(trial_path("gtt-nope", 0)).first == 404);
    CHECK(s.post(trial_path("gtt-nope", 0) + "/response", R"({"choice": "real"})").first == 404);
    CHECK(s.post("/api/session", R"({"n": 0})").first == 400);
    CHECK(s.post("/api/session", R"({"n": "ten"})").first == 400);
    CHECK(s.post("/api/session", "[").first == 400);
    CHECK(s.post(trial_path(id, 1) + "/response", R"({"choice": "real"})").first == 200);
    CHECK(s.post(trial_path(id, 1) + "/response", R"({"choice": "real"})").first == 409);
    CHECK(s.post("/api/session", "").first == 201);
  }

  TEST_CASE("crash and restart give the same result as an uninterrupted run") {
    const auto pool = load_manifest(kPool).entries;
    const auto dir = fresh_dir("crash");
    std::string id;
    std::vector<Choice> answers = {Choice::real,      Choice::synthetic, Choice::synthetic, Choice::real,
                                   Choice::synthetic, Choice::real,      Choice::real,      Choice::real};
    {
      auto first = std::make_unique<SessionService>(pool, dir, 0.05, 8, 77);
      id = first->create_session(std::nullopt)["session_id"];
      for (std::size_t k = 0; k < 5; ++k) first->respond(id, k, answers[k]);
      // Abandoned without shutdown.
      (void)first.release();
    }
    SessionService second(pool, dir, 0.05, 8, 78);
    CHECK(second.session_status(id)["answered"].size() == 5);
    CHECK_THROWS_AS(second.respond(id, 4, Choice::real), ConflictError);
    for (std::size_t k = 5; k < 8; ++k) second.respond(id, k, answers[k]);
    const auto replayed = replay_log(dir / kSessionLogFile);
    REQUIRE(replayed.size() == 1);
    CHECK(replayed[0].record.responses.size() == 8);
    REQUIRE(replayed[0].logged_result);
    CHECK(*replayed[0].logged_result == evaluate(replayed[0].record, replayed[0].truth, 0.05));
  }

  TEST_CASE("result after restart is byte-identical") {
    const auto pool = load_manifest(kPool).entries;
    const auto straight = fresh_dir("straight");
    const auto restarted = fresh_dir("restarted");
    const std::vector<Choice> answers = {Choice::real, Choice::synthetic, Choice::synthetic, Choice::real,
                                         Choice::synthetic, Choice::real, Choice::real, Choice::synthetic};
    std::string expected;
    {
      SessionService svc(pool, straight, 0.05, 8, 99);
      const std::string id = svc.create_session(std::nullopt)["session_id"];
      for (std::size_t k = 0; k < 8; ++k) svc.respond(id, k, answers[k]);
      expected = svc.result(id).dump();
    }
    std::string id;
    {
      SessionService svc(pool, restarted, 0.05, 8, 99);
      id = svc.create_session(std::nullopt)["session_id"];
      for (std::size_t k = 0; k < 3; ++k) svc.respond(id, k, answers[k]);
    }
    {
      SessionService svc(pool, restarted, 0.05, 8, 1234);
      CHECK_THROWS_AS(svc.respond(id, 2, answers[2]), ConflictError);
      for (std::size_t k = 3; k < 8; ++k) svc.respond(id, k, answers[k]);
      CHECK(svc.result(id).dump() == expected);
    }
    SessionService after(pool, restarted, 0.05, 8, 1);
    CHECK(after.result(id).dump() == expected);
    const auto replayed = replay_log(restarted / kSessionLogFile);
    REQUIRE(replayed.size() == 1);
    REQUIRE(replayed[0].logged_result);
    CHECK(to_json(*replayed[0].logged_result).dump() == expected);
  }

  TEST_CASE("static UI assets are served when configured") {
    const auto dir = fresh_dir("ui");
    std::filesystem::create_directories(dir / "ui");
    std::ofstream(dir / "ui" / "index.html") << "<html>ui</html>";
    auto cfg = config_for(dir / "logs");
    cfg.ui_dir = dir / "ui";
    Server s(cfg);
    auto r = s.client.Get("/index.html");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->body == "<html>ui</html>");
  }
}

TEST_SUITE("report") {
  TEST_CASE("performance records share one schema") {
    const CpuDescriptor ref{"reference", 2.4, 4.8};
    const json a = performance_record(extrapolate({7200.0, ref}, {30.0}, 0.5, ref));
    SystemArchetype arch;
    arch.name = "x";
    arch.node_count = 4;
    const auto job = decompose(4.0, 4, UniformSplit{});
    const json b = performance_record(arch, job, 1.0, simulate_frame(arch, job, 1.0));
    std::set<std::string> ka, kb;
    for (const auto& [k, v] : a.items()) ka.insert(k);
    for (const auto& [k, v] : b.items()) kb.insert(k);
    CHECK(ka == kb);
    CHECK(a["n_processors"] == 216000);
    CHECK(b["frame_time_s"] == 1.0);
  }

  TEST_CASE("test result round trip") {
    const TestResult r{64, 40, 0.03, 0.05, Verdict::failed};
    CHECK(test_result_from_json(to_json(r)) == r);
    auto bad = to_json(r);
    bad["verdict"] = "MAYBE";
    CHECK_THROWS_AS(test_result_from_json(bad), InvalidArgument);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("scale report") {
    auto r = cli({"scale"});
    CHECK(r.code == 0);
    CHECK(r.out.find("216000") != std::string::npos);
    CHECK(r.out.find("432000") != std::string::npos);
    const json record = json::parse(last_line(r.out));
    CHECK(record["n_processors"] == 216000);
    CHECK(record["peak_tflops"].get<double>() == doctest::Approx(1036.8));
    CHECK(record["sustained_tflops"].get<double>() == doctest::Approx(518.4));
    auto fast = cli({"scale", "--fps", "60", "--json"});
    CHECK(fast.code == 0);
    CHECK(json::parse(last_line(fast.out))["n_processors"] == 432000);
    CHECK(cli({"scale", "--seconds-per-frame", "-1"}).code == 1);
    CHECK(cli({"scale", "--efficiency", "0"}).code == 1);
  }

  TEST_CASE("usage errors") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"render"}).code == 1);
    CHECK(cli({"render", "--out", (fresh_dir("usage") / "x.ppm").string(), "--width", "0"}).code == 1);
    CHECK(cli({"simulate", "--preset", "NoSuchMachine"}).code == 1);
    CHECK(cli({"sweep", "--parameter", "color", "--grid", "1"}).code == 1);
    CHECK(cli({"--help"}).code == 0);
  }

  TEST_CASE("render, simulate and sweep") {
    const auto dir = fresh_dir("cli");
    auto r = cli({"render", "--preset", "cornell", "--width", "8", "--height", "6", "--spp", "2", "--out",
                  (dir / "c.ppm").string(), "--png", (dir / "c.png").string(), "--save-scene",
                  (dir / "c.json").string()});
    CHECK(r.code == 0);
    const Raster raster = read_ppm(dir / "c.ppm");
    CHECK(raster.width == 8);
    CHECK(raster.height == 6);
    CHECK(read_image(dir / "c.png").rgb == raster.rgb);
    CHECK(cli({"render", "--scene", (dir / "c.json").string(), "--spp", "2", "--out", (dir / "d.ppm").string()}).code == 0);
    std::ifstream a(dir / "c.ppm", std::ios::binary), b(dir / "d.ppm", std::ios::binary);
    CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));

    auto sim = cli({"simulate", "--preset", "BlueGeneL"});
    CHECK(sim.code == 0);
    const json rec = json::parse(last_line(sim.out));
    CHECK(rec["system"] == "BlueGeneL");
    CHECK(rec["efficiency"].get<double>() > 0.0);

    auto sw = cli({"sweep", "--preset", "Cluster-256GPU", "--parameter", "latency", "--grid", "0,0.001,0.01",
                   "--out", (dir / "s.csv").string()});
    CHECK(sw.code == 0);
    std::ifstream csv(dir / "s.csv");
    int lines = 0;
    for (std::string line; std::getline(csv, line);) ++lines;
    CHECK(lines == 4);
  }

  TEST_CASE("analyze a recorded log") {
    auto r = cli({"analyze", (kData / "recorded_sessions.jsonl").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("gtt-00000000000000a1") != std::string::npos);
    CHECK(r.out.find("0.3125") != std::string::npos);
    CHECK(cli({"analyze", (fresh_dir("empty") / "none.jsonl").string()}).code == 1);
  }

  TEST_CASE("selftest end to end") {
    auto r = cli({"selftest", "--workdir", fresh_dir("selftest").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAILED") != std::string::npos);
  }
}
