#include "gtt/session_log.hpp"

#include <unistd.h>

#include <fstream>
#include <iterator>
#include <map>

#include "gtt/errors.hpp"
#include "gtt/report.hpp"

namespace gtt {

using nlohmann::json;

SessionLog::SessionLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  // A crash mid-append leaves an unterminated record that was never
  // acknowledged. Drop it so the next append starts on a fresh line.
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!text.empty() && text.back() != '\n') {
      const auto keep = text.rfind('\n');
      std::filesystem::resize_file(path_, keep == std::string::npos ? 0 : keep + 1);
    }
  }
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) throw InvalidArgument("cannot open session log " + path_.string() + " for appending");
}

SessionLog::~SessionLog() {
  if (file_) std::fclose(file_);
}

void SessionLog::append(const json& record) {
  const std::string line = record.dump() + "\n";
  std::lock_guard lock(mutex_);
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0 ||
      ::fsync(::fileno(file_)) != 0) {
    throw std::runtime_error("failed to append to session log " + path_.string());
  }
}

json plan_created_event(const TrialPlan& plan, std::span<const StimulusKind> truth, double alpha,
                        std::int64_t timestamp_ms) {
  json trials = json::array();
  for (const auto& t : plan.trials) {
    trials.push_back({{"trial_index", t.trial_index}, {"stimulus_id", t.stimulus_id}, {"kind", to_string(truth[t.trial_index])}});
  }
  return {{"format_version", kSessionLogFormatVersion},
          {"event", "plan_created"},
          {"session_id", plan.session_id},
          {"seed", plan.seed},
          {"n", plan.n},
          {"alpha", alpha},
          {"timestamp_ms", timestamp_ms},
          {"trials", std::move(trials)}};
}

json response_event(const std::string& session_id, const Response& r) {
  return {{"format_version", kSessionLogFormatVersion},
          {"event", "response"},
          {"session_id", session_id},
          {"trial_index", r.trial_index},
          {"choice", to_string(r.choice)},
          {"timestamp_ms", r.timestamp_ms}};
}

json evaluation_event(const std::string& session_id, const TestResult& result) {
  return {{"format_version", kSessionLogFormatVersion},
          {"event", "evaluation"},
          {"session_id", session_id},
          {"result", to_json(result)}};
}

std::vector<ReplayedSession> replay_log(const std::filesystem::path& path) {
  std::vector<ReplayedSession> sessions;
  std::ifstream in(path);
  if (!in) return sessions;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (in.eof() && !json::accept(line)) break;  // torn final append
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const json ev = json::parse(line);
      if (ev.at("format_version").get<int>() != kSessionLogFormatVersion) {
        throw InvalidArgument("unsupported log format_version");
      }
      const auto event = ev.at("event").get<std::string>();
      const auto id = ev.at("session_id").get<std::string>();
      if (event == "plan_created") {
        if (index.count(id)) throw InvalidArgument("session created twice");
        TrialPlan plan;
        plan.session_id = id;
        plan.seed = ev.at("seed").get<std::uint64_t>();
        plan.n = ev.at("n").get<std::size_t>();
        ReplayedSession s;
        s.alpha = ev.at("alpha").get<double>();
        s.truth.resize(plan.n);
        for (const auto& t : ev.at("trials")) {
          const auto k = t.at("trial_index").get<std::size_t>();
          if (k != plan.trials.size() || k >= plan.n) throw InvalidArgument("trials out of order");
          plan.trials.push_back({k, t.at("stimulus_id").get<std::string>()});
          s.truth[k] = parse_kind(t.at("kind").get<std::string>());
        }
        s.record = open_session(std::move(plan));
        index.emplace(id, sessions.size());
        sessions.push_back(std::move(s));
        continue;
      }
      const auto it = index.find(id);
      if (it == index.end()) throw InvalidArgument("event for unknown session " + id);
      ReplayedSession& s = sessions[it->second];
      if (event == "response") {
        s.record = record_response(std::move(s.record), ev.at("trial_index").get<std::size_t>(),
                                   parse_kind(ev.at("choice").get<std::string>()),
                                   ev.at("timestamp_ms").get<std::int64_t>());
      } else if (event == "evaluation") {
        s.logged_result = test_result_from_json(ev.at("result"));
      } else {
        throw InvalidArgument("unknown event '" + event + "'");
      }
    } catch (const json::exception& e) {
      throw InvalidArgument(where + e.what());
    } catch (const std::exception& e) {
      throw InvalidArgument(where + e.what());
    }
  }
  return sessions;
}

std::filesystem::path resolve_log_path(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return path / kSessionLogFile;
  return path;
}

}  // namespace gtt
