#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtt/protocol.hpp"

namespace gtt {

inline constexpr int kSessionLogFormatVersion = 1;
inline constexpr const char* kSessionLogFile = "sessions.jsonl";

/// Append-only JSON-lines event log. Every record carries "format_version",
/// "event" and "session_id":
///   plan_created: seed, n, alpha, timestamp_ms,
///                 trials: [{trial_index, stimulus_id, kind}]
///   response:     trial_index, choice, timestamp_ms
///   evaluation:   result: {n, k_correct, p_value, alpha, verdict}
/// `append` returns only after the line is flushed and fsync'ed.
class SessionLog {
 public:
  explicit SessionLog(std::filesystem::path path);
  ~SessionLog();
  SessionLog(const SessionLog&) = delete;
  SessionLog& operator=(const SessionLog&) = delete;

  void append(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::mutex mutex_;
};

nlohmann::json plan_created_event(const TrialPlan& plan, std::span<const StimulusKind> truth, double alpha,
                                  std::int64_t timestamp_ms);
nlohmann::json response_event(const std::string& session_id, const Response& response);
nlohmann::json evaluation_event(const std::string& session_id, const TestResult& result);

/// Session state rebuilt from a log.
struct ReplayedSession {
  SessionRecord record;
  std::vector<StimulusKind> truth;  // by trial index
  double alpha = kDefaultAlpha;
  std::optional<TestResult> logged_result;
};

/// Ordered by first appearance in the log. Throws InvalidArgument on a
/// malformed or inconsistent log. A missing file yields no sessions.
std::vector<ReplayedSession> replay_log(const std::filesystem::path& path);

/// `path` if it is a file, else `path / kSessionLogFile`.
std::filesystem::path resolve_log_path(const std::filesystem::path& path);

}  // namespace gtt
