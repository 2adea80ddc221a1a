#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <thread>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtt/protocol.hpp"
#include "gtt/session_log.hpp"

namespace httplib {
class Server;
}

namespace gtt {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path manifest;
  std::filesystem::path log_dir;
  double alpha = kDefaultAlpha;
  std::size_t default_n = kDefaultTrialCount;
  std::filesystem::path ui_dir;  // optional static assets
  std::filesystem::path presets;  // optional archetype catalog
  /// Fixes session seeds for reproducible tests; random when unset.
  std::optional<std::uint64_t> seed;
};

/// Test sessions behind the HTTP API. State of record is the session log:
/// construction replays it, and every mutation is logged before it is
/// applied and acknowledged. Subject-facing payloads never carry a stimulus
/// kind or id.
class SessionService {
 public:
  SessionService(std::vector<Stimulus> pool, std::filesystem::path log_dir, double alpha,
                 std::size_t default_n, std::optional<std::uint64_t> seed = std::nullopt);

  /// {session_id, n}
  nlohmann::json create_session(std::optional<std::size_t> n);
  /// {session_id, n, answered: [trial_index...], status}
  nlohmann::json session_status(const std::string& id) const;
  /// {trial_index, n, image_url}
  nlohmann::json trial(const std::string& id, std::size_t k) const;
  /// {accepted: true}
  nlohmann::json respond(const std::string& id, std::size_t k, Choice choice);
  /// TestResult JSON; StateError until the session is complete.
  nlohmann::json result(const std::string& id) const;
  /// [{session_id, n, answered, status, result?}]
  nlohmann::json list_sessions() const;

  std::filesystem::path trial_image(const std::string& id, std::size_t k) const;
  std::size_t session_count() const;

 private:
  struct Entry {
    mutable std::mutex mutex;
    SessionRecord record;
    std::vector<StimulusKind> truth;
    double alpha = kDefaultAlpha;
  };

  Entry& entry(const std::string& id) const;

  std::vector<Stimulus> pool_;
  double alpha_;
  std::size_t default_n_;
  SessionLog log_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
  std::vector<std::string> order_;
  std::mutex seed_mutex_;
  std::mt19937_64 seed_source_;
};

/// HTTP front end. `start` binds and serves on a background thread.
class HttpService {
 public:
  explicit HttpService(const ServiceConfig& config);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Returns the bound port.
  int start();
  /// Blocks serving on the calling thread.
  void run();
  void stop();

  SessionService& sessions() { return *sessions_; }

 private:
  void install_routes();

  ServiceConfig config_;
  std::unique_ptr<SessionService> sessions_;
  nlohmann::json presets_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

/// Log directory from GTT_LOG_DIR when set, else `fallback`.
std::filesystem::path log_dir_from_env(const std::filesystem::path& fallback);

}  // namespace gtt
