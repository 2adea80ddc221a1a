#include "gtt/service.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include "gtt/distsim.hpp"
#include "gtt/errors.hpp"
#include "gtt/manifest.hpp"
#include "gtt/report.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that clashes with Eigen internals.
#include <httplib.h>

namespace gtt {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxTrials = 10000;

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::vector<StimulusKind> truth_for(const TrialPlan& plan, std::span<const Stimulus> pool) {
  std::vector<StimulusKind> truth;
  truth.reserve(plan.n);
  for (const auto& t : plan.trials) truth.push_back(find_stimulus(pool, t.stimulus_id).kind);
  return truth;
}

}  // namespace

std::filesystem::path log_dir_from_env(const std::filesystem::path& fallback) {
  if (const char* dir = std::getenv("GTT_LOG_DIR"); dir && *dir) return dir;
  return fallback;
}

SessionService::SessionService(std::vector<Stimulus> pool, std::filesystem::path log_dir, double alpha,
                               std::size_t default_n, std::optional<std::uint64_t> seed)
    : pool_(std::move(pool)),
      alpha_(alpha),
      default_n_(default_n),
      log_(std::move(log_dir) / kSessionLogFile),
      seed_source_(seed ? *seed : std::random_device{}()) {
  if (!(alpha_ > 0.0 && alpha_ < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (default_n_ < 1 || default_n_ > kMaxTrials) throw InvalidArgument("default trial count out of range");
  for (auto& s : replay_log(log_.path())) {
    auto e = std::make_unique<Entry>();
    const std::string id = s.record.plan.session_id;
    e->record = std::move(s.record);
    e->truth = std::move(s.truth);
    e->alpha = s.alpha;
    order_.push_back(id);
    sessions_.emplace(id, std::move(e));
  }
}

SessionService::Entry& SessionService::entry(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return *it->second;
}

json SessionService::create_session(std::optional<std::size_t> n_opt) {
  const std::size_t n = n_opt.value_or(default_n_);
  if (n < 1 || n > kMaxTrials) throw InvalidArgument("n must lie in [1, " + std::to_string(kMaxTrials) + "]");
  std::unique_lock lock(sessions_mutex_);
  TrialPlan plan;
  do {
    std::uint64_t seed;
    {
      std::lock_guard seed_lock(seed_mutex_);
      seed = seed_source_();
    }
    plan = plan_trials(pool_, n, seed);
  } while (sessions_.count(plan.session_id));

  auto e = std::make_unique<Entry>();
  e->truth = truth_for(plan, pool_);
  e->alpha = alpha_;
  log_.append(plan_created_event(plan, e->truth, alpha_, now_ms()));
  const std::string id = plan.session_id;
  e->record = open_session(std::move(plan));
  order_.push_back(id);
  sessions_.emplace(id, std::move(e));
  return {{"session_id", id}, {"n", n}};
}

json SessionService::session_status(const std::string& id) const {
  Entry& e = entry(id);
  std::lock_guard lock(e.mutex);
  json answered = json::array();
  for (const auto& r : e.record.responses) answered.push_back(r.trial_index);
  return {{"session_id", id},
          {"n", e.record.plan.n},
          {"answered", std::move(answered)},
          {"status", e.record.status == SessionStatus::complete ? "complete" : "open"}};
}

json SessionService::trial(const std::string& id, std::size_t k) const {
  Entry& e = entry(id);
  std::lock_guard lock(e.mutex);
  if (k >= e.record.plan.n) throw NotFound("trial " + std::to_string(k) + " does not exist");
  return {{"trial_index", k},
          {"n", e.record.plan.n},
          {"image_url", "/api/session/" + id + "/trial/" + std::to_string(k) + "/image"}};
}

std::filesystem::path SessionService::trial_image(const std::string& id, std::size_t k) const {
  Entry& e = entry(id);
  std::lock_guard lock(e.mutex);
  if (k >= e.record.plan.n) throw NotFound("trial " + std::to_string(k) + " does not exist");
  return find_stimulus(pool_, e.record.plan.trials[k].stimulus_id).image_path;
}

json SessionService::respond(const std::string& id, std::size_t k, Choice choice) {
  Entry& e = entry(id);
  std::lock_guard lock(e.mutex);
  const std::int64_t ts = now_ms();
  SessionRecord next = record_response(e.record, k, choice, ts);
  log_.append(response_event(id, next.responses.back()));
  e.record = std::move(next);
  if (e.record.status == SessionStatus::complete) {
    log_.append(evaluation_event(id, evaluate(e.record, e.truth, e.alpha)));
  }
  return {{"accepted", true}};
}

json SessionService::result(const std::string& id) const {
  Entry& e = entry(id);
  std::lock_guard lock(e.mutex);
  return to_json(evaluate(e.record, e.truth, e.alpha));
}

json SessionService::list_sessions() const {
  std::shared_lock lock(sessions_mutex_);
  json rows = json::array();
  for (const auto& id : order_) {
    const Entry& e = *sessions_.at(id);
    std::lock_guard entry_lock(e.mutex);
    const bool complete = e.record.status == SessionStatus::complete;
    json row = {{"session_id", id},
                {"n", e.record.plan.n},
                {"answered", e.record.responses.size()},
                {"status", complete ? "complete" : "open"}};
    if (complete) row["result"] = to_json(evaluate(e.record, e.truth, e.alpha));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t SessionService::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

HttpService::HttpService(const ServiceConfig& config) : config_(config), server_(std::make_unique<httplib::Server>()) {
  auto manifest = load_manifest(config.manifest);
  sessions_ = std::make_unique<SessionService>(std::move(manifest.entries), config.log_dir, config.alpha,
                                               config.default_n, config.seed);
  presets_ = json::array();
  if (!config.presets.empty()) {
    for (const auto& a : load_catalog(config.presets)) presets_.push_back(to_json(a));
  }
  install_routes();
}

HttpService::~HttpService() { stop(); }

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
auto guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const NotFound& e) {
      send_json(res, {{"error", e.what()}}, 404);
    } catch (const ConflictError& e) {
      send_json(res, {{"error", e.what()}}, 409);
    } catch (const StateError& e) {
      send_json(res, {{"error", e.what()}}, 409);
    } catch (const InvalidArgument& e) {
      send_json(res, {{"error", e.what()}}, 400);
    } catch (const json::exception& e) {
      send_json(res, {{"error", std::string("malformed body: ") + e.what()}}, 400);
    } catch (const std::exception& e) {
      send_json(res, {{"error", e.what()}}, 500);
    }
  };
}

std::size_t index_param(const std::string& text) {
  try {
    return std::stoul(text);
  } catch (const std::exception&) {
    throw NotFound("bad trial index");
  }
}

std::string mime_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

}  // namespace

void HttpService::install_routes() {
  auto& srv = *server_;
  srv.Post("/api/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
             std::optional<std::size_t> n;
             if (!req.body.empty()) {
               const json body = json::parse(req.body);
               if (!body.is_object()) throw InvalidArgument("body must be a JSON object");
               if (body.contains("n") && !body["n"].is_null()) {
                 if (!body["n"].is_number_integer() || body["n"].get<long long>() < 1) {
                   throw InvalidArgument("n must be a positive integer");
                 }
                 n = body["n"].get<std::size_t>();
               }
             }
             send_json(res, sessions_->create_session(n), 201);
           }));
  srv.Get("/api/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, sessions_->list_sessions());
          }));
  srv.Get(R"(/api/session/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, sessions_->session_status(req.matches[1]));
          }));
  srv.Get(R"(/api/session/([^/]+)/trial/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, sessions_->trial(req.matches[1], index_param(req.matches[2])));
          }));
  srv.Get(R"(/api/session/([^/]+)/trial/(\d+)/image)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto path = sessions_->trial_image(req.matches[1], index_param(req.matches[2]));
            std::ifstream in(path, std::ios::binary);
            if (!in) throw std::runtime_error("stimulus image unreadable");
            std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            res.set_header("Cache-Control", "no-store");
            res.set_content(std::move(bytes), mime_for(path));
          }));
  srv.Post(R"(/api/session/([^/]+)/trial/(\d+)/response)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const json body = json::parse(req.body);
             if (!body.is_object() || !body.contains("choice") || !body["choice"].is_string()) {
               throw InvalidArgument("body must be {\"choice\": \"real\" | \"synthetic\"}");
             }
             send_json(res, sessions_->respond(req.matches[1], index_param(req.matches[2]),
                                               parse_kind(body["choice"].get<std::string>())));
           }));
  srv.Get(R"(/api/session/([^/]+)/result)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, sessions_->result(req.matches[1]));
          }));
  srv.Get("/api/presets", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, presets_);
          }));
  if (!config_.ui_dir.empty() && std::filesystem::is_directory(config_.ui_dir)) {
    srv.set_mount_point("/", config_.ui_dir.string());
  }
}

int HttpService::start() {
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
  } else {
    port_ = server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (port_ < 0) throw InvalidArgument("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void HttpService::run() {
  if (!server_->listen(config_.host, config_.port)) {
    throw InvalidArgument("cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  }
}

void HttpService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace gtt
