#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "inquire/errors.hpp"
#include "inquire/harness.hpp"
#include "inquire/household.hpp"
#include "inquire/oracle.hpp"
#include "inquire/tabletop.hpp"

namespace inquire {

inline constexpr int kWireVersion = 1;

enum class SessionMode { auto_oracle, human_oracle, human_agent };
std::string_view to_string(SessionMode m);
SessionMode parse_session_mode(std::string_view s);

// A failure with a stable wire code: UNKNOWN_SESSION, ANSWER_WITHOUT_QUESTION,
// WRONG_MODE, MALFORMED_ACTION, EPISODE_FINISHED, BAD_REQUEST.
class ServiceError : public Error {
 public:
  ServiceError(std::string code, int http_status, const std::string& message)
      : Error(message), code_(std::move(code)), status_(http_status) {}
  const std::string& code() const noexcept { return code_; }
  int http_status() const noexcept { return status_; }

 private:
  std::string code_;
  int status_;
};

struct SessionConfig {
  EnvKind env = EnvKind::household;
  Variant variant = Variant::standard;
  std::uint64_t seed = 0;
  std::string policy = "scripted-aba";  // ignored in human-agent mode
  SessionMode mode = SessionMode::auto_oracle;
  household::PoolId pool = household::PoolId::id_dist;
  TaskKind tabletop_task = TaskKind::tabletop1;
  tabletop::Params params{3, 3};
  int horizon = 50;
  int max_tasks = 0;

  static SessionConfig from_json(const nlohmann::json& j);  // throws ServiceError BAD_REQUEST
  nlohmann::json to_json() const;
};

// Sessions own one episode each. Events are JSON objects
//   {"cursor": k, "kind": "observation"|"think"|"ask"|"act"|"end", "step": t, "text": ...}
// with cursors 0, 1, 2, ... per session. Observations carry "source"
// (env, answer, ack). In human-oracle mode the episode parks right after an
// "ask" event until answer() supplies the reply.
class SessionManager {
 public:
  using Clock = std::chrono::steady_clock;

  explicit SessionManager(std::chrono::milliseconds idle_timeout = std::chrono::minutes(30));
  ~SessionManager();

  std::string create(const SessionConfig& config);

  // Events with cursor >= since. Waits up to `wait` for one to appear unless
  // the episode is over.
  std::vector<nlohmann::json> events(const std::string& id, std::uint64_t since,
                                     std::chrono::milliseconds wait = std::chrono::milliseconds(0));
  void answer(const std::string& id, const std::string& text);
  void act(const std::string& id, const std::string& text);
  nlohmann::json state(const std::string& id);
  EpisodeRecord record(const std::string& id);
  void close(const std::string& id);

  // Drops sessions idle for longer than the timeout. Returns how many.
  std::size_t expire_idle(Clock::time_point now = Clock::now());
  std::size_t size() const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id);

  std::chrono::milliseconds idle_timeout_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

// HTTP front end. Routes:
//   POST   /v1/sessions                 create
//   GET    /v1/sessions/{id}/events     long-poll (?since=&wait_ms=)
//   GET    /v1/sessions/{id}/stream     server-sent events (?since=)
//   POST   /v1/sessions/{id}/answer     {"text": ...}
//   POST   /v1/sessions/{id}/act        {"text": ...}
//   GET    /v1/sessions/{id}            state
//   GET    /v1/sessions/{id}/record     records file of the episode so far
//   DELETE /v1/sessions/{id}            close
// See docs/wire_schema.md.
class Server {
 public:
  explicit Server(SessionManager& sessions);
  ~Server();

  // Binds to host:port (port 0 picks a free one) and returns the port, or -1.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "host:port" from the flag, else INQUIRE_ADDR, else 127.0.0.1:8080.
std::pair<std::string, int> resolve_bind_address(const std::optional<std::string>& flag);

}  // namespace inquire
