#include <cstdlib>
#include <sstream>

#include <httplib.h>

#include "inquire/records.hpp"
#include "inquire/service.hpp"

namespace inquire {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump() + "\n", "application/json");
}

void send_error(httplib::Response& res, const std::string& code, int status, const std::string& message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}}}, {"version", kWireVersion}});
}

json parse_body(const httplib::Request& req) {
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw ServiceError("BAD_REQUEST", 400, "request body is not JSON");
  return j;
}

std::string text_field(const json& j) {
  if (!j.is_object() || !j.contains("text") || !j["text"].is_string())
    throw ServiceError("BAD_REQUEST", 400, "expected {\"text\": string}");
  return j["text"].get<std::string>();
}

std::uint64_t query_u64(const httplib::Request& req, const char* key, std::uint64_t fallback) {
  if (!req.has_param(key)) return fallback;
  try {
    return std::stoull(req.get_param_value(key));
  } catch (const std::exception&) {
    throw ServiceError("BAD_REQUEST", 400, std::string("bad query parameter '") + key + "'");
  }
}

// Wraps a handler so library errors become wire errors.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.code(), e.http_status(), e.what());
    } catch (const EpisodeFinished& e) {
      send_error(res, "EPISODE_FINISHED", 409, e.what());
    } catch (const std::exception& e) {
      send_error(res, "INTERNAL", 500, e.what());
    }
  };
}

}  // namespace

struct Server::Impl {
  SessionManager& sessions;
  httplib::Server http;

  explicit Impl(SessionManager& s) : sessions(s) {
    http.Post("/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto cfg = SessionConfig::from_json(parse_body(req));
                const auto id = sessions.create(cfg);
                send_json(res, 201, {{"id", id}, {"version", kWireVersion}});
              }));

    http.Get(R"(/v1/sessions/([^/]+)/events)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               const auto since = query_u64(req, "since", 0);
               const auto wait = std::min<std::uint64_t>(query_u64(req, "wait_ms", 0), 60000);
               auto events = sessions.events(id, since, std::chrono::milliseconds(wait));
               const auto next = since + events.size();
               send_json(res, 200, {{"events", events}, {"next", next}, {"version", kWireVersion}});
             }));

    http.Get(R"(/v1/sessions/([^/]+)/stream)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               auto cursor = std::make_shared<std::uint64_t>(query_u64(req, "since", 0));
               // Fails fast with UNKNOWN_SESSION before the stream opens.
               sessions.events(id, *cursor);
               res.set_header("Cache-Control", "no-cache");
               res.set_chunked_content_provider(
                   "text/event-stream", [this, id, cursor](std::size_t, httplib::DataSink& sink) {
                     std::vector<json> batch;
                     try {
                       batch = sessions.events(id, *cursor, std::chrono::milliseconds(1000));
                     } catch (const ServiceError&) {
                       sink.done();
                       return true;
                     }
                     bool ended = false;
                     for (const auto& e : batch) {
                       const auto frame = "id: " + std::to_string(e["cursor"].get<std::uint64_t>()) +
                                          "\nevent: " + e["kind"].get<std::string>() + "\ndata: " +
                                          e.dump() + "\n\n";
                       if (!sink.write(frame.data(), frame.size())) return false;
                       ++*cursor;
                       ended = ended || e["kind"] == "end";
                     }
                     if (batch.empty() && !sink.write(": keep-alive\n\n", 14)) return false;
                     if (ended) sink.done();
                     return true;
                   });
             }));

    http.Post(R"(/v1/sessions/([^/]+)/answer)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                sessions.answer(req.matches[1], text_field(parse_body(req)));
                send_json(res, 200, {{"accepted", true}, {"version", kWireVersion}});
              }));

    http.Post(R"(/v1/sessions/([^/]+)/act)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                sessions.act(req.matches[1], text_field(parse_body(req)));
                send_json(res, 200, {{"accepted", true}, {"version", kWireVersion}});
              }));

    http.Get(R"(/v1/sessions/([^/]+)/record)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               std::ostringstream out;
               write_records(out, {sessions.record(req.matches[1])});
               res.set_content(out.str(), "application/x-ndjson");
             }));

    http.Get(R"(/v1/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, sessions.state(req.matches[1]));
             }));

    http.Delete(R"(/v1/sessions/([^/]+))",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  sessions.close(req.matches[1]);
                  send_json(res, 200, {{"closed", true}, {"version", kWireVersion}});
                }));
  }
};

Server::Server(SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) {}
Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

std::pair<std::string, int> resolve_bind_address(const std::optional<std::string>& flag) {
  std::string addr = "127.0.0.1:8080";
  if (flag && !flag->empty()) {
    addr = *flag;
  } else if (const char* env = std::getenv("INQUIRE_ADDR"); env && *env) {
    addr = env;
  }
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw Error("bind address must be host:port, got '" + addr + "'");
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error("bad port in bind address '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw Error("port out of range in '" + addr + "'");
  return {addr.substr(0, colon), port};
}

}  // namespace inquire
