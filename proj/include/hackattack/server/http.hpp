#pragma once

// JSON-over-HTTP session protocol, version 1. All routes live under /api/v1.
//
//   POST /sessions                     {"seats": [...], "seed"?, "config"?} -> {"session", "seats"}
//   POST /sessions/{id}/join           {"seat": n}                          -> {"token"}
//   GET  /sessions/{id}/view                                                -> seat view
//   POST /sessions/{id}/turn           {"actions": [...]}                   -> {"accepted": true}
//   GET  /sessions/{id}/events?after=n[&wait=ms]                            -> {"events": [...]}
//        (with Accept: text/event-stream, a Server-Sent Events stream)
//   GET  /sessions/{id}/record                                              -> GameRecord
//
// Seat tokens travel as "Authorization: Bearer <token>" or "?token=".

#include <httplib.h>

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "hackattack/server/session.hpp"

namespace hackattack::server {

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"protocol", kProtocolVersion}, {"error", message}});
}

inline std::string token_of(const httplib::Request& req) {
  const auto auth = req.get_header_value("Authorization");
  constexpr std::string_view bearer = "Bearer ";
  if (auth.starts_with(bearer)) return auth.substr(bearer.size());
  return req.has_param("token") ? req.get_param_value("token") : std::string();
}

inline std::uint64_t uint_param(const httplib::Request& req, const char* name, std::uint64_t fallback) {
  if (!req.has_param(name)) return fallback;
  try {
    return std::stoull(req.get_param_value(name));
  } catch (const std::exception&) {
    throw FormatError(std::string("bad integer parameter: ") + name);
  }
}

inline json event_json(const Event& e) { return e.body; }

}  // namespace detail

class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<SessionRegistry> registry = std::make_shared<SessionRegistry>())
      : registry_(std::move(registry)) {
    routes();
  }

  httplib::Server& raw() { return server_; }
  SessionRegistry& registry() { return *registry_; }

  bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
  int bind_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

 private:
  // Runs a handler, mapping the library's exceptions onto status codes.
  template <typename Fn>
  static void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const AuthError& e) {
      detail::send_error(res, 403, e.what());
    } catch (const StateError& e) {
      detail::send_error(res, 409, e.what());
    } catch (const RuleViolation& e) {
      detail::send_error(res, 400, std::string("illegal action: ") + e.what());
    } catch (const ConfigError& e) {
      detail::send_error(res, 400, std::string("invalid config: ") + e.what());
    } catch (const FormatError& e) {
      detail::send_error(res, 400, e.what());
    } catch (const json::exception& e) {
      detail::send_error(res, 400, std::string("malformed request: ") + e.what());
    }
  }

  std::shared_ptr<Session> session_of(const httplib::Request& req) const {
    auto s = registry_->find(req.matches[1]);
    if (!s) throw StateError("unknown session");
    return s;
  }

  void routes() {
    server_.Get("/api/v1", [](const httplib::Request&, httplib::Response& res) {
      detail::send_json(res, 200, {{"protocol", kProtocolVersion}});
    });

    server_.Post("/api/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = req.body.empty() ? json::object() : json::parse(req.body);
        GameConfig config = body.value("config", json::object()).get<GameConfig>();
        std::vector<SeatSpec> seats;
        for (const auto& name : body.at("seats")) seats.push_back(SeatSpec::parse(name.get<std::string>()));
        const auto seed = body.contains("seed") ? body.at("seed").get<std::uint64_t>()
                                                : std::random_device{}();
        auto s = registry_->create(config, seed, std::move(seats));
        json seat_list = json::array();
        for (PlayerId p = 0; p < s->seats(); ++p) seat_list.push_back({{"seat", p}, {"kind", s->seat(p).name()}});
        detail::send_json(res, 201, {{"protocol", kProtocolVersion}, {"session", s->id()}, {"seats", seat_list}});
      });
    });

    server_.Post(R"(/api/v1/sessions/([0-9a-f]+)/join)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto s = session_of(req);
        const json body = json::parse(req.body);
        const std::string token = s->join(body.at("seat").get<int>());
        detail::send_json(res, 200, {{"protocol", kProtocolVersion}, {"token", token}});
      });
    });

    server_.Get(R"(/api/v1/sessions/([0-9a-f]+)/view)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto s = session_of(req);
        const std::string token = detail::token_of(req);
        const PlayerId me = s->authorize(token);
        if (req.has_param("seat") && std::to_string(me) != req.get_param_value("seat"))
          throw AuthError("a seat token can only read its own seat");
        detail::send_json(res, 200, s->view(token));
      });
    });

    server_.Post(R"(/api/v1/sessions/([0-9a-f]+)/turn)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto s = session_of(req);
        const std::string token = detail::token_of(req);
        s->authorize(token);
        const json body = json::parse(req.body);
        std::vector<Action> actions;
        for (json a : body.at("actions")) {
          if (!a.contains("actor")) a["actor"] = -1;
          actions.push_back(a.get<Action>());
        }
        s->submit(token, actions);
        detail::send_json(res, 200, {{"protocol", kProtocolVersion}, {"accepted", true}});
      });
    });

    server_.Get(R"(/api/v1/sessions/([0-9a-f]+)/events)", [this](const httplib::Request& req,
                                                                  httplib::Response& res) {
      guarded(res, [&] {
        auto s = session_of(req);
        const std::string token = detail::token_of(req);
        s->authorize(token);
        const std::uint64_t after = detail::uint_param(req, "after", 0);
        if (req.get_header_value("Accept").find("text/event-stream") != std::string::npos) {
          stream(res, s, token, after);
          return;
        }
        const auto wait = std::chrono::milliseconds(std::min<std::uint64_t>(detail::uint_param(req, "wait", 0), 30000));
        json list = json::array();
        for (const Event& e : s->events(token, after, wait)) list.push_back(detail::event_json(e));
        detail::send_json(res, 200, {{"protocol", kProtocolVersion}, {"events", list}});
      });
    });

    server_.Get(R"(/api/v1/sessions/([0-9a-f]+)/record)", [this](const httplib::Request& req,
                                                                  httplib::Response& res) {
      guarded(res, [&] {
        auto s = session_of(req);
        detail::send_json(res, 200, json(s->record(detail::token_of(req))));
      });
    });
  }

  // Server-Sent Events: one "data:" frame per event, "id:" carrying its
  // sequence number. The stream ends after the game-end event.
  static void stream(httplib::Response& res, std::shared_ptr<Session> s, std::string token, std::uint64_t after) {
    auto cursor = std::make_shared<std::uint64_t>(after);
    res.set_chunked_content_provider("text/event-stream", [s, token, cursor](std::size_t, httplib::DataSink& sink) {
      const auto batch = s->events(token, *cursor, std::chrono::milliseconds(1000));
      std::string frame;
      for (const Event& e : batch) {
        frame += "id: " + std::to_string(e.seq) + "\ndata: " + e.body.dump() + "\n\n";
        *cursor = e.seq;
      }
      if (frame.empty()) frame = ": keep-alive\n\n";
      if (!sink.write(frame.data(), frame.size())) return false;
      if (s->finished() && *cursor >= s->last_seq(token)) sink.done();
      return true;
    });
  }

  std::shared_ptr<SessionRegistry> registry_;
  httplib::Server server_;
};

}  // namespace hackattack::server
