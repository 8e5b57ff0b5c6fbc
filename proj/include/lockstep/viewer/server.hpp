// Copyright 2026 The Lockstep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOCKSTEP_VIEWER_SERVER_HPP_
#define LOCKSTEP_VIEWER_SERVER_HPP_

// HTTP + websocket front end on Boost.Beast. One io thread runs every
// socket, so sessions need no locking of their own.
//
//   GET /healthz   {"status": "ok", "mode": "live", "sim_step": 1234, "protocol_version": 1}
//   GET /ws        websocket upgrade; terrain message, then frames at the broadcast rate
//   GET /<file>    static files from BridgeCfg::static_dir when set
//
// Several clients may connect. Their control messages go through one queue,
// so the last writer wins.

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lockstep/viewer/session.hpp"

namespace lockstep::viewer {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

inline constexpr unsigned short kDefaultPort = 8765;
inline constexpr const char* kPortEnvVar = "LOCKSTEP_VIEWER_PORT";

// LOCKSTEP_VIEWER_PORT when set and valid, else kDefaultPort.
inline unsigned short default_port() {
  if (const char* v = std::getenv(kPortEnvVar)) {
    char* end = nullptr;
    const long p = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && p > 0 && p < 65536) return static_cast<unsigned short>(p);
  }
  return kDefaultPort;
}

struct BridgeCfg {
  std::string address = "127.0.0.1";
  unsigned short port = kDefaultPort;  // 0 picks a free port
  std::string static_dir;              // empty: no static files
};

namespace detail {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, BridgeCore& core)
      : ws_(std::move(socket)), core_(core) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->open_ = true;
      self->send(self->core_.terrain_text(), false);
      self->read();
    });
  }

  bool open() const { return open_; }

  // Frames are latest-wins: a queued frame that has not started writing is
  // replaced by the newer one.
  void send(std::string text, bool is_frame) {
    if (!open_) return;
    if (is_frame && outbox_.size() > 1 && outbox_.back().second) {
      outbox_.back().first = std::move(text);
      return;
    }
    outbox_.emplace_back(std::move(text), is_frame);
    if (outbox_.size() == 1) write();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      auto weak = std::weak_ptr<WsSession>(self);
      auto exec = self->ws_.get_executor();
      self->core_.enqueue(text, [weak, exec](std::string reply) {
        net::post(exec, [weak, reply = std::move(reply)]() mutable {
          if (auto s = weak.lock()) s->send(std::move(reply), false);
        });
      });
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front().first),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->open_ = false;
                        self->outbox_.clear();
                        return;
                      }
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  BridgeCore& core_;
  beast::flat_buffer buffer_;
  std::deque<std::pair<std::string, bool>> outbox_;
  bool open_ = false;
};

inline std::string content_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  using OnUpgrade = std::function<void(std::shared_ptr<WsSession>)>;

  HttpSession(tcp::socket socket, BridgeCore& core, const BridgeCfg& cfg, OnUpgrade on_upgrade)
      : stream_(std::move(socket)), core_(core), cfg_(cfg), on_upgrade_(std::move(on_upgrade)) {}

  void start() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->dispatch();
                     });
  }

  void dispatch() {
    const std::string target(req_.target());
    if (websocket::is_upgrade(req_)) {
      if (target != "/ws") return reply(http::status::not_found, "text/plain", "no websocket here\n");
      stream_.expires_never();
      auto ws = std::make_shared<WsSession>(stream_.release_socket(), core_);
      on_upgrade_(ws);
      ws->start(std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get) {
      return reply(http::status::method_not_allowed, "text/plain", "GET only\n");
    }
    if (target == "/healthz") {
      const Json body = {{"status", "ok"},
                         {"mode", core_.mode()},
                         {"sim_step", core_.sim_step()},
                         {"protocol_version", kProtocolVersion}};
      return reply(http::status::ok, "application/json", body.dump());
    }
    if (!cfg_.static_dir.empty() && target.find("..") == std::string::npos) {
      std::filesystem::path p = std::filesystem::path(cfg_.static_dir) /
                                (target == "/" ? std::string("index.html") : target.substr(1));
      std::ifstream in(p, std::ios::binary);
      if (in) {
        std::ostringstream ss;
        ss << in.rdbuf();
        return reply(http::status::ok, content_type(p), ss.str());
      }
    }
    reply(http::status::not_found, "text/plain", "not found\n");
  }

  void reply(http::status status, const std::string& type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "lockstep");
    res->set(http::field::content_type, type);
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (res->need_eof()) {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                          return;
                        }
                        self->read();
                      });
  }

  beast::tcp_stream stream_;
  BridgeCore& core_;
  const BridgeCfg& cfg_;
  OnUpgrade on_upgrade_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace detail

// Owns the io thread. The caller keeps stepping the core (BridgeCore::run)
// on its own thread.
class BridgeServer {
 public:
  BridgeServer(BridgeCore& core, BridgeCfg cfg)
      : core_(core), cfg_(std::move(cfg)), acceptor_(io_), timer_(io_) {
    const tcp::endpoint ep(net::ip::make_address(cfg_.address), cfg_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen(net::socket_base::max_listen_connections);
    port_ = acceptor_.local_endpoint().port();
  }

  ~BridgeServer() { stop(); }
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  unsigned short port() const { return port_; }

  void start() {
    accept();
    schedule_broadcast();
    thread_ = std::thread([this] { io_.run(); });
  }

  void stop() {
    if (!thread_.joinable()) return;
    net::post(io_, [this] {
      beast::error_code ignored;
      acceptor_.close(ignored);
      timer_.cancel();
      io_.stop();
    });
    thread_.join();
  }

 private:
  void accept() {
    acceptor_.async_accept(io_, [this](beast::error_code ec, tcp::socket s) {
      if (ec) return;
      std::make_shared<detail::HttpSession>(std::move(s), core_, cfg_, [this](auto ws) {
        clients_.push_back(ws);
      })->start();
      accept();
    });
  }

  void schedule_broadcast() {
    const double hz = core_.rate_hz();
    timer_.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / hz)));
    timer_.async_wait([this](beast::error_code ec) {
      if (ec) return;
      broadcast();
      schedule_broadcast();
    });
  }

  void broadcast() {
    std::erase_if(clients_, [](const std::weak_ptr<detail::WsSession>& w) { return w.expired(); });
    if (clients_.empty()) return;
    const std::string text = to_json_value(core_.latest_frame()).dump();
    for (auto& weak : clients_) {
      if (auto s = weak.lock()) s->send(text, true);
    }
  }

  BridgeCore& core_;
  BridgeCfg cfg_;
  net::io_context io_;
  tcp::acceptor acceptor_;
  net::steady_timer timer_;
  std::vector<std::weak_ptr<detail::WsSession>> clients_;
  unsigned short port_ = 0;
  std::thread thread_;
};

}  // namespace lockstep::viewer

#endif  // LOCKSTEP_VIEWER_SERVER_HPP_
