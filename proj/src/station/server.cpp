#include "rover/station/server.hpp"

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rover/station/session_log.hpp"
#include "rover/telemetry/bytes.hpp"

namespace rover {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

std::vector<std::uint8_t> wrap_frame(const TelemetryFrame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + frame.wire_size());
  ByteWriter(out).u32(static_cast<std::uint32_t>(frame.wire_size()));
  append_frame(out, frame);
  return out;
}

TelemetryFrame unwrap_frame(std::span<const std::uint8_t> message) {
  if (message.size() < 4) throw FrameError(FrameErrorKind::Truncated, "envelope shorter than its length prefix");
  const std::uint32_t n = ByteReader(message).u32();
  if (n != message.size() - 4) throw FrameError(FrameErrorKind::Truncated, "envelope length does not match");
  std::size_t used = 0;
  auto frame = decode_frame(message.subspan(4), &used);
  if (used != n) throw FrameError(FrameErrorKind::Truncated, "trailing bytes after the frame");
  return frame;
}

namespace {

constexpr std::size_t kMaxQueuedMessages = 512;

struct Outgoing {
  std::shared_ptr<const std::string> data;
  bool binary;
};

std::string mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".wasm") return "application/wasm";
  return "text/plain";
}

std::shared_ptr<const std::string> text_message(const json& j) { return std::make_shared<const std::string>(j.dump()); }

}  // namespace

class WsSession;

struct StationServer::Impl {
  Impl(WorldScene s, SessionConfig sc, ServerConfig c) : scene(std::move(s)), session_cfg(sc), cfg(std::move(c)) {}

  WorldScene scene;
  SessionConfig session_cfg;
  ServerConfig cfg;

  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread io_thread;
  std::thread sim_thread;
  std::atomic<bool> running{false};

  mutable std::mutex mu;  // session, recorder, commands, outbox
  std::unique_ptr<Session> session;
  std::optional<SessionRecorder> recorder;
  std::deque<OperatorCommand> commands;
  std::vector<TelemetryFrame> outbox;

  std::mutex stop_mu;
  std::condition_variable stop_cv;
  bool stopped{false};

  // touched only on the network thread
  std::set<std::shared_ptr<WsSession>> clients;
  const WsSession* operator_session{nullptr};
  std::atomic<int> client_count{0};
  std::atomic<bool> operator_connected{false};

  void do_accept();
  void join(const std::shared_ptr<WsSession>& ws);
  void leave(const WsSession* ws);
  void on_text(WsSession& ws, const std::string& text);
  void broadcast(const std::vector<Outgoing>& messages);
  http::response<http::string_body> handle(const http::request<http::string_body>& req) const;
  std::string health() const;
  void sim_loop();
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, StationServer::Impl& server) : ws_(std::move(socket)), server_(server) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void send(Outgoing msg) {
    if (queue_.size() >= kMaxQueuedMessages && msg.binary) return;  // slow reader: shed telemetry
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) do_write();
  }

  bool is_operator{false};

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    server_.join(shared_from_this());
    do_read();
  }

  void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      server_.leave(this);
      return;
    }
    if (ws_.got_text()) {
      server_.on_text(*this, beast::buffers_to_string(buffer_.data()));
    } else {
      send({text_message({{"type", "notice"}, {"text", "binary messages are not accepted"}}), false});
    }
    buffer_.consume(buffer_.size());
    do_read();
  }

  void do_write() {
    ws_.binary(queue_.front().binary);
    ws_.async_write(net::buffer(*queue_.front().data),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      server_.leave(this);
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<Outgoing> queue_;
  StationServer::Impl& server_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, StationServer::Impl& server) : stream_(std::move(socket)), server_(server) {}

  void run() { do_read(); }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_) && req_.target() == "/ws") {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), server_)->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(server_.handle(req_));
    res_ = res;
    http::async_write(stream_, *res,
                      beast::bind_front_handler(&HttpSession::on_write, shared_from_this(), res->need_eof()));
  }

  void on_write(bool close, beast::error_code ec, std::size_t) {
    if (ec) return;
    if (close) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    res_.reset();
    do_read();
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<void> res_;
  StationServer::Impl& server_;
};

void StationServer::Impl::do_accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpSession>(std::move(socket), *this)->run();
    do_accept();
  });
}

void StationServer::Impl::join(const std::shared_ptr<WsSession>& ws) {
  clients.insert(ws);
  if (!operator_session) {
    operator_session = ws.get();
    ws->is_operator = true;
  }
  client_count = static_cast<int>(clients.size());
  operator_connected = operator_session != nullptr;
  json hello{{"type", "hello"},
             {"role", ws->is_operator ? "operator" : "observer"},
             {"scene", scene.name},
             {"latency", session_cfg.link.one_way_delay},
             {"footprint", {{"length", session_cfg.onboard.nav.params.footprint.length},
                            {"width", session_cfg.onboard.nav.params.footprint.width}}}};
  ws->send({text_message(hello), false});
}

void StationServer::Impl::leave(const WsSession* ws) {
  for (auto it = clients.begin(); it != clients.end(); ++it) {
    if (it->get() == ws) {
      clients.erase(it);
      break;
    }
  }
  if (operator_session == ws) operator_session = nullptr;
  client_count = static_cast<int>(clients.size());
  operator_connected = operator_session != nullptr;
}

void StationServer::Impl::on_text(WsSession& ws, const std::string& text) {
  auto notice = [&](const std::string& msg) { ws.send({text_message({{"type", "notice"}, {"text", msg}}), false}); };
  try {
    auto doc = json::parse(text);
    if (doc.is_object() && doc.value("type", "") == "echo_goal") {
      doc["type"] = "set_goal";
      const auto goal = std::get<SetGoal>(command_from_json(doc.dump())).goal;
      ws.send({text_message({{"type", "goal_echo"}, {"x", goal.x}, {"y", goal.y}, {"theta", goal.theta}}), false});
      return;
    }
    if (!ws.is_operator) {
      notice("observer connections are read-only");
      return;
    }
    auto cmd = command_from_json(text);
    std::lock_guard lock(mu);
    commands.push_back(std::move(cmd));
  } catch (const std::exception& e) {
    notice(std::string("rejected command: ") + e.what());
  }
}

void StationServer::Impl::broadcast(const std::vector<Outgoing>& messages) {
  // copy: a failed write may remove a client while we iterate
  const auto targets = clients;
  for (const auto& c : targets) {
    for (const auto& m : messages) c->send(m);
  }
}

http::response<http::string_body> StationServer::Impl::handle(const http::request<http::string_body>& req) const {
  http::response<http::string_body> res{http::status::ok, req.version()};
  res.set(http::field::server, kBuildVersion);
  res.keep_alive(req.keep_alive());
  auto finish = [&](http::status status, std::string body, const std::string& type) {
    res.result(status);
    res.set(http::field::content_type, type);
    res.body() = req.method() == http::verb::head ? std::string{} : std::move(body);
    res.prepare_payload();
    return res;
  };
  if (req.method() != http::verb::get && req.method() != http::verb::head) {
    return finish(http::status::method_not_allowed, "method not allowed\n", "text/plain");
  }
  std::string target(req.target());
  if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
  if (target == "/health") return finish(http::status::ok, health(), "application/json");
  if (target.empty() || target[0] != '/' || target.find("..") != std::string::npos) {
    return finish(http::status::bad_request, "bad path\n", "text/plain");
  }
  if (target.back() == '/') target += "index.html";
  const auto file = cfg.static_root / target.substr(1);
  std::ifstream in(file, std::ios::binary);
  if (!in || std::filesystem::is_directory(file)) return finish(http::status::not_found, "not found\n", "text/plain");
  std::ostringstream body;
  body << in.rdbuf();
  return finish(http::status::ok, body.str(), mime_type(file));
}

std::string StationServer::Impl::health() const {
  std::lock_guard lock(mu);
  json j{{"status", running ? "ok" : "stopped"},
         {"scene", scene.name},
         {"latency", session_cfg.link.one_way_delay},
         {"clients", client_count.load()},
         {"operator_connected", operator_connected.load()}};
  if (session) {
    const auto& o = session->onboard();
    const auto& s = o.state();
    j["sim_time"] = session->now();
    j["mode"] = to_string(o.mode());
    j["nav_state"] = to_string(o.navigator().state());
    j["goal_id"] = o.navigator().goal() ? o.navigator().goal()->id : "";
    j["pose"] = {{"x", s.pose.x}, {"y", s.pose.y}, {"theta", s.pose.theta}};
    j["deadman_trips"] = o.deadman_trips();
    j["frames_delivered"] = session->downlink().frames_delivered();
    j["frames_dropped"] = session->downlink().frames_dropped();
    j["link_bytes"] = session->ground().stats().link_bytes();
  }
  return j.dump();
}

void StationServer::Impl::sim_loop() {
  const double dt = session_cfg.onboard.sim_dt;
  auto next = std::chrono::steady_clock::now();
  while (running) {
    std::vector<TelemetryFrame> frames;
    std::optional<json> stats;
    {
      std::lock_guard lock(mu);
      while (!commands.empty()) {
        session->ingest(commands.front());
        commands.pop_front();
      }
      session->step();
      frames.swap(outbox);
      if (session->onboard().step_count() % 20 == 0) {
        const auto& st = session->ground().status();
        stats = json{{"type", "stats"},
                     {"time", session->now()},
                     {"mode", st.mode},
                     {"nav_state", st.nav_state},
                     {"notices", session->ground().notices().size()},
                     {"report", json::parse(session->ground().budget(session->now()).to_json())}};
      }
    }
    std::vector<Outgoing> messages;
    for (const auto& f : frames) {
      const auto bytes = wrap_frame(f);
      messages.push_back({std::make_shared<const std::string>(bytes.begin(), bytes.end()), true});
    }
    if (stats) messages.push_back({text_message(*stats), false});
    if (!messages.empty()) net::post(ioc, [this, m = std::move(messages)] { broadcast(m); });
    if (cfg.speed > 0.0) {
      next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(dt / cfg.speed));
      const auto now = std::chrono::steady_clock::now();
      if (next < now - std::chrono::seconds(1)) next = now;  // fell behind: do not try to catch up
      std::this_thread::sleep_until(next);
    }
  }
}

StationServer::StationServer(WorldScene scene, SessionConfig session, ServerConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(scene), session, std::move(cfg))) {}

StationServer::~StationServer() { stop(); }

std::uint16_t StationServer::start() {
  auto& d = *impl_;
  d.session = std::make_unique<Session>(d.scene, d.session_cfg);
  SessionHooks hooks;
  if (d.cfg.log_path) {
    d.recorder.emplace(d.scene, d.session_cfg);
    d.recorder->stream_to(*d.cfg.log_path);
    hooks = d.recorder->hooks();
  }
  auto record_downlink = hooks.on_downlink;
  hooks.on_downlink = [&d, record_downlink](const Delivery& del) {
    if (record_downlink) record_downlink(del);
    d.outbox.push_back(del.frame);
  };
  d.session->set_hooks(hooks);

  const tcp::endpoint ep{net::ip::make_address(d.cfg.host), d.cfg.port};
  d.acceptor.open(ep.protocol());
  d.acceptor.set_option(net::socket_base::reuse_address(true));
  d.acceptor.bind(ep);
  d.acceptor.listen(net::socket_base::max_listen_connections);
  const auto port = d.acceptor.local_endpoint().port();
  d.do_accept();
  d.running = true;
  d.io_thread = std::thread([&d] { d.ioc.run(); });
  d.sim_thread = std::thread([&d] { d.sim_loop(); });
  return port;
}

void StationServer::stop() {
  auto& d = *impl_;
  if (!d.running.exchange(false)) return;
  if (d.sim_thread.joinable()) d.sim_thread.join();
  net::post(d.ioc, [&d] {
    beast::error_code ec;
    d.acceptor.close(ec);
    d.clients.clear();
  });
  d.ioc.stop();
  if (d.io_thread.joinable()) d.io_thread.join();
  {
    std::lock_guard lock(d.mu);
    if (d.recorder) d.recorder->finish(*d.session);
  }
  {
    std::lock_guard lock(d.stop_mu);
    d.stopped = true;
  }
  d.stop_cv.notify_all();
}

void StationServer::wait() {
  std::unique_lock lock(impl_->stop_mu);
  impl_->stop_cv.wait(lock, [this] { return impl_->stopped; });
}

std::string StationServer::health_json() const { return impl_->health(); }

}  // namespace rover
