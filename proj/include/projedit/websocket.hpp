#pragma once

// WebSocket transport for Service, plus plain HTTP for a static UI bundle on
// the same port. Requires Boost.Beast.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "projedit/service.hpp"

namespace projedit {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

class WebSocketServer {
 public:
  using Logger = std::function<void(const std::string&)>;

  WebSocketServer(Service& service, std::filesystem::path uiDir = {}, Logger log = {})
      : service_(service), uiDir_(std::move(uiDir)), log_(std::move(log)), acceptor_(ioc_) {}

  ~WebSocketServer() { stop(); }

  /// Binds to 127.0.0.1:port (0 picks a free port) and starts accepting on a
  /// background thread. Returns the bound port.
  unsigned short start(unsigned short port) {
    tcp::endpoint ep(net::ip::make_address("127.0.0.1"), port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    accept();
    thread_ = std::thread([this] { ioc_.run(); });
    return port_;
  }

  void stop() {
    if (!thread_.joinable()) return;
    ioc_.stop();
    thread_.join();
  }

  /// Blocks until stop() is called from elsewhere.
  void wait() {
    if (thread_.joinable()) thread_.join();
  }

  unsigned short port() const { return port_; }

 private:
  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (!ec) std::thread(&WebSocketServer::session, this, std::move(socket)).detach();
      if (acceptor_.is_open()) accept();
    });
  }

  void log(const std::string& s) const {
    if (log_) log_(s);
  }

  void session(tcp::socket socket) {
    beast::error_code ec;
    beast::flat_buffer buffer;
    http::request<http::string_body> req;
    http::read(socket, buffer, req, ec);
    if (ec) return;
    if (websocket::is_upgrade(req)) {
      serveWebSocket(std::move(socket), req);
    } else {
      serveHttp(socket, req);
    }
  }

  void serveWebSocket(tcp::socket socket, const http::request<http::string_body>& req) {
    websocket::stream<tcp::socket> ws(std::move(socket));
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    log("websocket client connected");
    for (;;) {
      beast::flat_buffer buf;
      ws.read(buf, ec);
      if (ec) break;
      std::string line = beast::buffers_to_string(buf.data());
      std::string resp = service_.handleLine(line);
      if (resp.empty()) continue;
      ws.text(true);
      ws.write(net::buffer(resp), ec);
      if (ec) break;
    }
    log("websocket client disconnected");
  }

  static std::string mimeType(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    return "application/octet-stream";
  }

  void serveHttp(tcp::socket& socket, const http::request<http::string_body>& req) {
    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(false);
    std::string target(req.target());
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    std::filesystem::path file;
    bool found = false;
    if (!uiDir_.empty() && req.method() == http::verb::get && target.find("..") == std::string::npos) {
      file = uiDir_ / (target == "/" ? std::string("index.html") : target.substr(1));
      found = std::filesystem::is_regular_file(file);
    }
    if (found) {
      std::ifstream in(file, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      res.result(http::status::ok);
      res.set(http::field::content_type, mimeType(file));
      res.body() = ss.str();
    } else {
      res.result(http::status::not_found);
      res.set(http::field::content_type, "text/plain");
      res.body() = "not found\n";
    }
    res.prepare_payload();
    beast::error_code ec;
    http::write(socket, res, ec);
    socket.shutdown(tcp::socket::shutdown_send, ec);
  }

  Service& service_;
  std::filesystem::path uiDir_;
  Logger log_;
  net::io_context ioc_;
  tcp::acceptor acceptor_;
  std::thread thread_;
  unsigned short port_ = 0;
};

}  // namespace projedit
