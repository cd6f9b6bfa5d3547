#include "server.hpp"

#include <chrono>
#include <deque>
#include <iostream>
#include <map>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace teamsim::tools {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct LiveEntry {
  std::unique_ptr<LiveSession> session;
  bool connected = false;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::map<std::string, LiveEntry>& sessions, double time_scale)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), sessions_(sessions), time_scale_(time_scale) {}

  void start() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

 private:
  void on_request(beast::error_code ec) {
    if (ec) return;
    if (!websocket::is_upgrade(request_)) {
      auto res = std::make_shared<http::response<http::string_body>>(http::status::bad_request, request_.version());
      res->set(http::field::content_type, "text/plain");
      res->body() = "websocket endpoint: /session/<id>\n";
      res->prepare_payload();
      http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ignored;
        self->ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
      });
      return;
    }
    ws_.text(true);
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code e) { self->on_accept(e); });
  }

  void on_accept(beast::error_code ec) {
    if (ec) return;
    const std::string target{request_.target()};
    const std::string prefix = "/session/";
    std::string id = target.rfind(prefix, 0) == 0 ? target.substr(prefix.size()) : std::string{};
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
      send_and_close(error_frame("unknown session"));
      return;
    }
    if (it->second.connected) {
      send_and_close(error_frame("session already connected"));
      return;
    }
    entry_ = &it->second;
    entry_->connected = true;
    const auto& s = *entry_->session;
    period_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(s.tick_interval() / time_scale_));
    deliver(entry_->session->connect());
    next_tick_ = std::chrono::steady_clock::now() + period_;
    arm_timer();
    read();
  }

  void read() {
    ws_.async_read(in_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close_session();
        return;
      }
      const auto text = beast::buffers_to_string(self->in_.data());
      self->in_.consume(self->in_.size());
      if (self->entry_) self->deliver(self->entry_->session->receive(text));
      self->read();
    });
  }

  void arm_timer() {
    timer_.expires_at(next_tick_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || !self->entry_) return;
      self->next_tick_ += self->period_;
      self->deliver(self->entry_->session->tick());
      self->arm_timer();
    });
  }

  void deliver(const std::vector<Frame>& frames) {
    for (const auto& f : frames) {
      queue_.push_back(f.dump());
      if (f.value("type", "") == "session_end") closing_ = true;
    }
    if (!writing_) write_next();
  }

  void send_and_close(const Frame& frame) {
    closing_ = true;
    queue_.push_back(frame.dump());
    if (!writing_) write_next();
  }

  void write_next() {
    if (queue_.empty()) {
      writing_ = false;
      if (closing_) {
        ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
      }
      return;
    }
    writing_ = true;
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close_session();
        return;
      }
      self->queue_.pop_front();
      self->write_next();
    });
  }

  void close_session() {
    timer_.cancel();
    if (!entry_) return;
    entry_->session->disconnect();
    entry_->connected = false;
    entry_ = nullptr;
  }

  websocket::stream<tcp::socket> ws_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  beast::flat_buffer in_;
  http::request<http::string_body> request_;
  std::map<std::string, LiveEntry>& sessions_;
  LiveEntry* entry_ = nullptr;
  double time_scale_;
  std::chrono::steady_clock::duration period_{};
  std::chrono::steady_clock::time_point next_tick_{};
  std::deque<std::string> queue_;
  bool writing_ = false;
  bool closing_ = false;
};

}  // namespace

struct Server::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::map<std::string, LiveEntry> sessions;
  double time_scale = 1.0;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Connection>(std::move(socket), sessions, time_scale)->start();
      accept();
    });
  }
};

Server::Server(SessionPlanFile plans, ServerOptions options) : impl_(std::make_unique<Impl>()) {
  if (!(options.time_scale > 0.0)) throw std::invalid_argument("time_scale must be positive");
  impl_->time_scale = options.time_scale;
  for (auto& e : plans.sessions) {
    LiveOptions live;
    live.engine.round_length_s = plans.round_length_s;
    impl_->sessions[e.session_id].session =
        std::make_unique<LiveSession>(e.session_id, e.plan, e.seed, e.dir, live);
  }
  const tcp::endpoint endpoint{asio::ip::make_address(options.bind_address), options.port};
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen();
  impl_->accept();
}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() { impl_->io.run(); }

void Server::stop() {
  asio::post(impl_->io, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    for (auto& [id, entry] : impl_->sessions) entry.session->disconnect();
    impl_->io.stop();
  });
}

}  // namespace teamsim::tools
