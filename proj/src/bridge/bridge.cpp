#include "fpvgl/bridge/bridge.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <vector>

#include "fpvgl/bridge/protocol.hpp"

namespace fpvgl::bridge {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace ws = beast::websocket;
using tcp = asio::ip::tcp;
using Text = std::shared_ptr<const std::string>;

namespace {
class Console;
}

struct detail::ConsoleServer {
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread thread;
  std::size_t max_queued;
  std::function<void(const std::string&)> on_text;

  mutable std::mutex mutex;
  std::vector<std::weak_ptr<Console>> consoles;
  Text status;

  ConsoleServer(const relay::Endpoint& at, std::size_t max_queued, std::function<void(const std::string&)> on_text);
  ~ConsoleServer() { stop(); }

  void accept();
  void broadcast(std::string text, bool droppable);
  void set_status(std::string text);
  std::size_t count() const;
  void stop();
};

namespace {

class Console : public std::enable_shared_from_this<Console> {
 public:
  Console(tcp::socket socket, detail::ConsoleServer& server) : ws_(std::move(socket)), server_(server) {}

  void start() {
    ws_.set_option(ws::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void send(Text text, bool droppable) {
    if (closed_) return;
    if (droppable && out_.size() >= server_.max_queued) return;
    out_.push_back(std::move(text));
    if (out_.size() == 1) write();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    Text status;
    {
      std::lock_guard lock(server_.mutex);
      server_.consoles.push_back(weak_from_this());
      status = server_.status;
    }
    if (status) send(status, false);
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (self->server_.on_text) self->server_.on_text(text);
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->out_.pop_front();
      if (!self->out_.empty()) self->write();
    });
  }

  void close() {
    closed_ = true;
    out_.clear();
  }

  ws::stream<tcp::socket> ws_;
  detail::ConsoleServer& server_;
  beast::flat_buffer buffer_;
  std::deque<Text> out_;
  bool closed_ = false;
};

}  // namespace

detail::ConsoleServer::ConsoleServer(const relay::Endpoint& at, std::size_t max_queued,
                       std::function<void(const std::string&)> on_text)
    : max_queued(max_queued), on_text(std::move(on_text)) {
  const tcp::endpoint ep(asio::ip::make_address(at.host == "localhost" ? "127.0.0.1" : at.host), at.port);
  try {
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw relay::NetError("bridge listen on " + at.str() + ": " + e.code().message());
  }
  accept();
  thread = std::thread([this] { ioc.run(); });
}

void detail::ConsoleServer::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<Console>(std::move(socket), *this)->start();
    accept();
  });
}

void detail::ConsoleServer::broadcast(std::string text, bool droppable) {
  auto shared = std::make_shared<const std::string>(std::move(text));
  asio::post(ioc, [this, shared, droppable] {
    std::vector<std::shared_ptr<Console>> live;
    {
      std::lock_guard lock(mutex);
      std::erase_if(consoles, [](const auto& w) { return w.expired(); });
      for (const auto& w : consoles) {
        if (auto c = w.lock()) live.push_back(std::move(c));
      }
    }
    for (const auto& c : live) c->send(shared, droppable);
  });
}

void detail::ConsoleServer::set_status(std::string text) {
  {
    std::lock_guard lock(mutex);
    status = std::make_shared<const std::string>(text);
  }
  broadcast(std::move(text), false);
}

std::size_t detail::ConsoleServer::count() const {
  std::lock_guard lock(mutex);
  std::size_t n = 0;
  for (const auto& w : consoles) n += w.expired() ? 0 : 1;
  return n;
}

void detail::ConsoleServer::stop() {
  if (!thread.joinable()) return;
  asio::post(ioc, [this] {
    beast::error_code ec;
    acceptor.close(ec);
  });
  ioc.stop();
  thread.join();
}

Bridge::Bridge(BridgeOptions options) : options_(std::move(options)) {
  if (options_.frame_rate_hz <= 0) throw std::invalid_argument("frame rate must be positive");
  server_ = std::make_unique<detail::ConsoleServer>(options_.listen, options_.max_queued,
                                     [this](const std::string& text) { on_console_text(text); });
  server_->set_status(status_message(false, "connecting to " + options_.relay.str()));
  relay_thread_ = std::thread([this] { relay_loop(); });
  if (options_.frames) frame_thread_ = std::thread([this] { frame_loop(); });
}

Bridge::~Bridge() { stop(); }

std::uint16_t Bridge::port() const noexcept { return server_->acceptor.local_endpoint().port(); }

std::size_t Bridge::console_count() const { return server_->count(); }

void Bridge::stop() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_.exchange(true) && !relay_thread_.joinable()) return;
  }
  wake_.notify_all();
  if (relay_thread_.joinable()) relay_thread_.join();
  if (frame_thread_.joinable()) frame_thread_.join();
  server_->stop();
}

bool Bridge::sleep_for(std::chrono::milliseconds d) {
  std::unique_lock lock(mutex_);
  return wake_.wait_for(lock, d, [this] { return stopping_.load(); });
}

void Bridge::set_relay_status(bool connected, const std::string& detail) {
  relay_connected_ = connected;
  server_->set_status(status_message(connected, detail));
}

void Bridge::relay_loop() {
  auto backoff = options_.retry_initial;
  bool announced_down = false;
  while (!stopping_) {
    ++connect_attempts_;
    std::shared_ptr<relay::RelayClient> client;
    try {
      client = std::make_shared<relay::RelayClient>(
          options_.relay, [this](const relay::Envelope&, const mavlink::Message& m) { on_relay_message(m); });
    } catch (const relay::NetError& e) {
      if (!announced_down) set_relay_status(false, e.what());
      announced_down = true;
      if (sleep_for(backoff)) break;
      backoff = std::min(backoff * 2, options_.retry_max);
      continue;
    }
    {
      std::lock_guard lock(mutex_);
      client_ = client;
    }
    set_relay_status(true, "relay " + options_.relay.str());
    announced_down = false;
    backoff = options_.retry_initial;
    while (!stopping_ && !client->wait_closed(std::chrono::milliseconds(100))) {
    }
    const std::string reason = client->terminal_error().value_or("closed");
    {
      std::lock_guard lock(mutex_);
      client_.reset();
    }
    client->close();
    if (stopping_) break;
    set_relay_status(false, "relay lost: " + reason);
    announced_down = true;
    if (sleep_for(backoff)) break;
  }
}

void Bridge::on_relay_message(const mavlink::Message& message) {
  std::optional<std::string> state;
  {
    std::lock_guard lock(mutex_);
    snapshot_.apply(message);
    have_snapshot_ = true;
    if (const auto* gpi = std::get_if<mavlink::GlobalPositionInt>(&message)) {
      state = state_message(*gpi, snapshot_.attitude);
    }
  }
  if (state) {
    server_->broadcast(std::move(*state), true);
    ++states_sent_;
  }
}

void Bridge::on_console_text(const std::string& text) {
  StickMessage stick;
  try {
    stick = parse_stick(text);
  } catch (const ProtocolError&) {
    return;
  }
  std::shared_ptr<relay::RelayClient> client;
  {
    std::lock_guard lock(mutex_);
    client = client_;
  }
  if (client && client->send_stick(stick.command)) ++sticks_forwarded_;
}

void Bridge::frame_loop() {
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options_.frame_rate_hz));
  auto next = std::chrono::steady_clock::now() + period;
  while (!stopping_) {
    {
      std::unique_lock lock(mutex_);
      if (wake_.wait_until(lock, next, [this] { return stopping_.load(); })) break;
    }
    next += period;
    if (std::chrono::steady_clock::now() > next) next = std::chrono::steady_clock::now() + period;
    std::optional<logger::TelemetrySnapshot> snap;
    {
      std::lock_guard lock(mutex_);
      if (have_snapshot_ && relay_connected_) snap = snapshot_;
    }
    if (!snap) continue;
    const auto pair = options_.frames->capture(*snap);
    server_->broadcast(frame_message("front", pair.front), true);
    server_->broadcast(frame_message("bottom", pair.bottom), true);
    frames_sent_ += 2;
  }
}

}  // namespace fpvgl::bridge
