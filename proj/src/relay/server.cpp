#include "fpvgl/relay/server.hpp"

#include <sys/socket.h>

#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <string>

#include "fpvgl/common/time.hpp"
#include "fpvgl/relay/envelope.hpp"

namespace fpvgl::relay {

using Bytes = std::shared_ptr<const std::vector<std::uint8_t>>;

struct RelayServer::Client {
  Socket socket;
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<Bytes> queue;
  bool dead = false;
  std::thread writer;
  std::thread reader;

  void kill() {
    {
      std::lock_guard lock(mutex);
      dead = true;
      queue.clear();
    }
    ready.notify_all();
    socket.shutdown();
  }

  bool is_dead() {
    std::lock_guard lock(mutex);
    return dead;
  }
};

RelayOptions RelayOptions::from_env() {
  RelayOptions o;
  if (const char* v = std::getenv("FPVGL_RELAY_QUEUE_DEPTH"); v != nullptr && *v != '\0') {
    const long depth = std::strtol(v, nullptr, 10);
    if (depth <= 0) {
      throw std::invalid_argument("FPVGL_RELAY_QUEUE_DEPTH must be a positive integer");
    }
    o.queue_depth = static_cast<std::size_t>(depth);
  }
  return o;
}

RelayServer::RelayServer(const Endpoint& listen_at, RelayOptions options)
    : options_(options), listener_(Socket::listen(listen_at)) {
  port_ = listener_.local_port();
  acceptor_ = std::thread([this] { accept_loop(); });
}

RelayServer::~RelayServer() { stop(); }

void RelayServer::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  listener_.close();
  std::list<std::shared_ptr<Client>> clients;
  {
    std::lock_guard lock(clients_mutex_);
    clients.swap(clients_);
  }
  for (auto& c : clients) c->kill();
  for (auto& c : clients) {
    if (c->writer.joinable()) c->writer.join();
    if (c->reader.joinable()) c->reader.join();
  }
}

void RelayServer::on_stick(StickHandler handler) {
  std::lock_guard lock(stick_mutex_);
  stick_handler_ = std::move(handler);
}

std::size_t RelayServer::client_count() const {
  std::lock_guard lock(clients_mutex_);
  std::size_t n = 0;
  for (const auto& c : clients_) n += c->is_dead() ? 0 : 1;
  return n;
}

void RelayServer::publish(std::span<const std::uint8_t> frame) {
  std::lock_guard order(publish_mutex_);
  publish(frame, monotonic_us());
}

void RelayServer::publish(std::span<const std::uint8_t> frame, std::uint64_t source_timestamp_us) {
  auto bytes = std::make_shared<const std::vector<std::uint8_t>>(
      encode_envelope(source_timestamp_us, frame));
  ++published_;
  std::lock_guard lock(clients_mutex_);
  for (auto& c : clients_) {
    bool overflow = false;
    {
      std::lock_guard q(c->mutex);
      if (c->dead) continue;
      if (c->queue.size() >= options_.queue_depth) {
        overflow = true;
      } else {
        c->queue.push_back(bytes);
      }
    }
    if (overflow) {
      ++dropped_clients_;
      c->kill();
    } else {
      c->ready.notify_one();
    }
  }
}

void RelayServer::accept_loop() {
  while (!stopping_) {
    reap();
    if (!listener_.wait_readable(50)) continue;
    Socket s(::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC));
    if (!s.valid()) continue;
    s.set_nodelay();
    if (options_.client_send_buffer > 0) s.set_send_buffer(options_.client_send_buffer);

    auto client = std::make_shared<Client>();
    client->socket = std::move(s);
    Client* raw = client.get();
    client->writer = std::thread([raw] {
      for (;;) {
        Bytes next;
        {
          std::unique_lock lock(raw->mutex);
          raw->ready.wait(lock, [raw] { return raw->dead || !raw->queue.empty(); });
          if (raw->dead) return;
          next = std::move(raw->queue.front());
          raw->queue.pop_front();
        }
        if (!raw->socket.send_all(*next)) {
          raw->kill();
          return;
        }
      }
    });
    client->reader = std::thread([this, raw] {
      StickParser parser;
      std::vector<std::uint8_t> buf(4096);
      for (;;) {
        const long n = raw->socket.recv_some(buf);
        if (n <= 0) {
          raw->kill();
          return;
        }
        for (const auto& packet : parser.feed({buf.data(), static_cast<std::size_t>(n)})) {
          std::lock_guard lock(stick_mutex_);
          if (stick_handler_) stick_handler_(packet.command);
        }
      }
    });
    std::lock_guard lock(clients_mutex_);
    clients_.push_back(std::move(client));
  }
}

void RelayServer::reap() {
  std::list<std::shared_ptr<Client>> dead;
  {
    std::lock_guard lock(clients_mutex_);
    for (auto it = clients_.begin(); it != clients_.end();) {
      if ((*it)->is_dead()) {
        dead.push_back(*it);
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& c : dead) {
    if (c->writer.joinable()) c->writer.join();
    if (c->reader.joinable()) c->reader.join();
  }
}

}  // namespace fpvgl::relay
