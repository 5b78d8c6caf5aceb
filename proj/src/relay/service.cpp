#include "fpvgl/relay/service.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/eventfd.h>
#include <termios.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "fpvgl/common/time.hpp"
#include "fpvgl/mavlink/codec.hpp"

namespace fpvgl::relay {

namespace {

speed_t baud_constant(int baud) {
  switch (baud) {
    case 9600: return B9600;
    case 19200: return B19200;
    case 38400: return B38400;
    case 57600: return B57600;
    case 115200: return B115200;
    case 230400: return B230400;
    case 460800: return B460800;
    case 921600: return B921600;
    default: throw std::invalid_argument("unsupported baud rate " + std::to_string(baud));
  }
}

/// Reads an fd with an eventfd alongside so interrupt() can wake it.
class FdSource : public ByteSource {
 public:
  explicit FdSource(int fd) : fd_(fd), wake_(::eventfd(0, EFD_CLOEXEC)) {}
  ~FdSource() override {
    ::close(fd_);
    ::close(wake_);
  }

  std::size_t read(std::span<std::uint8_t> into) override {
    for (;;) {
      pollfd fds[2] = {{fd_, POLLIN, 0}, {wake_, POLLIN, 0}};
      if (::poll(fds, 2, -1) < 0) {
        if (errno == EINTR) continue;
        return 0;
      }
      if (fds[1].revents != 0) return 0;
      const auto n = ::read(fd_, into.data(), into.size());
      if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
      return n <= 0 ? 0 : static_cast<std::size_t>(n);
    }
  }

  void interrupt() override {
    const std::uint64_t one = 1;
    [[maybe_unused]] auto n = ::write(wake_, &one, sizeof one);
  }

 private:
  int fd_;
  int wake_;
};

class TcpSource : public ByteSource {
 public:
  explicit TcpSource(const Endpoint& at) : socket_(Socket::connect(at)) {}

  std::size_t read(std::span<std::uint8_t> into) override {
    const long n = socket_.recv_some(into);
    return n <= 0 ? 0 : static_cast<std::size_t>(n);
  }
  void interrupt() override { socket_.shutdown(); }

 private:
  Socket socket_;
};

class UpstreamRelaySource : public ByteSource {
 public:
  explicit UpstreamRelaySource(const Endpoint& at)
      : client_(at, [this](const Envelope& env, const mavlink::Message&) {
          std::lock_guard lock(mutex_);
          pending_.insert(pending_.end(), env.frame.begin(), env.frame.end());
          ready_.notify_one();
        }) {}

  std::size_t read(std::span<std::uint8_t> into) override {
    std::unique_lock lock(mutex_);
    while (!ready_.wait_for(lock, std::chrono::milliseconds(50), [this] {
      return !pending_.empty() || interrupted_ || !client_.connected();
    })) {
    }
    if (pending_.empty()) return 0;
    const std::size_t n = std::min(into.size(), pending_.size());
    std::copy_n(pending_.begin(), n, into.begin());
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(n));
    return n;
  }

  void interrupt() override {
    std::lock_guard lock(mutex_);
    interrupted_ = true;
    ready_.notify_all();
  }

  void forward_stick(const StickCommand& c) override { client_.send_stick(c); }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<std::uint8_t> pending_;
  bool interrupted_ = false;
  RelayClient client_;
};

}  // namespace

std::unique_ptr<ByteSource> open_device_source(const std::string& path, int baud) {
  const int fd = ::open(path.c_str(), O_RDONLY | O_NOCTTY | O_CLOEXEC);
  if (fd < 0) throw NetError("open " + path + ": " + std::strerror(errno));
  if (::isatty(fd)) {
    termios tio{};
    if (::tcgetattr(fd, &tio) == 0) {
      ::cfmakeraw(&tio);
      ::cfsetispeed(&tio, baud_constant(baud));
      ::cfsetospeed(&tio, baud_constant(baud));
      ::tcsetattr(fd, TCSANOW, &tio);
    }
  }
  return std::make_unique<FdSource>(fd);
}

std::unique_ptr<ByteSource> open_tcp_source(const Endpoint& at) {
  return std::make_unique<TcpSource>(at);
}

std::unique_ptr<ByteSource> open_upstream_relay_source(const Endpoint& at) {
  return std::make_unique<UpstreamRelaySource>(at);
}

std::unique_ptr<ByteSource> open_source(const std::string& spec) {
  if (spec.rfind("tcp:", 0) == 0) return open_tcp_source(Endpoint::parse(spec.substr(4)));
  if (spec.rfind("relay:", 0) == 0) {
    return open_upstream_relay_source(Endpoint::parse(spec.substr(6)));
  }
  return open_device_source(spec);
}

RelayService::RelayService(std::unique_ptr<ByteSource> source, const Endpoint& listen_at,
                           RelayOptions options)
    : source_(std::move(source)), server_(listen_at, options) {
  server_.on_stick([this](const StickCommand& c) { source_->forward_stick(c); });
  ingest_ = std::thread([this] {
    mavlink::Parser parser;
    std::vector<std::uint8_t> buf(4096);
    while (!stopping_) {
      const std::size_t n = source_->read(buf);
      if (n == 0) break;
      const std::uint64_t stamp = monotonic_us();
      for (auto& ev : parser.feed({buf.data(), n})) {
        if (auto* d = std::get_if<mavlink::DecodedFrame>(&ev)) {
          server_.publish(d->bytes, stamp);
          ++ingested_;
        } else {
          ++rejected_;
        }
      }
    }
    ended_ = true;
  });
}

RelayService::~RelayService() { stop(); }

void RelayService::stop() {
  if (stopping_.exchange(true)) return;
  source_->interrupt();
  if (ingest_.joinable()) ingest_.join();
  server_.stop();
}

std::unique_ptr<RelayService> serve(std::unique_ptr<ByteSource> source, const Endpoint& listen_at,
                                    RelayOptions options) {
  return std::make_unique<RelayService>(std::move(source), listen_at, options);
}

}  // namespace fpvgl::relay
