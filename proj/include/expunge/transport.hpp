#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "expunge/wire.hpp"

namespace expunge {

/// Turns one request frame into one response frame.
using Handler = std::function<wire::Frame(const wire::Frame&)>;

/// Wraps a handler so that any exception becomes an ERROR frame.
wire::Frame dispatch(const Handler& handler, const wire::Frame& request) noexcept;

/// Client side of a request/response channel.
class Channel {
 public:
  virtual ~Channel() = default;
  /// Sends one request and waits for its response. Transport failures throw
  /// Error(Io); an ERROR response is returned as-is.
  virtual wire::Frame request(const wire::Frame& f) = 0;
};

/// In-process channel. Frames still go through encode/decode so both ends
/// see exactly what a socket would carry.
class LoopbackChannel final : public Channel {
 public:
  explicit LoopbackChannel(Handler handler) : handler_(std::move(handler)) {}
  wire::Frame request(const wire::Frame& f) override;

 private:
  Handler handler_;
  std::mutex mutex_;
};

/// Length-prefixed frames over TCP on 127.0.0.1. Each connection is served
/// by its own thread, one request at a time.
class TcpServer {
 public:
  /// Port 0 picks a free port.
  explicit TcpServer(Handler handler, std::uint16_t port = 0);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  void stop();

 private:
  void accept_loop(std::stop_token st);
  void serve(int fd, std::stop_token st);

  Handler handler_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::mutex mutex_;
  std::vector<int> client_fds_;
  std::vector<std::jthread> workers_;
  std::jthread acceptor_;
  std::atomic<bool> stopped_{false};
};

class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(std::uint16_t port);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  wire::Frame request(const wire::Frame& f) override;

 private:
  int fd_ = -1;
  std::mutex mutex_;
};

namespace detail {
void send_frame(int fd, const wire::Frame& f);
/// Returns nullopt on a clean close before the first header byte.
std::optional<wire::Frame> recv_frame(int fd);
}  // namespace detail

}  // namespace expunge
