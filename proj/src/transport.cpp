#include "expunge/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <fmt/format.h>

namespace expunge {

namespace {

[[noreturn]] void throw_errno(const char* what) {
  throw Error(ErrorCode::Io, fmt::format("{}: {}", what, std::strerror(errno)));
}

void write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    auto w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw_errno("send");
    }
    p += w;
    n -= static_cast<std::size_t>(w);
  }
}

// Returns the number of bytes read before EOF.
std::size_t read_all(int fd, std::uint8_t* p, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    auto r = ::recv(fd, p + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw_errno("recv");
    }
    if (r == 0) break;
    got += static_cast<std::size_t>(r);
  }
  return got;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

wire::Frame dispatch(const Handler& handler, const wire::Frame& request) noexcept {
  try {
    return handler(request);
  } catch (const Error& e) {
    return wire::error_frame(e.code(), e.what());
  } catch (const std::exception& e) {
    return wire::error_frame(ErrorCode::Protocol, e.what());
  }
}

namespace detail {

void send_frame(int fd, const wire::Frame& f) {
  std::uint8_t header[wire::kFrameHeaderSize];
  const auto len = static_cast<std::uint32_t>(f.body.size() + 1);
  for (int i = 0; i < 4; ++i) header[i] = static_cast<std::uint8_t>(len >> (24 - 8 * i));
  header[4] = static_cast<std::uint8_t>(f.type);
  write_all(fd, header, sizeof header);
  write_all(fd, f.body.data(), f.body.size());
}

std::optional<wire::Frame> recv_frame(int fd) {
  std::uint8_t header[wire::kFrameHeaderSize];
  auto got = read_all(fd, header, sizeof header);
  if (got == 0) return std::nullopt;
  if (got < sizeof header) throw Error(ErrorCode::Io, "connection closed inside a frame header");
  auto [type, len] = wire::parse_frame_header(ByteView(header, sizeof header));
  wire::Frame f{type, Bytes(len)};
  if (read_all(fd, f.body.data(), len) != len) throw Error(ErrorCode::Io, "connection closed inside a frame");
  return f;
}

}  // namespace detail

wire::Frame LoopbackChannel::request(const wire::Frame& f) {
  std::lock_guard lock(mutex_);
  auto in = wire::decode_frame(wire::encode_frame(f));
  auto out = dispatch(handler_, in);
  return wire::decode_frame(wire::encode_frame(out));
}

TcpServer::TcpServer(Handler handler, std::uint16_t port) : handler_(std::move(handler)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw_errno("socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
    ::close(listen_fd_);
    throw_errno("bind/listen");
  }
  socklen_t alen = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &alen);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
  if (stopped_.exchange(true)) return;
  acceptor_.request_stop();
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(mutex_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& w : workers_) {
    w.request_stop();
    if (w.joinable()) w.join();
  }
  ::close(listen_fd_);
}

void TcpServer::accept_loop(std::stop_token st) {
  while (!st.stop_requested()) {
    pollfd p{listen_fd_, POLLIN, 0};
    int r = ::poll(&p, 1, 50);
    if (r <= 0) continue;
    int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    set_nodelay(fd);
    std::lock_guard lock(mutex_);
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd](std::stop_token wst) { serve(fd, wst); });
  }
}

void TcpServer::serve(int fd, std::stop_token st) {
  try {
    while (!st.stop_requested()) {
      auto req = detail::recv_frame(fd);
      if (!req) break;
      detail::send_frame(fd, dispatch(handler_, *req));
    }
  } catch (const std::exception&) {
    // Broken peer; drop the connection.
  }
  std::lock_guard lock(mutex_);
  std::erase(client_fds_, fd);
  ::close(fd);
}

TcpChannel::TcpChannel(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw_errno("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    ::close(fd_);
    throw_errno("connect");
  }
  set_nodelay(fd_);
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

wire::Frame TcpChannel::request(const wire::Frame& f) {
  std::lock_guard lock(mutex_);
  detail::send_frame(fd_, f);
  auto resp = detail::recv_frame(fd_);
  if (!resp) throw Error(ErrorCode::Io, "server closed the connection");
  return std::move(*resp);
}

}  // namespace expunge
