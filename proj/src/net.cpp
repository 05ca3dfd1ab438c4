#include "oeis/net.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

namespace oeis::net {

Endpoint Endpoint::parse(std::string_view text) {
  Endpoint ep;
  if (text.rfind("unix://", 0) == 0) {
    ep.kind = Kind::Unix;
    ep.path = std::string(text.substr(7));
    if (ep.path.empty()) throw NetError("empty unix socket path");
    return ep;
  }
  if (text.rfind("tcp://", 0) == 0) text.remove_prefix(6);
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw NetError("expected HOST:PORT, got '" + std::string(text) + "'");
  ep.kind = Kind::Tcp;
  ep.host = std::string(text.substr(0, colon));
  if (ep.host.empty()) ep.host = "127.0.0.1";
  std::string port(text.substr(colon + 1));
  char* end = nullptr;
  long p = std::strtol(port.c_str(), &end, 10);
  if (port.empty() || *end != '\0' || p < 0 || p > 65535) throw NetError("bad port '" + port + "'");
  ep.port = static_cast<std::uint16_t>(p);
  return ep;
}

Endpoint Endpoint::tcp(std::string host, std::uint16_t port) {
  Endpoint ep;
  ep.kind = Kind::Tcp;
  ep.host = std::move(host);
  ep.port = port;
  return ep;
}

Endpoint Endpoint::unix_socket(std::string path) {
  Endpoint ep;
  ep.kind = Kind::Unix;
  ep.path = std::move(path);
  return ep;
}

std::string Endpoint::to_string() const {
  if (kind == Kind::Unix) return "unix://" + path;
  return "tcp://" + host + ":" + std::to_string(port);
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::shutdown_both() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_un unix_addr(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) throw NetError("unix socket path too long: " + path);
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  return addr;
}

addrinfo* resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  std::string port = std::to_string(ep.port);
  int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw NetError("cannot resolve " + ep.host + ": " + gai_strerror(rc));
  return res;
}

}  // namespace

Socket listen_on(const Endpoint& ep, int backlog) {
  if (ep.kind == Endpoint::Kind::Unix) {
    Socket s(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!s.valid()) throw BindError(errno_text("socket"));
    ::unlink(ep.path.c_str());
    auto addr = unix_addr(ep.path);
    if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw BindError(errno_text(("bind " + ep.path).c_str()));
    }
    if (::listen(s.fd(), backlog) != 0) throw BindError(errno_text("listen"));
    return s;
  }
  addrinfo* res = resolve(ep, true);
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s.valid()) continue;
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), backlog) == 0) {
      ::freeaddrinfo(res);
      return s;
    }
    last_error = errno_text("bind");
  }
  ::freeaddrinfo(res);
  throw BindError(last_error + " (" + ep.to_string() + ")");
}

std::uint16_t bound_port(const Socket& s) {
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) return 0;
  if (addr.ss_family == AF_INET) return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  if (addr.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  return 0;
}

Socket connect_to(const Endpoint& ep) {
  if (ep.kind == Endpoint::Kind::Unix) {
    Socket s(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!s.valid()) throw NetError(errno_text("socket"));
    auto addr = unix_addr(ep.path);
    if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw NetError(errno_text(("connect " + ep.path).c_str()));
    }
    return s;
  }
  addrinfo* res = resolve(ep, false);
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s.valid()) continue;
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      ::freeaddrinfo(res);
      return s;
    }
    last_error = errno_text("connect");
  }
  ::freeaddrinfo(res);
  throw NetError(last_error + " (" + ep.to_string() + ")");
}

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_text("send"));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

LineReader::Status LineReader::read_line(std::string& out, std::chrono::milliseconds timeout) {
  for (;;) {
    auto nl = buf_.find('\n', scanned_);
    if (nl != std::string::npos) {
      out.assign(buf_, 0, nl);
      if (!out.empty() && out.back() == '\r') out.pop_back();
      buf_.erase(0, nl + 1);
      scanned_ = 0;
      return Status::Line;
    }
    scanned_ = buf_.size();
    if (buf_.size() > max_line_) return Status::TooLong;

    pollfd pfd{fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc == 0) return Status::Timeout;
    if (rc < 0) {
      if (errno == EINTR) continue;
      return Status::Error;
    }
    char chunk[16384];
    ssize_t n = ::read(fd_, chunk, sizeof(chunk));
    if (n == 0) {
      if (buf_.empty()) return Status::Eof;
      out = std::move(buf_);  // final unterminated line
      buf_.clear();
      scanned_ = 0;
      return Status::Line;
    }
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return Status::Error;
    }
    buf_.append(chunk, static_cast<std::size_t>(n));
  }
}

Client::Client(const Endpoint& ep, std::size_t max_line) : sock_(connect_to(ep)), reader_(sock_.fd(), max_line) {}

std::string Client::roundtrip(std::string_view line, std::chrono::milliseconds timeout) {
  std::string msg(line);
  msg += '\n';
  write_all(sock_.fd(), msg);
  std::string out;
  auto st = reader_.read_line(out, timeout);
  if (st != LineReader::Status::Line) throw NetError("no response from server");
  return out;
}

void Client::send_raw(std::string_view bytes) { write_all(sock_.fd(), bytes); }

LineReader::Status Client::read_line(std::string& out, std::chrono::milliseconds timeout) {
  return reader_.read_line(out, timeout);
}

}  // namespace oeis::net
