#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oeis::net {

struct Endpoint {
  enum class Kind { Tcp, Unix };
  Kind kind = Kind::Tcp;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::string path;

  // tcp://HOST:PORT, unix://PATH, or bare HOST:PORT.
  static Endpoint parse(std::string_view text);
  static Endpoint tcp(std::string host, std::uint16_t port);
  static Endpoint unix_socket(std::string path);
  std::string to_string() const;
};

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BindError : public NetError {
 public:
  using NetError::NetError;
};

// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { close(); }
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = o.release();
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    int f = fd_;
    fd_ = -1;
    return f;
  }
  void close();
  void shutdown_both();

 private:
  int fd_ = -1;
};

// Binds and listens; for TCP port 0 the kernel picks a port (see bound_port).
Socket listen_on(const Endpoint& ep, int backlog = 512);
std::uint16_t bound_port(const Socket& s);
Socket connect_to(const Endpoint& ep);

// Writes everything or throws NetError.
void write_all(int fd, std::string_view data);

// Buffered newline framing over a socket.
class LineReader {
 public:
  enum class Status { Line, Eof, TooLong, Timeout, Error };

  LineReader(int fd, std::size_t max_line) : fd_(fd), max_line_(max_line) {}

  // Waits at most `timeout` for data when the buffer holds no full line.
  Status read_line(std::string& out, std::chrono::milliseconds timeout);

 private:
  int fd_;
  std::size_t max_line_;
  std::string buf_;
  std::size_t scanned_ = 0;
};

// Synchronous request/response client over one persistent connection.
class Client {
 public:
  explicit Client(const Endpoint& ep, std::size_t max_line = 64u << 20);
  // Sends one line (newline appended) and returns the response line.
  std::string roundtrip(std::string_view line, std::chrono::milliseconds timeout = std::chrono::seconds(60));
  void send_raw(std::string_view bytes);
  LineReader::Status read_line(std::string& out, std::chrono::milliseconds timeout);

 private:
  Socket sock_;
  LineReader reader_;
};

}  // namespace oeis::net
