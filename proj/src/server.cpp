#include "oeis/server.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>

namespace oeis::server {

// ---------------------------------------------------------------------------
// WorkerPool

WorkerPool::WorkerPool(unsigned threads, std::size_t capacity) : capacity_(capacity) {
  if (threads == 0) threads = 1;
  threads_.reserve(threads);
  for (unsigned i = 0; i < threads; ++i) threads_.emplace_back([this] { run(); });
}

WorkerPool::~WorkerPool() { shutdown(); }

bool WorkerPool::try_submit(std::function<void()> task) {
  {
    std::lock_guard lock(mu_);
    if (stopping_ || queue_.size() >= capacity_) return false;
    queue_.push_back(std::move(task));
  }
  cv_.notify_one();
  return true;
}

void WorkerPool::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && threads_.empty()) return;
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
}

void WorkerPool::run() {
  for (;;) {
    std::function<void()> task;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task();
  }
}

// ---------------------------------------------------------------------------
// Server

struct Server::Connection {
  explicit Connection(net::Socket s) : sock(std::move(s)) {}
  net::Socket sock;
  std::thread thread;
  std::atomic<bool> finished{false};
};

namespace {

constexpr auto kPollInterval = std::chrono::milliseconds(200);
// Extra wait past the request deadline before a reader gives up on its worker.
constexpr auto kDeadlineGrace = std::chrono::seconds(2);

}  // namespace

Server::Server(ServerConfig config) : config_(std::move(config)) {
  if (config_.workers == 0) config_.workers = std::max(1u, std::thread::hardware_concurrency());
  register_core_commands(registry_);
  for (const auto& name : config_.extensions) register_extension(registry_, name);
  context_.budget_cap = config_.budget;
  context_.request_deadline = config_.request_deadline;
  context_.lean_toolchain = config_.lean_toolchain;
  if (!config_.stripped.empty() || !config_.bfile_dir.empty()) {
    context_.sequences = std::make_shared<const SequenceRegistry>(SequenceRegistry::load(config_.stripped, config_.bfile_dir));
  }
  listener_ = net::listen_on(config_.listen);
  bound_ = config_.listen;
  if (bound_.kind == net::Endpoint::Kind::Tcp) bound_.port = net::bound_port(listener_);
  pool_ = std::make_unique<WorkerPool>(config_.workers, config_.queue_capacity);
}

Server::~Server() { stop(); }

void Server::start() {
  if (started_) return;
  started_ = true;
  context_.started = std::chrono::steady_clock::now();
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
  bool expected = false;
  if (!stopping_.compare_exchange_strong(expected, true)) {
    wait();
    return;
  }
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::shared_ptr<Connection>> conns;
  {
    std::lock_guard lock(conn_mu_);
    conns.swap(connections_);
  }
  for (auto& c : conns) {
    if (c->thread.joinable()) c->thread.join();
  }
  if (pool_) pool_->shutdown();
  listener_.close();
  if (bound_.kind == net::Endpoint::Kind::Unix) ::unlink(bound_.path.c_str());
  {
    std::lock_guard lock(done_mu_);
    done_ = true;
  }
  done_cv_.notify_all();
}

void Server::wait() {
  std::unique_lock lock(done_mu_);
  done_cv_.wait(lock, [this] { return done_; });
}

void Server::reap_finished() {
  std::vector<std::shared_ptr<Connection>> finished;
  {
    std::lock_guard lock(conn_mu_);
    auto it = std::partition(connections_.begin(), connections_.end(), [](const auto& c) { return !c->finished.load(); });
    finished.assign(std::make_move_iterator(it), std::make_move_iterator(connections_.end()));
    connections_.erase(it, connections_.end());
  }
  for (auto& c : finished) {
    if (c->thread.joinable()) c->thread.join();
  }
}

void Server::accept_loop() {
  while (!stopping_.load()) {
    pollfd pfd{listener_.fd(), POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(kPollInterval.count()));
    reap_finished();
    if (rc <= 0) continue;
    int fd = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    net::Socket sock(fd);
    std::lock_guard lock(conn_mu_);
    if (connections_.size() >= config_.max_connections) {
      try {
        net::write_all(sock.fd(), protocol::serialize(protocol::error_response(std::nullopt, "overloaded",
                                                                           "connection limit reached")) +
                                      "\n");
      } catch (const net::NetError&) {
      }
      continue;
    }
    auto conn = std::make_shared<Connection>(std::move(sock));
    connections_.push_back(conn);
    conn->thread = std::thread([this, conn] { serve_connection(conn); });
  }
}

std::string Server::handle_line(const std::string& line) {
  Deadline deadline = std::chrono::steady_clock::now() + config_.request_deadline;
  auto promise = std::make_shared<std::promise<std::string>>();
  auto future = promise->get_future();
  bool queued = pool_->try_submit([this, promise, line, deadline] {
    std::string out;
    try {
      out = protocol::serialize(dispatch(registry_, context_, line, deadline));
    } catch (...) {
      out = protocol::serialize(protocol::error_response(std::nullopt, "internal", "serialization failure"));
    }
    promise->set_value(std::move(out));
  });
  if (!queued) {
    return protocol::serialize(
        protocol::error_response(protocol::salvage_id(line), "overloaded", "request queue is full"));
  }
  if (future.wait_until(deadline + kDeadlineGrace) != std::future_status::ready) {
    return protocol::serialize(
        protocol::error_response(protocol::salvage_id(line), "deadline_exceeded", "request exceeded its deadline"));
  }
  return future.get();
}

void Server::serve_connection(std::shared_ptr<Connection> conn) {
  net::LineReader reader(conn->sock.fd(), config_.max_line_bytes);
  std::string line;
  try {
    while (!stopping_.load()) {
      auto st = reader.read_line(line, kPollInterval);
      if (st == net::LineReader::Status::Timeout) continue;
      if (st == net::LineReader::Status::Line) {
        net::write_all(conn->sock.fd(), handle_line(line) + "\n");
        continue;
      }
      if (st == net::LineReader::Status::TooLong) {
        net::write_all(conn->sock.fd(),
                       protocol::serialize(protocol::error_response(
                           std::nullopt, "bad_request",
                           "request line exceeds " + std::to_string(config_.max_line_bytes) + " bytes")) +
                           "\n");
      }
      break;
    }
  } catch (const net::NetError&) {
    // peer went away mid-write
  }
  conn->sock.shutdown_both();
  conn->sock.close();
  conn->finished.store(true);
}

}  // namespace oeis::server
