#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "oeis/commands.hpp"
#include "oeis/net.hpp"

namespace oeis::server {

struct ServerConfig {
  net::Endpoint listen = net::Endpoint::tcp("127.0.0.1", 0);
  unsigned workers = 0;  // 0 selects the number of logical cores
  Budget budget;
  std::chrono::milliseconds request_deadline{30'000};
  std::optional<std::string> lean_toolchain;
  std::vector<std::string> extensions;
  std::size_t queue_capacity = 1024;
  std::size_t max_line_bytes = 16u << 20;
  std::size_t max_connections = 4096;
  std::string stripped;   // optional stripped file
  std::string bfile_dir;  // optional b-file directory
};

// Fixed thread count consuming a bounded FIFO.
class WorkerPool {
 public:
  WorkerPool(unsigned threads, std::size_t capacity);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  // False when the queue is full or the pool is stopping.
  bool try_submit(std::function<void()> task);
  // Runs every queued task, then joins.
  void shutdown();
  unsigned size() const { return static_cast<unsigned>(threads_.size()); }

 private:
  void run();
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  std::size_t capacity_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

class Server {
 public:
  // Throws net::BindError when the endpoint cannot be bound, DataError on bad data files.
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  // Stops accepting, lets in-flight requests finish (bounded by their deadline), joins.
  void stop();
  // Blocks until stop() has completed.
  void wait();

  // The actual endpoint, with the kernel-assigned port for TCP port 0.
  net::Endpoint bound_endpoint() const { return bound_; }
  const CommandRegistry& commands() const { return registry_; }
  ServerContext& context() { return context_; }
  unsigned worker_count() const { return pool_->size(); }

 private:
  struct Connection;
  void accept_loop();
  void serve_connection(std::shared_ptr<Connection> conn);
  std::string handle_line(const std::string& line);
  void reap_finished();

  ServerConfig config_;
  CommandRegistry registry_;
  ServerContext context_;
  std::unique_ptr<WorkerPool> pool_;
  net::Socket listener_;
  net::Endpoint bound_;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;

  std::mutex conn_mu_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::mutex done_mu_;
  std::condition_variable done_cv_;
  bool done_ = false;
  bool started_ = false;
};

}  // namespace oeis::server
