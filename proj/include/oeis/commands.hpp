#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oeis/dsl.hpp"
#include "oeis/evaluator.hpp"
#include "oeis/oeis_data.hpp"
#include "oeis/protocol.hpp"

namespace oeis::server {

using protocol::json;

extern const char* const kVersion;

// Parsed programs addressable by their content digest. Least recently used
// entries are evicted beyond `capacity`, so memory stays bounded.
class HandleCache {
 public:
  explicit HandleCache(std::size_t capacity = 4096) : capacity_(capacity) {}
  void put(const std::string& handle, const Expr& e);
  std::optional<Expr> get(const std::string& handle);
  std::size_t size() const;

 private:
  using Entry = std::pair<std::string, Expr>;
  mutable std::mutex mu_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

// "h" + 16 hex digits of FNV-1a-64 over the canonical printed program.
std::string program_handle(const Expr& e);

struct ServerContext {
  Budget budget_cap;
  std::chrono::milliseconds request_deadline{30'000};
  std::optional<std::string> lean_toolchain;
  std::shared_ptr<const SequenceRegistry> sequences = std::make_shared<SequenceRegistry>();
  HandleCache handles;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  // Single access path for the mutable definition registry.
  template <class F>
  auto with_definitions(F&& f) {
    std::lock_guard lock(definitions_mu_);
    return f(definitions_);
  }

 private:
  std::mutex definitions_mu_;
  DefinitionRegistry definitions_;
};

class CommandRegistry;

struct RequestContext {
  ServerContext& server;
  const CommandRegistry& registry;
  Deadline deadline;
};

using HandlerFn = std::function<json(const json& args, RequestContext& ctx)>;

struct CommandHandler {
  enum class Kind { Core, Extension };
  std::string name;
  Kind kind = Kind::Core;
  HandlerFn fn;
};

class DuplicateCommand : public std::runtime_error {
 public:
  explicit DuplicateCommand(const std::string& name) : std::runtime_error("command already registered: " + name) {}
};

class CommandRegistry {
 public:
  void add(CommandHandler handler);
  const CommandHandler* find(std::string_view name) const;
  // Registration order.
  std::vector<std::string> names() const;

 private:
  std::vector<CommandHandler> handlers_;
};

// ready, gen, compile, eval, prove.
void register_core_commands(CommandRegistry& registry);

// Names accepted by register_extension.
std::vector<std::string> available_extensions();
// Throws std::invalid_argument for names outside available_extensions().
void register_extension(CommandRegistry& registry, std::string_view name);

// One request line to one response object. Never throws.
json dispatch(const CommandRegistry& registry, ServerContext& server, std::string_view line, Deadline deadline);

}  // namespace oeis::server
