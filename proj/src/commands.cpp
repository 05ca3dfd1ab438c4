#include "oeis/commands.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <regex>

#include "oeis/transpiler.hpp"

extern char** environ;

namespace oeis::server {

using protocol::CommandFailure;

const char* const kVersion =
    "oeislt 1.0.0; prove = value verified by the trusted evaluator plus emitted theorem text; "
    "kernel checking only through the optional external toolchain";

// ---------------------------------------------------------------------------
// Handles

void HandleCache::put(const std::string& handle, const Expr& e) {
  std::lock_guard lock(mu_);
  if (auto it = index_.find(handle); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  lru_.emplace_front(handle, e);
  index_[handle] = lru_.begin();
  while (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
}

std::optional<Expr> HandleCache::get(const std::string& handle) {
  std::lock_guard lock(mu_);
  auto it = index_.find(handle);
  if (it == index_.end()) return std::nullopt;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->second;
}

std::size_t HandleCache::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

std::string program_handle(const Expr& e) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : print_program(e)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "h%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Registry

void CommandRegistry::add(CommandHandler handler) {
  if (find(handler.name) != nullptr) throw DuplicateCommand(handler.name);
  handlers_.push_back(std::move(handler));
}

const CommandHandler* CommandRegistry::find(std::string_view name) const {
  for (const auto& h : handlers_) {
    if (h.name == name) return &h;
  }
  return nullptr;
}

std::vector<std::string> CommandRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& h : handlers_) out.push_back(h.name);
  return out;
}

// ---------------------------------------------------------------------------
// Argument decoding

namespace {

[[noreturn]] void bad(const std::string& message) { throw CommandFailure("bad_request", message); }

const json* arg(const json& args, const char* key) {
  auto it = args.find(key);
  if (it == args.end() || it->is_null()) return nullptr;
  return &*it;
}

std::optional<std::string> opt_string(const json& args, const char* key) {
  const json* v = arg(args, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_string()) bad(std::string("\"") + key + "\" must be a string");
  return v->get<std::string>();
}

std::string req_string(const json& args, const char* key) {
  auto s = opt_string(args, key);
  if (!s) bad(std::string("missing \"") + key + "\"");
  return *s;
}

std::optional<std::int64_t> opt_int(const json& args, const char* key) {
  const json* v = arg(args, key);
  if (v == nullptr) return std::nullopt;
  auto n = protocol::integer_from_json(*v);
  std::optional<std::int64_t> small = n ? n->to_int64() : std::nullopt;
  if (!small) bad(std::string("\"") + key + "\" must be an integer in the 64-bit range");
  return small;
}

std::optional<bool> opt_bool(const json& args, const char* key) {
  const json* v = arg(args, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_boolean()) bad(std::string("\"") + key + "\" must be a boolean");
  return v->get<bool>();
}

Expr parse_src(const std::string& src) {
  try {
    return parse_program(src, ConstMode::Strict);
  } catch (const LexError& e) {
    throw CommandFailure("parse_error", e.what(), {{"offset", e.offset}});
  } catch (const ParseError& e) {
    throw CommandFailure("parse_error", e.what(), {{"offset", e.offset}});
  }
}

Expr program_arg(const json& args, RequestContext& ctx) {
  auto src = opt_string(args, "src");
  auto handle = opt_string(args, "handle");
  if (src) return parse_src(*src);
  if (handle) {
    auto e = ctx.server.handles.get(*handle);
    if (!e) throw CommandFailure("unknown_handle", "no program with handle " + *handle);
    return *e;
  }
  bad("one of \"src\" or \"handle\" is required");
}

Budget budget_arg(const json& args, const Budget& cap) {
  const json* v = arg(args, "budget");
  if (v == nullptr) return cap;
  Budget b = cap;
  auto read = [](const json& j, const char* what) -> std::uint64_t {
    auto n = protocol::integer_from_json(j);
    auto small = n ? n->to_int64() : std::nullopt;
    if (!small || *small <= 0) bad(std::string("budget ") + what + " must be a positive integer");
    return static_cast<std::uint64_t>(*small);
  };
  if (v->is_object()) {
    if (const json* t = arg(*v, "max_ticks")) b.max_ticks = read(*t, "max_ticks");
    if (const json* t = arg(*v, "max_value_bits")) b.max_value_bits = read(*t, "max_value_bits");
  } else {
    b.max_ticks = read(*v, "ticks");
  }
  if (b.max_ticks > cap.max_ticks || b.max_value_bits > cap.max_value_bits) {
    throw CommandFailure("budget_rejected", "requested budget exceeds the server cap",
                         {{"max_ticks", cap.max_ticks}, {"max_value_bits", cap.max_value_bits}});
  }
  return b;
}

using ValuePair = std::pair<Integer, std::optional<Integer>>;

std::vector<ValuePair> values_arg(const json& args) {
  const json* v = arg(args, "values");
  if (v == nullptr || !v->is_array() || v->empty()) bad("\"values\" must be a nonempty array of [n, value|null]");
  std::vector<ValuePair> out;
  out.reserve(v->size());
  for (const auto& item : *v) {
    if (!item.is_array() || item.empty() || item.size() > 2) bad("each value must be [n] or [n, value|null]");
    auto n = protocol::integer_from_json(item[0]);
    if (!n || n->sign() < 0 || !n->to_int64()) bad("indices must be nonnegative 64-bit integers");
    std::optional<Integer> expected;
    if (item.size() == 2 && !item[1].is_null()) {
      expected = protocol::integer_from_json(item[1]);
      if (!expected) bad("expected values must be integers, decimal strings or null");
    }
    out.emplace_back(*n, expected);
  }
  return out;
}

// Fills absent expected values from the loaded registry when a tag is given.
std::vector<std::string> fill_from_tag(const json& args, RequestContext& ctx, std::vector<ValuePair>& values) {
  std::vector<std::string> warnings;
  auto tag = opt_string(args, "tag");
  if (!tag) return warnings;
  const SequenceEntry* entry = ctx.server.sequences->find(*tag);
  if (entry == nullptr) {
    warnings.push_back("sequence " + *tag + " is not loaded; expected values not filled");
    return warnings;
  }
  for (auto& [n, expected] : values) {
    if (!expected) expected = entry->at(n);
  }
  return warnings;
}

std::string snake_error(EvalError e) {
  switch (e) {
    case EvalError::DivByZero: return "div_by_zero";
    case EvalError::NegativeComprIndex: return "negative_compr_index";
    case EvalError::BudgetExhausted: return "budget_exhausted";
    case EvalError::Overflow: return "overflow";
  }
  return "internal";
}

json index_json(const Integer& n) { return *n.to_int64(); }

json opt_integer_json(const std::optional<Integer>& v) {
  return v ? protocol::integer_to_json(*v) : json(nullptr);
}

[[noreturn]] void transpile_failure(const TranspileError& e) {
  switch (e.code) {
    case TranspileErrorCode::InvalidIdentifier: throw CommandFailure("invalid_name", e.what());
    default: throw CommandFailure("bad_request", e.what());
  }
}

// ---------------------------------------------------------------------------
// Core commands

json cmd_ready(const json&, RequestContext& ctx) {
  double up = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.server.started).count();
  return {{"ready", true}, {"version", kVersion}, {"commands", ctx.registry.names()}, {"uptime_seconds", up}};
}

json cmd_gen(const json& args, RequestContext& ctx) {
  std::string src = req_string(args, "src");
  std::string name = req_string(args, "name");
  if (!is_identifier(name)) throw CommandFailure("invalid_name", "not a valid Lean identifier: " + name);
  CodegenMode mode = CodegenMode::Simplified;
  if (auto m = opt_string(args, "mode")) {
    if (*m == "direct") mode = CodegenMode::Direct;
    else if (*m != "simplified") bad("\"mode\" must be \"direct\" or \"simplified\"");
  }
  std::optional<DefinitionMeta> meta;
  auto offset = opt_int(args, "offset");
  auto max_index = opt_int(args, "maxIndex");
  if (auto tag = opt_string(args, "tag")) {
    DefinitionMeta m;
    m.tag = *tag;
    m.offset = offset.value_or(0);
    m.derive = max_index.has_value();
    m.max_index = max_index.value_or(m.offset);
    meta = m;
  }
  Expr prog = parse_src(src);
  LeanSource lean;
  try {
    lean = dsl_to_lean(prog, name, mode, meta);
  } catch (const TranspileError& e) {
    transpile_failure(e);
  }
  std::string handle = program_handle(prog);
  ctx.server.handles.put(handle, prog);
  json warnings = json::array();
  if (count_nodes(prog, NodeKind::Compr) > 0) {
    warnings.push_back("compr is lowered with bounded search fuel " + std::to_string(CodegenOptions{}.compr_fuel));
  }
  if (offset && !meta) warnings.push_back("offset ignored without tag");
  return {{"lean", lean.text}, {"handle", handle}, {"warnings", warnings}};
}

json cmd_eval(const json& args, RequestContext& ctx) {
  Expr prog = program_arg(args, ctx);
  auto values = values_arg(args);
  Budget budget = budget_arg(args, ctx.server.budget_cap);
  auto warnings = fill_from_tag(args, ctx, values);
  MatchReport report = check_against(prog, values, budget, ctx.deadline);
  json results = json::array();
  for (const auto& r : report.records) {
    json rec = {{"n", index_json(r.n)},
                {"computed", opt_integer_json(r.computed.value)},
                {"expected", opt_integer_json(r.expected)},
                {"match", r.match},
                {"ticks", r.computed.ticks_used}};
    if (r.computed.error) rec["error"] = snake_error(*r.computed.error);
    results.push_back(std::move(rec));
  }
  json out = {{"matches", report.all_match},
              {"results", std::move(results)},
              {"first_mismatch", report.first_mismatch ? index_json(*report.first_mismatch) : json(nullptr)}};
  if (!warnings.empty()) out["warnings"] = warnings;
  return out;
}

bool valid_tactic(const std::string& t) {
  static const std::regex re(R"([A-Za-z0-9_ .,;:()\[\]<>=+*/'!?|&^~-]+)");
  return !t.empty() && t.size() <= 512 && std::regex_match(t, re);
}

json cmd_prove(const json& args, RequestContext& ctx) {
  Expr prog = program_arg(args, ctx);
  auto values = values_arg(args);
  Budget budget = budget_arg(args, ctx.server.budget_cap);
  auto name = opt_string(args, "name");
  if (!name) name = opt_string(args, "tag");
  if (!name) bad("one of \"name\" or \"tag\" is required");
  if (!is_identifier(*name)) throw CommandFailure("invalid_name", "not a valid Lean identifier: " + *name);
  std::string tactic = opt_string(args, "tactic").value_or("decide");
  if (!valid_tactic(tactic)) bad("\"tactic\" must be a single-line tactic expression");
  auto offset = opt_int(args, "offset");
  auto warnings = fill_from_tag(args, ctx, values);

  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<TheoremSpec> specs;
  json proved = json::array();
  json failed = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& [n, expected] = values[i];
    auto fail = [&](const std::string& reason) { failed.push_back({{"n", index_json(n)}, {"reason", reason}}); };
    if (i > 0 && values[i - 1].first == n) {
      fail("duplicate_index");
      continue;
    }
    if (offset && n < Integer(*offset)) {
      fail("below_offset");
      continue;
    }
    EvalOutcome out = evaluate(prog, Env{n, Integer(0)}, budget, ctx.deadline);
    if (!out.ok()) {
      fail(snake_error(*out.error));
      continue;
    }
    if (expected && *expected != *out.value) {
      fail("value_mismatch");
      continue;
    }
    specs.push_back(TheoremSpec{*name, n, *out.value, tactic});
    proved.push_back(index_json(n));
  }
  std::string theorems;
  if (!specs.empty()) {
    try {
      theorems = emit_theorems(specs).text;
    } catch (const TranspileError& e) {
      transpile_failure(e);
    }
  }
  json out = {{"theorems", theorems}, {"proved", proved}, {"failed", failed}};
  if (!warnings.empty()) out["warnings"] = warnings;
  return out;
}

// Runs `bin file` with stdout+stderr captured; kills it at the deadline.
std::pair<int, std::string> run_toolchain(const std::string& bin, const std::string& file, Deadline deadline) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw CommandFailure("internal", "pipe failed");
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], 1);
  posix_spawn_file_actions_adddup2(&actions, fds[1], 2);
  std::vector<std::string> argv_s = {bin, file};
  std::vector<char*> argv = {argv_s[0].data(), argv_s[1].data(), nullptr};
  pid_t pid = -1;
  int rc = ::posix_spawn(&pid, bin.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(fds[1]);
  if (rc != 0) {
    ::close(fds[0]);
    throw CommandFailure("toolchain_unavailable", "cannot execute " + bin);
  }
  std::string output;
  bool timed_out = false;
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{fds[0], POLLIN, 0};
    int p = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (p < 0 && errno != EINTR) break;
    if (p <= 0) continue;
    char buf[4096];
    ssize_t n = ::read(fds[0], buf, sizeof(buf));
    if (n <= 0) break;
    if (output.size() < (1u << 20)) output.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fds[0]);
  if (timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  ::waitpid(pid, &status, 0);
  if (timed_out) throw CommandFailure("deadline_exceeded", "external toolchain exceeded the request deadline");
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  return {code, output};
}

json toolchain_diagnostics(const std::string& output) {
  static const std::regex re(R"(^[^:\n]*:(\d+):\d+: (?:error|warning|info)[^:]*: ?(.*)$)");
  json diags = json::array();
  std::size_t start = 0;
  while (start < output.size()) {
    auto end = output.find('\n', start);
    if (end == std::string::npos) end = output.size();
    std::string line = output.substr(start, end - start);
    std::smatch m;
    if (std::regex_match(line, m, re)) diags.push_back({{"line", std::stoul(m[1].str())}, {"message", m[2].str()}});
    start = end + 1;
  }
  return diags;
}

json cmd_compile(const json& args, RequestContext& ctx) {
  std::string lean = req_string(args, "lean");
  if (lean.empty()) bad("\"lean\" must be nonempty");
  if (opt_bool(args, "external").value_or(false)) {
    if (!ctx.server.lean_toolchain) throw CommandFailure("toolchain_unavailable", "no external toolchain configured");
    char path[] = "/tmp/oeislt-XXXXXX.lean";
    int fd = ::mkstemps(path, 5);
    if (fd < 0) throw CommandFailure("internal", "cannot create temporary file");
    std::string body = lean;
    if (body.back() != '\n') body += '\n';
    bool wrote = ::write(fd, body.data(), body.size()) == static_cast<ssize_t>(body.size());
    ::close(fd);
    if (!wrote) {
      ::unlink(path);
      throw CommandFailure("internal", "cannot write temporary file");
    }
    std::pair<int, std::string> result;
    try {
      result = run_toolchain(*ctx.server.lean_toolchain, path, ctx.deadline);
    } catch (...) {
      ::unlink(path);
      throw;
    }
    ::unlink(path);
    json diags = toolchain_diagnostics(result.second);
    if (result.first != 0 && diags.empty()) diags.push_back({{"line", 0}, {"message", result.second}});
    return {{"ok", result.first == 0}, {"checker", "toolchain"}, {"diagnostics", diags}, {"exit_code", result.first}};
  }
  json diags = json::array();
  for (const auto& d : check_lean_structure(lean)) diags.push_back({{"line", d.line}, {"message", d.message}});
  return {{"ok", diags.empty()}, {"checker", "structural"}, {"diagnostics", diags}};
}

// ---------------------------------------------------------------------------
// Extensions

json ext_echo(const json& args, RequestContext&) { return args; }

json ext_sequence(const json& args, RequestContext& ctx) {
  std::string tag = req_string(args, "tag");
  const SequenceEntry* e = ctx.server.sequences->find(tag);
  if (e == nullptr) throw CommandFailure("bad_request", "sequence " + tag + " is not loaded");
  std::size_t limit = static_cast<std::size_t>(std::max<std::int64_t>(0, opt_int(args, "limit").value_or(100)));
  json values = json::array();
  for (std::size_t i = 0; i < e->values.size() && i < limit; ++i) values.push_back(protocol::integer_to_json(e->values[i]));
  return {{"tag", e->tag}, {"offset", e->offset}, {"count", e->values.size()}, {"values", values}};
}

json ext_register(const json& args, RequestContext& ctx) {
  if (const json* pair = arg(args, "equivalent")) {
    if (!pair->is_array() || pair->size() != 2 || !(*pair)[0].is_string() || !(*pair)[1].is_string()) {
      bad("\"equivalent\" must be [name, name]");
    }
    EquivalenceRecord rec{(*pair)[0].get<std::string>(), (*pair)[1].get<std::string>()};
    try {
      bool merged = ctx.server.with_definitions([&](DefinitionRegistry& r) { return r.register_equivalence(rec); });
      return {{"merged", merged}};
    } catch (const DataError& e) {
      throw CommandFailure("invalid_name", e.what());
    }
  }
  std::string name = req_string(args, "name");
  std::string tag = req_string(args, "tag");
  if (!is_identifier(name)) throw CommandFailure("invalid_name", "not a valid Lean identifier: " + name);
  DefinitionRecord rec{name, tag, program_arg(args, ctx), {}, 0, std::nullopt, {}};
  rec.offset = opt_int(args, "offset").value_or(0);
  rec.max_index = opt_int(args, "maxIndex");
  if (const json* proved = arg(args, "proved")) {
    if (!proved->is_array()) bad("\"proved\" must be an array of indices");
    for (const auto& p : *proved) {
      auto n = protocol::integer_from_json(p);
      auto small = n ? n->to_int64() : std::nullopt;
      if (!small) bad("proved indices must be 64-bit integers");
      rec.proved_indices.insert(*small);
    }
  }
  try {
    DefinitionMeta meta{rec.tag, rec.offset, rec.max_index.value_or(rec.offset), rec.max_index.has_value()};
    rec.lean = dsl_to_lean(rec.source, rec.name, CodegenMode::Simplified, meta);
  } catch (const TranspileError& e) {
    transpile_failure(e);
  }
  try {
    std::size_t count = ctx.server.with_definitions([&](DefinitionRegistry& r) {
      r.register_definition(std::move(rec));
      return r.size();
    });
    return {{"registered", true}, {"definitions", count}};
  } catch (const DataError& e) {
    if (e.code == DataError::Code::DuplicateName) throw CommandFailure("invalid_name", e.what());
    throw CommandFailure("bad_request", e.what());
  }
}

json ext_info(const json&, RequestContext& ctx) {
  return ctx.server.with_definitions([](DefinitionRegistry& r) {
    return json{{"definitions", export_info_json(r)}, {"classes", r.class_count()}};
  });
}

}  // namespace

void register_core_commands(CommandRegistry& registry) {
  using K = CommandHandler::Kind;
  registry.add({"ready", K::Core, cmd_ready});
  registry.add({"gen", K::Core, cmd_gen});
  registry.add({"compile", K::Core, cmd_compile});
  registry.add({"eval", K::Core, cmd_eval});
  registry.add({"prove", K::Core, cmd_prove});
}

std::vector<std::string> available_extensions() { return {"echo", "sequence", "register", "info"}; }

void register_extension(CommandRegistry& registry, std::string_view name) {
  using K = CommandHandler::Kind;
  if (name == "echo") registry.add({"echo", K::Extension, ext_echo});
  else if (name == "sequence") registry.add({"sequence", K::Extension, ext_sequence});
  else if (name == "register") registry.add({"register", K::Extension, ext_register});
  else if (name == "info") registry.add({"info", K::Extension, ext_info});
  else throw std::invalid_argument("unknown extension: " + std::string(name));
}

json dispatch(const CommandRegistry& registry, ServerContext& server, std::string_view line, Deadline deadline) {
  std::optional<json> id;
  try {
    protocol::Request req = protocol::parse_request(line);
    id = req.id;
    const CommandHandler* h = registry.find(req.cmd);
    if (h == nullptr) throw CommandFailure("unknown_command", "unknown command: " + req.cmd);
    RequestContext ctx{server, registry, deadline};
    return protocol::ok_response(id, h->fn(req.args, ctx));
  } catch (const CommandFailure& e) {
    if (!id && e.code == "bad_request") id = protocol::salvage_id(line);
    return protocol::error_response(id, e.code, e.what(), e.extra);
  } catch (const DeadlineExceeded&) {
    return protocol::error_response(id, "deadline_exceeded", "request exceeded its deadline");
  } catch (const std::exception& e) {
    return protocol::error_response(id, "internal", e.what());
  } catch (...) {
    return protocol::error_response(id, "internal", "unknown failure");
  }
}

}  // namespace oeis::server
