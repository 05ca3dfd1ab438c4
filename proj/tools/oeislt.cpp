// oeislt: tool server, load generator and offline DSL utilities.

#include <signal.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "oeis/bench.hpp"
#include "oeis/dsl.hpp"
#include "oeis/evaluator.hpp"
#include "oeis/server.hpp"
#include "oeis/transpiler.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_serve(const oeis::server::ServerConfig& cfg) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  // Blocked before any thread starts so only sigwait below sees them.
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  ::signal(SIGPIPE, SIG_IGN);

  oeis::server::Server server(cfg);
  server.start();
  std::cout << "listening on " << server.bound_endpoint().to_string() << " workers=" << server.worker_count()
            << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "signal " << sig << ", draining" << std::endl;
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OEIS Lean tool server and utilities"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the tool server");
  std::string tcp, unix_path, lean_bin, stripped, bfile_dir, extensions;
  unsigned workers = 0;
  std::uint64_t budget = oeis::Budget{}.max_ticks;
  std::uint64_t max_bits = oeis::Budget{}.max_value_bits;
  double deadline = 30.0;
  std::size_t queue = 1024;
  auto* tcp_opt = serve->add_option("--tcp", tcp, "Listen on HOST:PORT (port 0 picks a free port)");
  auto* unix_opt = serve->add_option("--unix", unix_path, "Listen on a Unix domain socket path");
  tcp_opt->excludes(unix_opt);
  unix_opt->excludes(tcp_opt);
  serve->add_option("--workers", workers, "Worker threads (default: logical cores)")->check(CLI::PositiveNumber);
  serve->add_option("--budget", budget, "Per-evaluation tick cap")->check(CLI::PositiveNumber);
  serve->add_option("--max-bits", max_bits, "Per-evaluation value bit-length cap")->check(CLI::PositiveNumber);
  serve->add_option("--deadline", deadline, "Per-request deadline in seconds")->check(CLI::PositiveNumber);
  serve->add_option("--lean-bin", lean_bin, "External Lean executable for compile with external=true");
  serve->add_option("--stripped", stripped, "OEIS stripped file");
  serve->add_option("--bfile-dir", bfile_dir, "Directory of b<digits>.txt files");
  serve->add_option("--extensions", extensions, "Comma-separated extension commands (echo,sequence,register,info)");
  serve->add_option("--queue", queue, "Bounded request queue capacity")->check(CLI::PositiveNumber);

  // bench
  auto* bench = app.add_subcommand("bench", "Closed-loop load test against a running server");
  std::string target, cmd = "eval", corpus, format = "table", clients_list = "1";
  double duration = 30.0, warmup = 3.0, interval = 1.0;
  int pid = 0;
  bench->add_option("--target", target, "tcp://HOST:PORT or unix://PATH")->required();
  bench->add_option("--clients", clients_list, "Client count, or a comma-separated list for several runs");
  bench->add_option("--duration", duration, "Measured seconds per run")->check(CLI::PositiveNumber);
  bench->add_option("--warmup", warmup, "Excluded warmup seconds")->check(CLI::NonNegativeNumber);
  bench->add_option("--cmd", cmd, "Command: ready, compile, eval, prove")
      ->check(CLI::IsMember({"ready", "compile", "eval", "prove", "gen"}));
  bench->add_option("--corpus", corpus, "File of request args objects, one per line");
  bench->add_option("--format", format, "table, csv or jsonl")->check(CLI::IsMember({"table", "csv", "jsonl"}));
  bench->add_option("--pid", pid, "Server process to sample for CPU and memory");
  bench->add_option("--interval", interval, "Resource sampling interval in seconds")->check(CLI::PositiveNumber);

  // gen
  auto* gen = app.add_subcommand("gen", "Print the Lean definition for a DSL program");
  std::string src, src_file, name = "f", mode = "simplified", tag;
  std::int64_t offset = 0;
  std::optional<std::int64_t> max_index;
  gen->add_option("--src", src, "Program text");
  gen->add_option("--file", src_file, "File holding the program text");
  gen->add_option("--name", name, "Lean definition name");
  gen->add_option("--mode", mode, "direct or simplified")->check(CLI::IsMember({"direct", "simplified"}));
  gen->add_option("--tag", tag, "OEIS tag for the attribute header");
  gen->add_option("--offset", offset, "Sequence offset");
  gen->add_option("--max-index", max_index, "Largest derived index");

  // eval
  auto* eval = app.add_subcommand("eval", "Print a(n) for a range of n");
  std::string eval_src;
  std::int64_t from = 0, to = 10;
  eval->add_option("--src", eval_src, "Program text")->required();
  eval->add_option("--from", from, "First index");
  eval->add_option("--to", to, "Last index");
  eval->add_option("--budget", budget, "Tick budget per index")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve->parsed()) {
      oeis::server::ServerConfig cfg;
      if (!unix_path.empty()) cfg.listen = oeis::net::Endpoint::unix_socket(unix_path);
      else if (!tcp.empty()) cfg.listen = oeis::net::Endpoint::parse(tcp);
      else throw std::runtime_error("one of --tcp or --unix is required");
      cfg.workers = workers;
      cfg.budget = oeis::Budget{budget, max_bits};
      cfg.request_deadline = std::chrono::milliseconds(static_cast<std::int64_t>(deadline * 1000));
      if (!lean_bin.empty()) cfg.lean_toolchain = lean_bin;
      cfg.extensions = split_commas(extensions);
      cfg.queue_capacity = queue;
      cfg.stripped = stripped;
      cfg.bfile_dir = bfile_dir;
      return run_serve(cfg);
    }
    if (bench->parsed()) {
      oeis::bench::LoadConfig cfg;
      cfg.target = oeis::net::Endpoint::parse(target);
      cfg.duration_s = duration;
      cfg.warmup_s = warmup;
      cfg.command = cmd;
      cfg.sample_interval_s = interval;
      if (!corpus.empty()) cfg.corpus = oeis::bench::load_corpus(corpus);
      if (pid > 0) cfg.pid = pid;
      std::vector<oeis::bench::LoadReport> reports;
      auto fmt = oeis::bench::parse_format(format);
      for (const auto& c : split_commas(clients_list)) {
        cfg.clients = static_cast<unsigned>(std::stoul(c));
        reports.push_back(oeis::bench::run_load(cfg));
        if (fmt == oeis::bench::Format::Jsonl) std::cout << oeis::bench::render_report({reports.back()}, fmt) << std::flush;
      }
      if (fmt != oeis::bench::Format::Jsonl) std::cout << oeis::bench::render_report(reports, fmt);
      return 0;
    }
    if (gen->parsed()) {
      std::string text = !src_file.empty() ? read_file(src_file) : src;
      if (text.empty()) throw std::runtime_error("one of --src or --file is required");
      std::optional<oeis::DefinitionMeta> meta;
      if (!tag.empty()) meta = oeis::DefinitionMeta{tag, offset, max_index.value_or(offset), max_index.has_value()};
      auto e = oeis::parse_program(text);
      auto m = mode == "direct" ? oeis::CodegenMode::Direct : oeis::CodegenMode::Simplified;
      std::cout << oeis::dsl_to_lean(e, name, m, meta).text;
      return 0;
    }
    if (eval->parsed()) {
      auto e = oeis::parse_program(eval_src);
      for (std::int64_t n = from; n <= to; ++n) {
        auto out = oeis::evaluate(e, {oeis::Integer(n), oeis::Integer(0)}, {budget, max_bits});
        std::cout << n << ' ' << (out.ok() ? out.value->to_string() : std::string(oeis::eval_error_name(*out.error)))
                  << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
