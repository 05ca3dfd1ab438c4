#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oeis/bench.hpp"

namespace {

struct Run {
  int status;
  std::string out;
};

// Runs a shell command line and captures stdout.
Run run(const std::string& args) {
  std::string cmd = std::string("'") + OEISLT_BIN + "' " + args + " 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int st = ::pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string golden(const std::string& name) {
  std::ifstream in(std::string(OEIS_TEST_DATA) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gen reproduces the golden definitions") {
  auto r = run(R"(gen --src 'loop(\(x,y).2 * x, x, 1)' --name PowersOfTwo --tag A000079 --max-index 10)");
  CHECK(r.status == 0);
  CHECK(r.out == golden("A000079_definition.lean"));
  const char* l7 = R"('loop(\(x,y).(((2 * loop(\(x,y).x * y, 2 + 2, x)) - x) div y) + x, x, 1)')";
  CHECK(run(std::string("gen --name A011000 --mode direct --src ") + l7).out == golden("A011000_direct.lean"));
  CHECK(run(std::string("gen --name A011000 --src ") + l7).out == golden("A011000_simplified.lean"));
}

TEST_CASE("eval prints one value per index") {
  auto r = run(R"(eval --src 'loop(\(x,y).x * y, x, 1)' --from 3 --to 5)");
  CHECK(r.status == 0);
  CHECK(r.out == "3 6\n4 24\n5 120\n");
  CHECK(run("eval --src '1 div (x - 1)' --from 1 --to 1").out == "1 DivByZero\n");
}

TEST_CASE("bad invocations exit nonzero") {
  CHECK(run("").status != 0);
  CHECK(run("gen --src 'loop(x,1)'").status == 1);
  CHECK(run("gen --name f").status == 1);
  CHECK(run("serve --tcp 127.0.0.1:0 --unix /tmp/x.sock").status != 0);
  CHECK(run("bench --target tcp://127.0.0.1:1 --cmd ready --duration 1 --warmup 0").status == 1);
  CHECK(run("bench --target tcp://127.0.0.1:1 --format xml").status != 0);
}

TEST_CASE("serve and bench end to end") {
  int fds[2];
  REQUIRE(::pipe(fds) == 0);
  pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    ::dup2(fds[1], STDOUT_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    ::execl(OEISLT_BIN, OEISLT_BIN, "serve", "--tcp", "127.0.0.1:0", "--workers", "2", static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  oeis::net::LineReader reader(fds[0], 4096);
  std::string line;
  REQUIRE(reader.read_line(line, std::chrono::seconds(10)) == oeis::net::LineReader::Status::Line);
  ::close(fds[0]);
  REQUIRE(line.rfind("listening on tcp://127.0.0.1:", 0) == 0);
  CHECK(line.find(" workers=2") != std::string::npos);
  std::string target = line.substr(13, line.find(' ', 13) - 13);

  auto csv = run("bench --target " + target + " --clients 1,2 --duration 1 --warmup 0.2 --format csv --corpus '" +
                 OEIS_TOOLS_DATA + "/eval_corpus.jsonl' --pid " + std::to_string(pid) + " --interval 0.25");
  CHECK(csv.status == 0);
  std::istringstream in(csv.out);
  std::vector<std::string> rows;
  for (std::string l; std::getline(in, l);) rows.push_back(l);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("clients,median_latency_ms,throughput_rps", 0) == 0);
  CHECK(rows[1].rfind("1,", 0) == 0);
  CHECK(rows[2].rfind("2,", 0) == 0);
  CHECK(rows[2].find(",eval,") != std::string::npos);

  auto jsonl = run("bench --target " + target + " --cmd prove --duration 1 --warmup 0 --format jsonl --corpus '" +
                   OEIS_TOOLS_DATA + "/prove_corpus.jsonl'");
  CHECK(jsonl.status == 0);
  auto rep = oeis::bench::report_from_json(nlohmann::json::parse(jsonl.out));
  CHECK(rep.failures == 0);
  CHECK(rep.requests_sent > 0);

  auto compile = run("bench --target " + target + " --cmd compile --duration 1 --warmup 0 --format jsonl --corpus '" +
                     OEIS_TOOLS_DATA + "/compile_corpus.jsonl'");
  CHECK(oeis::bench::report_from_json(nlohmann::json::parse(compile.out)).failures == 0);

  ::kill(pid, SIGTERM);
  int st = 0;
  ::waitpid(pid, &st, 0);
  CHECK(WIFEXITED(st));
  CHECK(WEXITSTATUS(st) == 0);
}
