#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "oeis/net.hpp"
#include "oeis/protocol.hpp"
#include "oeis/server.hpp"

using namespace oeis;
using namespace oeis::server;
using protocol::json;
using namespace std::chrono_literals;

namespace {

constexpr const char* kPow2 = R"(loop(\(x,y).2 * x, x, 1))";

ServerConfig test_config() {
  ServerConfig cfg;
  cfg.workers = 2;
  cfg.request_deadline = 10s;
  return cfg;
}

json rpc(net::Client& c, const json& req) { return json::parse(c.roundtrip(req.dump())); }

}  // namespace

TEST_CASE("TCP port 0 binds and serves every core command") {
  Server srv(test_config());
  srv.start();
  auto ep = srv.bound_endpoint();
  REQUIRE(ep.kind == net::Endpoint::Kind::Tcp);
  CHECK(ep.port != 0);
  net::Client c(ep);

  auto ready = rpc(c, {{"cmd", "ready"}, {"id", 1}});
  CHECK(ready["id"] == 1);
  CHECK(ready["result"]["commands"] == json::array({"ready", "gen", "compile", "eval", "prove"}));

  auto gen = rpc(c, {{"cmd", "gen"}, {"args", {{"src", kPow2}, {"name", "PowersOfTwo"}}}, {"id", 2}});
  REQUIRE(gen["status"] == "ok");
  auto compile = rpc(c, {{"cmd", "compile"}, {"args", {{"lean", gen["result"]["lean"]}}}, {"id", 3}});
  CHECK(compile["result"]["ok"] == true);
  auto eval = rpc(c, {{"cmd", "eval"},
                      {"args", {{"handle", gen["result"]["handle"]}, {"values", json::parse(R"([[0,1],[1,2],[2,4],[3,8]])")}}},
                      {"id", 4}});
  CHECK(eval["result"]["matches"] == true);
  auto prove = rpc(c, {{"cmd", "prove"},
                       {"args", {{"handle", gen["result"]["handle"]}, {"name", "PowersOfTwo"}, {"values", json::parse("[[0,null],[1,null]]")}}},
                       {"id", 5}});
  CHECK(prove["result"]["proved"] == json::array({0, 1}));
  srv.stop();
}

TEST_CASE("Unix socket endpoint") {
  auto path = (std::filesystem::temp_directory_path() / ("oeis_test_" + std::to_string(::getpid()) + ".sock")).string();
  auto cfg = test_config();
  cfg.listen = net::Endpoint::unix_socket(path);
  cfg.extensions = {"echo"};
  {
    Server srv(cfg);
    srv.start();
    CHECK(std::filesystem::exists(path));
    net::Client c(net::Endpoint::parse("unix://" + path));
    auto r = rpc(c, {{"cmd", "echo"}, {"args", {{"k", "v"}}}, {"id", "u"}});
    CHECK(r["result"] == json({{"k", "v"}}));
    CHECK(rpc(c, {{"cmd", "ready"}})["result"]["commands"].size() == 6);
    srv.stop();
  }
  CHECK_FALSE(std::filesystem::exists(path));
}

TEST_CASE("binding an occupied port raises BindError") {
  Server a(test_config());
  auto cfg = test_config();
  cfg.listen = a.bound_endpoint();
  CHECK_THROWS_AS(Server{cfg}, net::BindError);
}

TEST_CASE("every line gets one response, including malformed and blank lines") {
  Server srv(test_config());
  srv.start();
  net::Client c(srv.bound_endpoint());
  c.send_raw("\n{\"cmd\":\"ready\",\"id\":\"x\"}\r\nnot json\n{\"cmd\":\"missing\",\"id\":9}\n");
  std::vector<json> got;
  for (int i = 0; i < 4; ++i) {
    std::string line;
    REQUIRE(c.read_line(line, 5s) == net::LineReader::Status::Line);
    got.push_back(json::parse(line));
  }
  CHECK(got[0]["error"]["code"] == "bad_request");
  CHECK(got[1]["id"] == "x");
  CHECK(got[1]["status"] == "ok");
  CHECK(got[2]["error"]["code"] == "bad_request");
  CHECK(got[3]["error"]["code"] == "unknown_command");
  CHECK(got[3]["id"] == 9);
  srv.stop();
}

TEST_CASE("concurrent connections keep their responses separate") {
  Server srv(test_config());
  srv.start();
  std::atomic<int> wrong{0};
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&, t] {
      net::Client c(srv.bound_endpoint());
      for (int i = 0; i < 50; ++i) {
        int n = (t * 7 + i) % 40;
        json req = {{"cmd", "eval"}, {"id", t * 1000 + i},
                    {"args", {{"src", kPow2}, {"values", json::array({json::array({n, nullptr})})}}}};
        auto r = rpc(c, req);
        std::string expect = std::to_string(std::uint64_t{1} << n);
        if (r["id"] != t * 1000 + i || r["result"]["results"][0]["computed"] != expect) ++wrong;
      }
    });
  }
  for (auto& t : ts) t.join();
  CHECK(wrong == 0);
  srv.stop();
}

TEST_CASE("pipelined requests on one connection are answered in order") {
  Server srv(test_config());
  srv.start();
  net::Client c(srv.bound_endpoint());
  std::string batch;
  for (int i = 0; i < 100; ++i) batch += json({{"cmd", "ready"}, {"id", i}}).dump() + "\n";
  c.send_raw(batch);
  for (int i = 0; i < 100; ++i) {
    std::string line;
    REQUIRE(c.read_line(line, 5s) == net::LineReader::Status::Line);
    CHECK(json::parse(line)["id"] == i);
  }
  srv.stop();
}

TEST_CASE("over-long lines are rejected and the connection is closed") {
  auto cfg = test_config();
  cfg.max_line_bytes = 1024;
  Server srv(cfg);
  srv.start();
  net::Client c(srv.bound_endpoint());
  c.send_raw(std::string(4096, 'a'));
  std::string line;
  REQUIRE(c.read_line(line, 5s) == net::LineReader::Status::Line);
  CHECK(json::parse(line)["error"]["code"] == "bad_request");
  CHECK(c.read_line(line, 5s) == net::LineReader::Status::Eof);
  net::Client fresh(srv.bound_endpoint());
  CHECK(rpc(fresh, {{"cmd", "ready"}})["status"] == "ok");
  srv.stop();
}

TEST_CASE("request deadline is enforced through the socket") {
  auto cfg = test_config();
  cfg.request_deadline = 100ms;
  cfg.budget = Budget{4'000'000'000ULL, 4096};
  Server srv(cfg);
  srv.start();
  net::Client c(srv.bound_endpoint());
  auto t0 = std::chrono::steady_clock::now();
  auto r = rpc(c, {{"cmd", "eval"}, {"id", "slow"}, {"args", {{"src", R"(compr(\(x,y).1, 0))"}, {"values", json::parse("[[0,null]]")}}}});
  CHECK(std::chrono::steady_clock::now() - t0 < 5s);
  CHECK(r["id"] == "slow");
  CHECK(r["error"]["code"] == "deadline_exceeded");
  CHECK(rpc(c, {{"cmd", "ready"}})["status"] == "ok");
  srv.stop();
}

TEST_CASE("a full queue answers overloaded") {
  auto cfg = test_config();
  cfg.workers = 1;
  cfg.queue_capacity = 1;
  cfg.request_deadline = 2s;
  cfg.budget = Budget{4'000'000'000ULL, 4096};
  Server srv(cfg);
  srv.start();
  json slow = {{"cmd", "eval"}, {"args", {{"src", R"(compr(\(x,y).1, 0))"}, {"values", json::parse("[[0,null]]")}}}};
  std::vector<std::unique_ptr<net::Client>> clients;
  for (int i = 0; i < 4; ++i) {
    clients.push_back(std::make_unique<net::Client>(srv.bound_endpoint()));
    json req = slow;
    req["id"] = i;
    clients.back()->send_raw(req.dump() + "\n");
    std::this_thread::sleep_for(50ms);
  }
  int overloaded = 0, deadline = 0;
  for (auto& c : clients) {
    std::string line;
    REQUIRE(c->read_line(line, 10s) == net::LineReader::Status::Line);
    auto code = json::parse(line)["error"]["code"];
    overloaded += code == "overloaded";
    deadline += code == "deadline_exceeded";
  }
  CHECK(overloaded >= 1);
  CHECK(overloaded + deadline == 4);
  srv.stop();
}

TEST_CASE("stop is idempotent and joins cleanly with open clients") {
  Server srv(test_config());
  srv.start();
  net::Client c(srv.bound_endpoint());
  CHECK(rpc(c, {{"cmd", "ready"}})["status"] == "ok");
  srv.stop();
  srv.stop();
  std::string line;
  CHECK(c.read_line(line, 2s) != net::LineReader::Status::Line);
}

TEST_CASE("worker pool drains queued work on shutdown") {
  WorkerPool pool(2, 100);
  std::atomic<int> done{0};
  for (int i = 0; i < 50; ++i) CHECK(pool.try_submit([&] { ++done; }));
  pool.shutdown();
  CHECK(done == 50);
  CHECK_FALSE(pool.try_submit([] {}));
}

TEST_CASE("endpoint parsing") {
  auto a = net::Endpoint::parse("tcp://localhost:9000");
  CHECK(a.kind == net::Endpoint::Kind::Tcp);
  CHECK(a.host == "localhost");
  CHECK(a.port == 9000);
  CHECK(net::Endpoint::parse("127.0.0.1:5").to_string() == "tcp://127.0.0.1:5");
  CHECK(net::Endpoint::parse("unix:///tmp/s").path == "/tmp/s");
  CHECK_THROWS(net::Endpoint::parse("tcp://nohost"));
  CHECK_THROWS(net::Endpoint::parse("tcp://h:99999"));
  CHECK_THROWS(net::Endpoint::parse("unix://"));
}
