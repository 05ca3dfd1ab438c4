#include "oeis/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "oeis/protocol.hpp"

namespace oeis::bench {

using Clock = std::chrono::steady_clock;

std::vector<json> parse_corpus(std::string_view text) {
  std::vector<json> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j = json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw CorpusError("corpus line " + std::to_string(line_no) + " is not a JSON object");
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<json> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read corpus " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str());
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  // Linear interpolation between closest ranks.
  double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

// ---------------------------------------------------------------------------
// /proc accounting

namespace {

std::string read_proc(int pid, const char* file) {
  std::ifstream in("/proc/" + std::to_string(pid) + "/" + file);
  if (!in) throw ProcessNotFound("no process with pid " + std::to_string(pid));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_proc() {
  std::ifstream in("/proc/self/stat");
  if (!in) throw PlatformUnsupported("process accounting under /proc is unavailable");
}

}  // namespace

std::uint64_t resident_bytes(int pid) {
  require_proc();
  std::istringstream in(read_proc(pid, "statm"));
  std::uint64_t size = 0, resident = 0;
  if (!(in >> size >> resident)) throw ProcessNotFound("unreadable statm for pid " + std::to_string(pid));
  return resident * static_cast<std::uint64_t>(::sysconf(_SC_PAGESIZE));
}

double cpu_seconds(int pid) {
  require_proc();
  std::string stat = read_proc(pid, "stat");
  // The command name may contain spaces; fields resume after the last ')'.
  auto close = stat.rfind(')');
  if (close == std::string::npos) throw ProcessNotFound("unreadable stat for pid " + std::to_string(pid));
  std::istringstream in(stat.substr(close + 2));
  std::string field;
  // Fields after ')' start at field 3 (state); utime and stime are fields 14 and 15.
  for (int i = 3; i < 14; ++i) in >> field;
  unsigned long long utime = 0, stime = 0;
  if (!(in >> utime >> stime)) throw ProcessNotFound("unreadable stat for pid " + std::to_string(pid));
  return static_cast<double>(utime + stime) / static_cast<double>(::sysconf(_SC_CLK_TCK));
}

std::vector<ResourceSample> sample_resources(int pid, std::chrono::duration<double> interval,
                                             std::chrono::duration<double> duration) {
  if (interval.count() <= 0) throw std::invalid_argument("sampling interval must be positive");
  std::vector<ResourceSample> out;
  double prev_cpu = cpu_seconds(pid);
  auto prev_t = Clock::now();
  auto end = prev_t + std::chrono::duration_cast<Clock::duration>(duration);
  auto next = prev_t;
  while (true) {
    next += std::chrono::duration_cast<Clock::duration>(interval);
    if (next > end + std::chrono::milliseconds(1)) break;
    std::this_thread::sleep_until(next);
    double cpu;
    std::uint64_t rss;
    try {
      cpu = cpu_seconds(pid);
      rss = resident_bytes(pid);
    } catch (const ProcessNotFound&) {
      break;  // target exited mid-run
    }
    auto now = Clock::now();
    double wall = std::chrono::duration<double>(now - prev_t).count();
    ResourceSample s;
    s.cpu_percent = wall > 0 ? 100.0 * (cpu - prev_cpu) / wall : 0;
    s.mem_gb = static_cast<double>(rss) / 1e9;
    out.push_back(s);
    prev_cpu = cpu;
    prev_t = now;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Load generation

LoadReport run_load(const LoadConfig& cfg) {
  if (cfg.clients == 0) throw std::invalid_argument("clients must be positive");
  if (cfg.duration_s <= 0) throw std::invalid_argument("duration must be positive");
  if (cfg.warmup_s < 0) throw std::invalid_argument("warmup must be nonnegative");
  if (cfg.command != "ready" && cfg.corpus.empty()) throw std::invalid_argument("corpus is empty");

  try {
    net::Client probe(cfg.target);
    auto rsp = json::parse(probe.roundtrip(R"({"cmd":"ready","args":{}})", std::chrono::seconds(10)));
    if (rsp.value("status", "") != "ok") throw TargetUnreachable("ready probe failed at " + cfg.target.to_string());
  } catch (const net::NetError& e) {
    throw TargetUnreachable(cfg.target.to_string() + ": " + e.what());
  } catch (const json::exception&) {
    throw TargetUnreachable("ready probe returned malformed data at " + cfg.target.to_string());
  }
  if (cfg.pid) cpu_seconds(*cfg.pid);  // ProcessNotFound before any load is generated

  const auto t0 = Clock::now();
  const auto measure_start = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.warmup_s));
  const auto measure_end =
      measure_start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.duration_s));

  std::mutex mu;
  std::vector<double> latencies;
  std::uint64_t sent = 0, failures = 0;

  auto client_loop = [&](unsigned index) {
    std::vector<double> local;
    std::uint64_t local_sent = 0, local_fail = 0;
    std::optional<net::Client> client;
    std::size_t next = index;
    std::uint64_t seq = 0;
    while (Clock::now() < measure_end) {
      if (!client) {
        try {
          client.emplace(cfg.target);
        } catch (const net::NetError&) {
          if (Clock::now() >= measure_start) {
            ++local_sent;
            ++local_fail;
          }
          std::this_thread::sleep_for(std::chrono::milliseconds(50));
          continue;
        }
      }
      json req = {{"cmd", cfg.command}, {"id", static_cast<std::uint64_t>(index) * 1'000'000'000ULL + seq++}};
      req["args"] = cfg.corpus.empty() ? json::object() : cfg.corpus[next % cfg.corpus.size()];
      ++next;
      std::string line = req.dump();
      auto start = Clock::now();
      bool ok = false;
      try {
        std::string rsp = client->roundtrip(line);
        json r = json::parse(rsp, nullptr, false);
        ok = !r.is_discarded() && r.is_object() && r.value("status", "") == "ok" && r.contains("id") &&
             r["id"] == req["id"];
      } catch (const net::NetError&) {
        client.reset();
      }
      auto stop = Clock::now();
      if (start < measure_start || start >= measure_end) continue;
      ++local_sent;
      if (ok) local.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
      else ++local_fail;
    }
    std::lock_guard lock(mu);
    latencies.insert(latencies.end(), local.begin(), local.end());
    sent += local_sent;
    failures += local_fail;
  };

  std::vector<ResourceSample> samples;
  std::thread sampler;
  if (cfg.pid) {
    sampler = std::thread([&] {
      std::this_thread::sleep_until(measure_start);
      try {
        samples = sample_resources(*cfg.pid, std::chrono::duration<double>(cfg.sample_interval_s),
                                   std::chrono::duration<double>(cfg.duration_s));
      } catch (const std::exception&) {
        samples.clear();
      }
    });
  }
  std::vector<std::thread> threads;
  threads.reserve(cfg.clients);
  for (unsigned i = 0; i < cfg.clients; ++i) threads.emplace_back(client_loop, i);
  for (auto& t : threads) t.join();
  if (sampler.joinable()) sampler.join();

  LoadReport r;
  r.clients = cfg.clients;
  r.command = cfg.command;
  r.requests_sent = sent;
  r.failures = failures;
  r.median_latency_ms = percentile(latencies, 50);
  r.p95_latency_ms = percentile(latencies, 95);
  r.measured_seconds = cfg.duration_s;
  r.throughput_rps = static_cast<double>(sent - failures) / cfg.duration_s;
  if (!samples.empty()) {
    r.resources_sampled = true;
    double cpu_sum = 0, mem_sum = 0;
    for (const auto& s : samples) {
      r.max_cpu_percent = std::max(r.max_cpu_percent, s.cpu_percent);
      r.max_mem_gb = std::max(r.max_mem_gb, s.mem_gb);
      cpu_sum += s.cpu_percent;
      mem_sum += s.mem_gb;
    }
    r.avg_cpu_percent = cpu_sum / static_cast<double>(samples.size());
    r.avg_mem_gb = mem_sum / static_cast<double>(samples.size());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Rendering

Format parse_format(std::string_view s) {
  if (s == "table") return Format::Table;
  if (s == "csv") return Format::Csv;
  if (s == "jsonl" || s == "json-lines") return Format::Jsonl;
  throw std::invalid_argument("unknown format: " + std::string(s));
}

namespace {

nlohmann::ordered_json ordered_report(const LoadReport& r) {
  nlohmann::ordered_json j;
  j["clients"] = r.clients;
  j["command"] = r.command;
  j["requests_sent"] = r.requests_sent;
  j["failures"] = r.failures;
  j["median_latency_ms"] = r.median_latency_ms;
  j["p95_latency_ms"] = r.p95_latency_ms;
  j["throughput_rps"] = r.throughput_rps;
  j["max_cpu_percent"] = r.max_cpu_percent;
  j["avg_cpu_percent"] = r.avg_cpu_percent;
  j["max_mem_gb"] = r.max_mem_gb;
  j["avg_mem_gb"] = r.avg_mem_gb;
  j["measured_seconds"] = r.measured_seconds;
  j["resources_sampled"] = r.resources_sampled;
  return j;
}

}  // namespace

json report_to_json(const LoadReport& r) { return json(ordered_report(r)); }

LoadReport report_from_json(const json& j) {
  LoadReport r;
  r.clients = j.at("clients").get<unsigned>();
  r.command = j.at("command").get<std::string>();
  r.requests_sent = j.at("requests_sent").get<std::uint64_t>();
  r.failures = j.at("failures").get<std::uint64_t>();
  r.median_latency_ms = j.at("median_latency_ms").get<double>();
  r.p95_latency_ms = j.at("p95_latency_ms").get<double>();
  r.throughput_rps = j.at("throughput_rps").get<double>();
  r.max_cpu_percent = j.at("max_cpu_percent").get<double>();
  r.avg_cpu_percent = j.at("avg_cpu_percent").get<double>();
  r.max_mem_gb = j.at("max_mem_gb").get<double>();
  r.avg_mem_gb = j.at("avg_mem_gb").get<double>();
  r.measured_seconds = j.value("measured_seconds", 0.0);
  r.resources_sampled = j.value("resources_sampled", false);
  return r;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string cell_or_dash(const LoadReport& r, double v, int digits) {
  return r.resources_sampled ? fixed(v, digits) : "-";
}

}  // namespace

std::string render_report(const std::vector<LoadReport>& reports, Format format) {
  std::ostringstream out;
  if (format == Format::Jsonl) {
    for (const auto& r : reports) {
      out << ordered_report(r).dump() << "\n";
    }
    return out.str();
  }
  if (format == Format::Csv) {
    out << "clients,median_latency_ms,throughput_rps,max_cpu_percent,avg_cpu_percent,max_mem_gb,avg_mem_gb,command,"
           "requests_sent,failures,p95_latency_ms\n";
    for (const auto& r : reports) {
      out << r.clients << ',' << fixed(r.median_latency_ms, 3) << ',' << fixed(r.throughput_rps, 3) << ','
          << fixed(r.max_cpu_percent, 2) << ',' << fixed(r.avg_cpu_percent, 2) << ',' << fixed(r.max_mem_gb, 4) << ','
          << fixed(r.avg_mem_gb, 4) << ',' << r.command << ',' << r.requests_sent << ',' << r.failures << ','
          << fixed(r.p95_latency_ms, 3) << "\n";
    }
    return out.str();
  }
  const std::vector<std::string> header = {"Client Threads", "Median Latency (ms)", "Median Throughput (req/s)",
                                           "Max CPU (%)",    "Avg CPU (%)",         "Max MEM (Gb)",
                                           "Avg MEM (Gb)",   "Command"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    rows.push_back({std::to_string(r.clients), fixed(r.median_latency_ms, 2), fixed(r.throughput_rps, 2),
                    cell_or_dash(r, r.max_cpu_percent, 1), cell_or_dash(r, r.avg_cpu_percent, 1),
                    cell_or_dash(r, r.max_mem_gb, 3), cell_or_dash(r, r.avg_mem_gb, 3), r.command});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out << " | ";
      bool last = c + 1 == cells.size();
      if (last) out << cells[c];
      else out << std::setw(static_cast<int>(width[c])) << cells[c];
    }
    out << "\n";
  };
  emit(header);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c > 0) out << "-+-";
    out << std::string(width[c], '-');
  }
  out << "\n";
  for (const auto& row : rows) emit(row);
  return out.str();
}

}  // namespace oeis::bench
