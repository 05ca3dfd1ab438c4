#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "oeis/net.hpp"

namespace oeis::bench {

using json = nlohmann::json;

class TargetUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProcessNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PlatformUnsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadConfig {
  net::Endpoint target;
  unsigned clients = 1;
  double duration_s = 30.0;
  double warmup_s = 3.0;
  std::string command = "eval";
  std::vector<json> corpus;  // args objects, cycled round-robin
  std::optional<int> pid;    // sampled for CPU/memory when set
  double sample_interval_s = 1.0;
};

struct LoadReport {
  unsigned clients = 0;
  std::string command;
  std::uint64_t requests_sent = 0;
  std::uint64_t failures = 0;
  double median_latency_ms = 0;
  double p95_latency_ms = 0;
  double throughput_rps = 0;
  double max_cpu_percent = 0;
  double avg_cpu_percent = 0;
  double max_mem_gb = 0;
  double avg_mem_gb = 0;
  double measured_seconds = 0;
  bool resources_sampled = false;
};

// One args object per nonblank line.
std::vector<json> parse_corpus(std::string_view text);
std::vector<json> load_corpus(const std::string& path);

// Throws TargetUnreachable when the ready probe fails, std::invalid_argument on a bad config.
LoadReport run_load(const LoadConfig& cfg);

struct ResourceSample {
  double cpu_percent = 0;
  double mem_gb = 0;
};

// Resident set size in bytes; throws ProcessNotFound.
std::uint64_t resident_bytes(int pid);
// Cumulative user+system CPU seconds; throws ProcessNotFound.
double cpu_seconds(int pid);

// One sample per interval over the duration; the first sample covers the first interval.
std::vector<ResourceSample> sample_resources(int pid, std::chrono::duration<double> interval,
                                             std::chrono::duration<double> duration);

enum class Format { Table, Csv, Jsonl };
Format parse_format(std::string_view s);

std::string render_report(const std::vector<LoadReport>& reports, Format format);
json report_to_json(const LoadReport& r);
LoadReport report_from_json(const json& j);

// Percentile with linear interpolation between closest ranks; 0 for empty input.
double percentile(std::vector<double> values, double p);

}  // namespace oeis::bench
