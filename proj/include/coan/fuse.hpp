#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coan/ingest.hpp"
#include "coan/model.hpp"

namespace coan {

/// Half-open occupancy [start, end) of one host by one job.
struct JobInterval {
  Timestamp start = 0;
  Timestamp end = 0;
  std::uint32_t job = 0;  // index into IntervalIndex::jobs()
};

/// Per-host sorted, pairwise-disjoint job intervals.
class IntervalIndex {
 public:
  /// Throws FusionError for host assignments naming unknown jobs or for jobs
  /// that overlap on one host (the message lists every conflicting pair).
  static IntervalIndex build(std::span<const JobRecord> jobs, std::span<const HostAssignment> hosts);

  /// Owning job of (host, t), or nullopt when the host is idle at t.
  std::optional<std::uint32_t> lookup(std::string_view host, Timestamp t) const;

  const std::vector<JobRecord>& jobs() const { return jobs_; }
  /// Allocated node count: distinct assigned hosts, or requested_nodes when none are listed.
  int num_nodes(std::uint32_t job) const { return num_nodes_[job]; }
  const std::vector<std::string>& hosts_of(std::uint32_t job) const { return hosts_of_[job]; }
  std::size_t interval_count() const;
  const std::map<std::string, std::vector<JobInterval>, std::less<>>& by_host() const { return by_host_; }

 private:
  std::vector<JobRecord> jobs_;
  std::vector<int> num_nodes_;
  std::vector<std::vector<std::string>> hosts_of_;
  std::map<std::string, std::vector<JobInterval>, std::less<>> by_host_;
};

/// A telemetry sample attributed to its owning job. Idle samples carry an
/// empty job_id, empty queue and num_nodes 0.
struct FusedRecord {
  TelemetrySample sample;
  std::string job_id;
  std::string queue;
  int num_nodes = 0;

  bool idle() const { return job_id.empty(); }
  bool operator==(const FusedRecord&) const = default;
};

std::vector<FusedRecord> tag_samples(std::span<const TelemetrySample> samples, const IntervalIndex& index);

/// Column order of fused chunk files.
const std::vector<std::string>& fused_columns();
void append_fused_line(std::string& out, const TelemetrySample& s, std::string_view job_id,
                       std::string_view queue, int num_nodes);
/// Parses one data line of a fused chunk; throws SchemaError on malformed input.
FusedRecord parse_fused_line(std::string_view line);

struct ChunkSpec {
  bool monthly = true;
  Timestamp seconds = 0;  // fixed width when !monthly

  /// "month", or a width such as "3600", "90s", "30m", "6h", "2d".
  static ChunkSpec parse(std::string_view text);
  std::string to_string() const;
};

struct FusionConfig {
  ChunkSpec chunk;
  unsigned workers = 1;
  std::filesystem::path out_dir;
  bool resume = false;
  std::string codec = "gzip";
  /// Stop after writing this many new chunks, leaving the run resumable.
  std::optional<std::size_t> stop_after_chunks;
};

struct ChunkReport {
  std::string id;
  Timestamp start = 0;
  Timestamp end = 0;
  std::size_t rows = 0;
  std::size_t tagged = 0;
  std::size_t idle = 0;
  std::string digest;
  std::string file;
  bool resumed = false;  // taken from the ledger rather than written by this run
};

struct InputReport {
  std::string kind;  // job_log, host_log, telemetry
  std::string path;
  std::size_t rows = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct FusionReport {
  std::vector<InputReport> inputs;
  std::vector<ChunkReport> chunks;
  std::size_t jobs = 0;
  std::size_t intervals = 0;
  std::size_t samples = 0;  // accepted telemetry samples
  std::size_t tagged = 0;
  std::size_t idle = 0;
  std::size_t planned_chunks = 0;
  bool complete = false;

  std::string to_json() const;
};

inline constexpr std::string_view kLedgerFile = "ledger.txt";
inline constexpr std::string_view kFusedJobsFile = "jobs.csv";
inline constexpr std::string_view kFusedHostsFile = "hosts.csv";

/// Preprocessing: parse, join and write time-ordered compressed chunks with a
/// checkpoint ledger. With `resume`, chunks already recorded in the ledger are
/// verified and kept; a ledger that cannot be trusted throws ResumeRefused.
FusionReport run_fusion(const DatasetManifest& manifest, const FusionConfig& config);

/// A completed fusion output directory.
struct FusedDataset {
  std::filesystem::path dir;
  std::vector<JobRecord> jobs;
  std::vector<HostAssignment> hosts;
  std::vector<ChunkReport> chunks;
  std::string codec;

  /// Throws ResumeRefused/SchemaError when the ledger is missing, incomplete or
  /// disagrees with the chunk files.
  static FusedDataset open(const std::filesystem::path& dir);
  std::uintmax_t fused_bytes() const;
  void for_each_record(const std::function<void(const FusedRecord&)>& fn) const;
};

}  // namespace coan
