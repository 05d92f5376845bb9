#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coan/model.hpp"

namespace coan {

/// Canonical column name -> column name used by a site export.
/// Loaded from a flat key=value file; unmapped names are used as-is.
class ColumnMapping {
 public:
  ColumnMapping() = default;
  explicit ColumnMapping(std::map<std::string, std::string> renames) : renames_(std::move(renames)) {}

  static ColumnMapping load(const std::filesystem::path& path);

  std::string_view source_name(std::string_view canonical) const;
  const std::map<std::string, std::string>& renames() const { return renames_; }

 private:
  std::map<std::string, std::string> renames_;
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based line number in the source file (header is line 1)
  std::string reason;
  std::string raw;
};

template <class Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<RejectedRow> rejects;
  std::size_t total_rows = 0;  // data rows seen, excluding the header and blank lines
  std::size_t duplicates = 0;  // subset of rejects collapsed as duplicates
};

inline constexpr std::string_view kRejectDuplicateAssignment = "duplicate assignment";

const std::vector<std::string>& job_log_columns();
const std::vector<std::string>& host_log_columns();
const std::vector<std::string>& telemetry_columns();

// Parsers are stateless; malformed rows go to `rejects`, never dropped silently.
// A missing required column throws SchemaError naming the column.
ParseResult<JobRecord> parse_job_log(std::istream& in, const ColumnMapping& mapping = {});
ParseResult<HostAssignment> parse_host_log(std::istream& in, const ColumnMapping& mapping = {});
ParseResult<TelemetrySample> parse_telemetry(std::istream& in, const ColumnMapping& mapping = {});

// Writers emit the canonical column names with integer epoch timestamps.
void write_job_log(std::ostream& out, std::span<const JobRecord> jobs);
void write_host_log(std::ostream& out, std::span<const HostAssignment> hosts);
void write_telemetry(std::ostream& out, std::span<const TelemetrySample> samples);
void write_rejects(std::ostream& out, std::span<const RejectedRow> rejects);

/// Appends the 16 per-GPU fields (util, mem util, alloc, power; GPUs 0-3) as CSV.
void append_gpu_fields(std::string& out, const TelemetrySample& s);

/// Declares the inputs of one fusion run. Stored as JSON; relative paths are
/// resolved against the manifest's directory.
struct DatasetManifest {
  std::vector<std::filesystem::path> job_logs;
  std::vector<std::filesystem::path> host_logs;
  std::vector<std::filesystem::path> telemetry;
  Timestamp range_start = 0;  // inclusive
  Timestamp range_end = 0;    // exclusive
  std::filesystem::path column_mapping;  // optional

  void validate() const;
  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace coan
