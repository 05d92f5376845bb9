#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coan {

/// UTC seconds since the Unix epoch. Sub-second precision is truncated on ingest.
using Timestamp = std::int64_t;

inline constexpr int kGpusPerNode = 4;
inline constexpr double kGpuMemoryBytes = 40.0 * 1024 * 1024 * 1024;
inline constexpr double kNodeGpuMemoryBytes = kGpusPerNode * kGpuMemoryBytes;
/// A GPU counts as used when its peak utilization over the job exceeds this percent.
inline constexpr double kGpuActiveThresholdPct = 2.0;
inline constexpr Timestamp kNominalSamplePeriod = 5;

using GpuArray = std::array<double, kGpusPerNode>;

struct JobRecord {
  std::string job_id;
  std::string user;
  std::string project;
  std::string queue;
  Timestamp submit_time = 0;
  Timestamp start_time = 0;
  Timestamp end_time = 0;
  int requested_nodes = 1;

  Timestamp runtime_seconds() const { return end_time - start_time; }
  bool operator==(const JobRecord&) const = default;
};

struct HostAssignment {
  std::string job_id;
  std::string host;

  bool operator==(const HostAssignment&) const = default;
};

/// One node, one timeslice. Percents are in [0,100], allocation in bytes, power in watts.
struct TelemetrySample {
  Timestamp timestamp = 0;
  std::string host;
  GpuArray gpu_util{};
  GpuArray gpu_mem_util{};
  GpuArray gpu_mem_alloc{};
  GpuArray gpu_power{};

  bool operator==(const TelemetrySample&) const = default;
};

// Node-level aggregation of the four GPUs. Percents are averaged so they stay
// in [0,100]; allocation is summed bytes over the node's 160 GiB; power is summed.
double node_util(const TelemetrySample& s);
double node_mem_util(const TelemetrySample& s);
double node_alloc_pct(const TelemetrySample& s);
double node_power(const TelemetrySample& s);

enum class Metric { kLoad, kMemUtil, kMemAlloc, kPower };

std::string_view to_string(Metric m);

/// Per-node, per-job time series U_{n,t} for each aggregated metric.
struct NodeSeries {
  std::string job_id;
  std::string host;
  std::vector<Timestamp> timestamps;
  std::vector<double> node_util;
  std::vector<double> node_mem_util;
  std::vector<double> node_alloc_pct;
  std::vector<double> node_power;
  /// Peak per-GPU utilization over the series.
  GpuArray gpu_util_peak{};

  std::size_t size() const { return timestamps.size(); }
  const std::vector<double>& values(Metric m) const;
  void append(const TelemetrySample& s);
};

enum class RiCategory { kConstant, kPhased, kStochastic };

std::string_view to_string(RiCategory c);
std::optional<RiCategory> parse_ri_category(std::string_view s);

/// Buckets: constant [0, 0.2], phased (0.2, 0.6], stochastic (0.6, 1].
/// Throws InvalidInput outside [0,1].
RiCategory classify_ri(double value);

struct RiResult {
  double value = 0.0;
  RiCategory category = RiCategory::kConstant;

  static RiResult from_value(double value) { return {value, classify_ri(value)}; }
  bool operator==(const RiResult&) const = default;
};

enum class JobClass { kSmall, kMedium, kLarge, kUnclassified };

std::string_view to_string(JobClass c);
std::optional<JobClass> parse_job_class(std::string_view s);

/// small 10-24, medium 25-99, large 100-496 nodes; anything else is unclassified.
/// Throws InvalidInput for num_nodes < 1.
JobClass classify_job(int num_nodes);

inline constexpr std::array<JobClass, 3> kJobClasses = {JobClass::kSmall, JobClass::kMedium,
                                                        JobClass::kLarge};

/// Population statistics (divisor n).
struct DescriptiveStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Telemetry-derived fields of a job summary. Absent when the job has no telemetry.
struct JobMetrics {
  int gpu_count = 0;
  double total_load_mean = 0.0;
  double total_mem_mean = 0.0;
  double total_alloc_pct_mean = 0.0;
  double max_alloc_pct = 0.0;
  double total_power_mean = 0.0;
  double total_energy = 0.0;  // kJ

  RiResult ri_spatial_load;
  RiResult ri_spatial_mem_util;
  RiResult ri_spatial_mem_alloc;
  RiResult ri_temporal_load;
  RiResult ri_temporal_mem_util;
  RiResult ri_temporal_mem_alloc;

  // Job-level statistics over every sample of every node.
  DescriptiveStats load;
  DescriptiveStats mem_util;
  DescriptiveStats alloc_pct;
  DescriptiveStats power;
};

struct JobSummary {
  std::string job_id;
  std::string queue;
  JobClass job_class = JobClass::kUnclassified;
  int num_nodes = 0;
  Timestamp runtime_seconds = 0;
  double node_hours = 0.0;
  int telemetry_nodes = 0;  // assigned hosts that produced at least one sample
  int missing_nodes = 0;    // assigned hosts without telemetry
  std::int64_t samples = 0;
  std::optional<JobMetrics> metrics;

  bool covered() const { return metrics.has_value(); }
};

}  // namespace coan
