#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coan/fuse.hpp"
#include "coan/model.hpp"

namespace coan {

// ---------------------------------------------------------------------------
// Statistics

/// min/max/mean and population standard deviation, computed in one pass.
/// Throws InvalidInput on an empty sequence.
DescriptiveStats descriptive_stats(std::span<const double> values);

/// Pearson r, or nullopt when either side has zero variance (or n < 2).
/// Throws InvalidInput when the lengths differ.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Node series

struct NodeSeriesSet {
  std::vector<NodeSeries> series;  // sorted by host
  int missing_hosts = 0;           // assigned hosts that produced no telemetry
};

/// Groups one job's fused records by host. Records must all carry `job_id`
/// and arrive time-ordered per host.
NodeSeriesSet build_node_series(std::string_view job_id, std::span<const FusedRecord> records,
                                std::span<const std::string> assigned_hosts);

// ---------------------------------------------------------------------------
// Resource imbalance
//
// Temporal: per node 1 - sum_t U / (T_n * max_t U), job value is the max over
// nodes. Spatial: 1 - sum_n max_t U / (N * max_{n,t} U). All-zero inputs give 0.

double ri_temporal_value(std::span<const std::vector<double>> per_node);
double ri_spatial_value(std::span<const std::vector<double>> per_node);

RiResult ri_temporal(std::span<const NodeSeries> series, Metric metric);
RiResult ri_spatial(std::span<const NodeSeries> series, Metric metric);

/// Max over nodes of the number of GPUs whose peak utilization exceeds 2%.
int gpu_count(std::span<const NodeSeries> series);
int gpu_count(std::span<const GpuArray> per_node_peaks);

// ---------------------------------------------------------------------------
// Energy

/// Trapezoidal integral of watts over seconds, in joules. Fewer than two
/// samples integrate to 0. Throws InvalidInput for non-increasing timestamps.
double integrate_power_joules(std::span<const Timestamp> timestamps, std::span<const double> watts);

struct EnergyResult {
  double kilojoules = 0.0;
  int short_nodes = 0;  // nodes with fewer than two samples, contributing 0
};

EnergyResult integrate_energy(std::span<const NodeSeries> series);

// ---------------------------------------------------------------------------
// Job summaries

JobSummary summarize_job(const JobRecord& job, int num_nodes, const NodeSeriesSet& nodes);

struct SummarizeResult {
  std::vector<JobSummary> summaries;  // in job-log order
  int coverage_warnings = 0;          // jobs with at least one silent host
  int energy_warnings = 0;            // nodes with < 2 samples
  std::size_t fused_records = 0;
  std::size_t idle_records = 0;
};

/// Condenses a completed fusion output into one summary per job.
SummarizeResult summarize_dataset(const FusedDataset& dataset, unsigned workers = 1);

/// Summary CSV column order. Table-4 metric names are used verbatim.
const std::vector<std::string>& summary_columns();
void write_summary_csv(std::ostream& out, std::span<const JobSummary> summaries);
/// Throws SchemaError naming the first missing column or malformed row.
std::vector<JobSummary> read_summary_csv(std::istream& in);

/// Numeric value of a named summary column; nullopt when the job has no telemetry.
/// Throws InvalidInput for an unknown column name.
std::optional<double> summary_value(const JobSummary& s, std::string_view column);

// ---------------------------------------------------------------------------
// Correlation

struct CorrelationMatrix {
  std::vector<std::string> metrics;
  std::vector<std::optional<double>> r;  // row-major, metrics.size()^2

  std::size_t size() const { return metrics.size(); }
  const std::optional<double>& at(std::size_t i, std::size_t j) const { return r[i * size() + j]; }
};

/// The fifteen Table-4 metrics, in table order.
const std::vector<std::string>& default_correlation_metrics();

/// Pairwise Pearson r over summary columns, using rows where both values are
/// present. Zero-variance columns yield missing entries. Needs >= 2 summaries.
CorrelationMatrix pearson_matrix(std::span<const JobSummary> summaries, std::span<const std::string> metrics);

}  // namespace coan
