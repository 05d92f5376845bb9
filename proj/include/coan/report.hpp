#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coan/model.hpp"
#include "coan/summarize.hpp"

namespace coan {

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;  // share of values <= value
};

/// Empirical CDF with ties collapsed into one step; the last point is exactly 1.
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

/// Per-class CDF of a summary column. Unclassified jobs, jobs lacking the
/// value and empty classes are left out.
std::map<JobClass, std::vector<CdfPoint>> cdf_by_class(std::span<const JobSummary> summaries,
                                                       std::string_view metric);

struct ClassTotals {
  JobClass job_class = JobClass::kUnclassified;
  std::size_t jobs = 0;
  double node_hours = 0.0;
  double total_energy = 0.0;  // kJ; jobs without telemetry add 0
  // Shares of the classified totals; unset for the unclassified row or a zero total.
  std::optional<double> job_share;
  std::optional<double> node_hours_share;
  std::optional<double> energy_share;
};

struct ClassBreakdown {
  std::vector<ClassTotals> rows;  // small, medium, large, unclassified
  ClassTotals all;                // every job, classified or not
};

ClassBreakdown class_breakdown(std::span<const JobSummary> summaries);

/// Tukey box statistics. Quartiles use linear interpolation between order
/// statistics (h = (n-1)p); whiskers reach the most extreme values within
/// 1.5 IQR of the box and anything beyond is an outlier.
struct BoxStats {
  std::size_t n = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;  // ascending
};

double quantile_linear(std::span<const double> sorted, double p);
BoxStats box_stats(std::vector<double> values);

struct BoxGroup {
  JobClass job_class = JobClass::kSmall;
  int gpu_count = 0;
  BoxStats stats;
};

/// total_power_mean grouped by (class, gpu_count), classified covered jobs only.
std::vector<BoxGroup> power_boxplot_stats(std::span<const JobSummary> summaries);

/// Correlation matrix as CSV with metric names heading rows and columns; missing cells are blank.
std::string heatmap_export(const CorrelationMatrix& matrix);

std::string cdf_csv(const std::map<JobClass, std::vector<CdfPoint>>& cdf);
std::string class_breakdown_csv(const ClassBreakdown& breakdown);
std::string power_box_csv(std::span<const BoxGroup> groups);

struct ReportConfig {
  std::vector<std::string> cdf_metrics = {"total_load_mean",   "total_mem_mean",       "total_alloc_pct_mean",
                                          "total_power_mean",  "ri_temporal_load",     "ri_spatial_load",
                                          "ri_temporal_mem_util", "ri_spatial_mem_util", "ri_temporal_mem_alloc",
                                          "ri_spatial_mem_alloc"};
  std::vector<std::string> correlation_metrics = default_correlation_metrics();
};

/// Writes cdf_<metric>.csv, class_breakdown.csv, power_box.csv,
/// correlation.csv and run_manifest.json into `out_dir`; returns the file names.
std::vector<std::string> write_report(std::span<const JobSummary> summaries, const std::filesystem::path& summary_path,
                                      const std::filesystem::path& out_dir, const ReportConfig& config);

inline constexpr std::string_view kToolVersion = "1.0.0";

}  // namespace coan
