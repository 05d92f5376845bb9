#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coan/model.hpp"

namespace coan {

// ---------------------------------------------------------------------------
// Synthetic scenarios with ground truth

struct ScenarioSpec {
  std::uint64_t seed = 1;
  int jobs = 200;
  // Class mix over small/medium/large; must sum to 1.
  double mix_small = 0.80;
  double mix_medium = 0.15;
  double mix_large = 0.05;
  /// "random" draws each job's six RI labels independently; "constant",
  /// "phased" or "stochastic" forces every label.
  std::string pattern = "random";
  Timestamp sample_period = kNominalSamplePeriod;
  int min_nodes = 10;
  int max_nodes = 100;
  Timestamp min_runtime = 3600;
  Timestamp max_runtime = 4500;
  double idle_power_w = 50.0;
  double tdp_w = 400.0;
  Timestamp start_time = 1704067200;  // 2024-01-01T00:00:00Z
  /// Minimum spacing between successive jobs' earliest start times.
  Timestamp arrival_spacing = 0;
  int cluster_hosts = 560;
  /// Share of jobs that never touch a GPU (gpu_count 0).
  double zero_gpu_fraction = 0.05;

  /// Throws InvalidInput when the scenario cannot be generated.
  void validate() const;
  static ScenarioSpec from_config(const std::map<std::string, std::string>& kv);
  std::map<std::string, std::string> to_config() const;
};

/// The three resources with RI labels, in Table-4 order.
inline constexpr std::array<Metric, 3> kRiMetrics = {Metric::kLoad, Metric::kMemUtil, Metric::kMemAlloc};

struct JobTruth {
  std::string job_id;
  JobClass job_class = JobClass::kSmall;
  int num_nodes = 0;
  int gpu_count = 0;
  Timestamp runtime_seconds = 0;
  double node_hours = 0.0;
  double total_energy = 0.0;  // kJ, trapezoid over the generated per-node power
  std::array<RiCategory, 3> temporal{};  // indexed like kRiMetrics
  std::array<RiCategory, 3> spatial{};
  std::array<double, 3> temporal_target{};
  std::array<double, 3> spatial_target{};
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<JobTruth> jobs;
  std::size_t telemetry_rows = 0;
  std::size_t idle_rows = 0;

  double total_node_hours() const;
  double total_energy() const;
  std::string to_json() const;
  static GroundTruth from_json(const std::string& text);
};

struct Scenario {
  std::vector<JobRecord> jobs;
  std::vector<HostAssignment> hosts;
  std::vector<TelemetrySample> telemetry;
  GroundTruth truth;
  Timestamp range_start = 0;
  Timestamp range_end = 0;
};

/// Deterministic for a given spec (including seed).
Scenario generate(const ScenarioSpec& spec);

/// Streams a scenario to `dir`: jobs.csv, hosts.csv, telemetry.csv,
/// truth.json, scenario.conf and a manifest.json ready for fusion.
GroundTruth write_scenario(const ScenarioSpec& spec, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Brute-force oracles

/// Tags every sample by scanning every (job, host) interval with half-open
/// [start, end) semantics. Throws FusionError on overlaps or dangling jobs.
std::vector<std::optional<std::string>> oracle_join(std::span<const TelemetrySample> samples,
                                                    std::span<const JobRecord> jobs,
                                                    std::span<const HostAssignment> hosts);

enum class RiMode { kTemporal, kSpatial };

/// Literal nested-loop evaluation of the imbalance equations.
double oracle_ri(const std::vector<std::vector<double>>& per_node, RiMode mode);

/// Two-pass reference statistics (population variance).
DescriptiveStats oracle_stats(std::span<const double> values);
std::optional<double> oracle_pearson(std::span<const double> x, std::span<const double> y);

}  // namespace coan
