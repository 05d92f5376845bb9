#include "coan/summarize.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "coan/error.hpp"
#include "coan/text.hpp"

namespace coan {

// ---------------------------------------------------------------------------
// Statistics

DescriptiveStats descriptive_stats(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("descriptive statistics of an empty sequence");
  DescriptiveStats s{values[0], values[0], 0.0, 0.0};
  // Welford for the spread; the reported mean is the plain sum / n, which is
  // closer to the exact mean than the running estimate.
  double running = 0.0;
  double m2 = 0.0;
  double sum = 0.0;
  std::size_t n = 0;
  for (const double x : values) {
    ++n;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    sum += x;
    const double delta = x - running;
    running += delta / static_cast<double>(n);
    m2 += delta * (x - running);
  }
  s.mean = sum / static_cast<double>(n);
  s.stddev = std::sqrt(std::max(0.0, m2) / static_cast<double>(n));
  return s;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pearson: sequences differ in length");
  if (x.size() < 2) return std::nullopt;
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  if (*xmin == *xmax || *ymin == *ymax) return std::nullopt;

  double mx = 0, my = 0, cxx = 0, cyy = 0, cxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double n = static_cast<double>(k + 1);
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    mx += dx / n;
    my += dy / n;
    cxx += dx * (x[k] - mx);
    cyy += dy * (y[k] - my);
    cxy += dx * (y[k] - my);
  }
  if (!(cxx > 0.0) || !(cyy > 0.0)) return std::nullopt;
  return std::clamp(cxy / std::sqrt(cxx * cyy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Node series

NodeSeriesSet build_node_series(std::string_view job_id, std::span<const FusedRecord> records,
                                std::span<const std::string> assigned_hosts) {
  std::map<std::string, NodeSeries, std::less<>> by_host;
  for (const auto& r : records) {
    if (r.job_id != job_id) {
      throw InvalidInput("record tagged " + (r.idle() ? std::string("idle") : r.job_id) +
                         " passed to series builder for job " + std::string(job_id));
    }
    auto it = by_host.find(r.sample.host);
    if (it == by_host.end()) {
      it = by_host.emplace(r.sample.host, NodeSeries{}).first;
      it->second.job_id = job_id;
      it->second.host = r.sample.host;
    }
    it->second.append(r.sample);
  }
  NodeSeriesSet set;
  for (const auto& host : assigned_hosts) {
    if (!by_host.contains(host)) ++set.missing_hosts;
  }
  for (auto& [host, series] : by_host) set.series.push_back(std::move(series));
  return set;
}

// ---------------------------------------------------------------------------
// Resource imbalance

namespace {

void check_node_values(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("resource imbalance: node series is empty");
  for (const double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput("resource imbalance: values must be finite and >= 0");
  }
}

template <class Range>
std::vector<std::vector<double>> metric_values(const Range& series, Metric metric) {
  std::vector<std::vector<double>> out;
  out.reserve(series.size());
  for (const auto& s : series) out.push_back(s.values(metric));
  return out;
}

}  // namespace

double ri_temporal_value(std::span<const std::vector<double>> per_node) {
  if (per_node.empty()) throw InvalidInput("resource imbalance: no node series");
  double worst = 0.0;
  for (const auto& values : per_node) {
    check_node_values(values);
    const auto [low, high] = std::minmax_element(values.begin(), values.end());
    const double peak = *high;
    // Flat series (including all-zero) score exactly 0; summation rounding would leave ~1e-16.
    if (*low == peak) continue;
    double sum = 0.0;
    for (const double v : values) sum += v;
    const double term = 1.0 - sum / (static_cast<double>(values.size()) * peak);
    worst = std::max(worst, std::clamp(term, 0.0, 1.0));
  }
  return worst;
}

double ri_spatial_value(std::span<const std::vector<double>> per_node) {
  if (per_node.empty()) throw InvalidInput("resource imbalance: no node series");
  double sum_of_peaks = 0.0;
  double global_peak = 0.0;
  bool equal_peaks = true;
  for (const auto& values : per_node) {
    check_node_values(values);
    const double peak = *std::max_element(values.begin(), values.end());
    if (&values != &per_node.front() && peak != global_peak) equal_peaks = false;
    sum_of_peaks += peak;
    global_peak = std::max(global_peak, peak);
  }
  if (equal_peaks) return 0.0;
  const double ratio = sum_of_peaks / (static_cast<double>(per_node.size()) * global_peak);
  return std::clamp(1.0 - ratio, 0.0, 1.0);
}

RiResult ri_temporal(std::span<const NodeSeries> series, Metric metric) {
  return RiResult::from_value(ri_temporal_value(metric_values(series, metric)));
}

RiResult ri_spatial(std::span<const NodeSeries> series, Metric metric) {
  return RiResult::from_value(ri_spatial_value(metric_values(series, metric)));
}

int gpu_count(std::span<const GpuArray> per_node_peaks) {
  int best = 0;
  for (const auto& peaks : per_node_peaks) {
    const auto n = std::count_if(peaks.begin(), peaks.end(),
                                 [](double p) { return p > kGpuActiveThresholdPct; });
    best = std::max(best, static_cast<int>(n));
  }
  return best;
}

int gpu_count(std::span<const NodeSeries> series) {
  std::vector<GpuArray> peaks;
  peaks.reserve(series.size());
  for (const auto& s : series) peaks.push_back(s.gpu_util_peak);
  return gpu_count(std::span<const GpuArray>(peaks));
}

// ---------------------------------------------------------------------------
// Energy

double integrate_power_joules(std::span<const Timestamp> timestamps, std::span<const double> watts) {
  if (timestamps.size() != watts.size()) throw InvalidInput("energy: timestamp and power lengths differ");
  double joules = 0.0;
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i] <= timestamps[i - 1]) {
      throw InvalidInput("energy: timestamps not strictly increasing at index " + std::to_string(i));
    }
    const double dt = static_cast<double>(timestamps[i] - timestamps[i - 1]);
    joules += dt * (watts[i] + watts[i - 1]) / 2.0;
  }
  return joules;
}

EnergyResult integrate_energy(std::span<const NodeSeries> series) {
  EnergyResult result;
  double joules = 0.0;
  for (const auto& s : series) {
    if (s.size() < 2) {
      ++result.short_nodes;
      continue;
    }
    joules += integrate_power_joules(s.timestamps, s.node_power);
  }
  result.kilojoules = joules / 1000.0;
  return result;
}

// ---------------------------------------------------------------------------
// Job summaries

namespace {

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (const double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// Mean over nodes of each node's own time average.
double mean_of_node_means(std::span<const NodeSeries> series, Metric metric) {
  double sum = 0.0;
  for (const auto& s : series) sum += mean_of(s.values(metric));
  return sum / static_cast<double>(series.size());
}

DescriptiveStats pooled_stats(std::span<const NodeSeries> series, Metric metric) {
  std::vector<double> pooled;
  for (const auto& s : series) {
    const auto& v = s.values(metric);
    pooled.insert(pooled.end(), v.begin(), v.end());
  }
  return descriptive_stats(pooled);
}

}  // namespace

JobSummary summarize_job(const JobRecord& job, int num_nodes, const NodeSeriesSet& nodes) {
  JobSummary s;
  s.job_id = job.job_id;
  s.queue = job.queue;
  s.num_nodes = num_nodes;
  s.job_class = num_nodes >= 1 ? classify_job(num_nodes) : JobClass::kUnclassified;
  s.runtime_seconds = job.runtime_seconds();
  s.node_hours = static_cast<double>(num_nodes) * static_cast<double>(s.runtime_seconds) / 3600.0;
  s.missing_nodes = nodes.missing_hosts;

  std::vector<NodeSeries> series;
  for (const auto& n : nodes.series) {
    if (n.size() > 0) series.push_back(n);
  }
  s.telemetry_nodes = static_cast<int>(series.size());
  for (const auto& n : series) s.samples += static_cast<std::int64_t>(n.size());
  if (series.empty()) return s;

  JobMetrics m;
  m.gpu_count = gpu_count(std::span<const NodeSeries>(series));
  m.total_load_mean = mean_of_node_means(series, Metric::kLoad);
  m.total_mem_mean = mean_of_node_means(series, Metric::kMemUtil);
  m.total_alloc_pct_mean = mean_of_node_means(series, Metric::kMemAlloc);
  m.total_power_mean = mean_of_node_means(series, Metric::kPower);
  m.total_energy = integrate_energy(series).kilojoules;

  m.ri_spatial_load = ri_spatial(series, Metric::kLoad);
  m.ri_spatial_mem_util = ri_spatial(series, Metric::kMemUtil);
  m.ri_spatial_mem_alloc = ri_spatial(series, Metric::kMemAlloc);
  m.ri_temporal_load = ri_temporal(series, Metric::kLoad);
  m.ri_temporal_mem_util = ri_temporal(series, Metric::kMemUtil);
  m.ri_temporal_mem_alloc = ri_temporal(series, Metric::kMemAlloc);

  m.load = pooled_stats(series, Metric::kLoad);
  m.mem_util = pooled_stats(series, Metric::kMemUtil);
  m.alloc_pct = pooled_stats(series, Metric::kMemAlloc);
  m.power = pooled_stats(series, Metric::kPower);
  m.max_alloc_pct = m.alloc_pct.max;
  s.metrics = m;
  return s;
}

SummarizeResult summarize_dataset(const FusedDataset& dataset, unsigned workers) {
  SummarizeResult result;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < dataset.jobs.size(); ++i) slot.emplace(dataset.jobs[i].job_id, i);

  std::vector<std::vector<std::string>> assigned(dataset.jobs.size());
  for (const auto& a : dataset.hosts) {
    const auto it = slot.find(a.job_id);
    if (it == slot.end()) throw SchemaError("fused hosts file names unknown job " + a.job_id);
    assigned[it->second].push_back(a.host);
  }

  std::vector<std::map<std::string, NodeSeries, std::less<>>> per_job(dataset.jobs.size());
  dataset.for_each_record([&](const FusedRecord& r) {
    ++result.fused_records;
    if (r.idle()) {
      ++result.idle_records;
      return;
    }
    const auto it = slot.find(r.job_id);
    if (it == slot.end()) throw SchemaError("fused record tagged with unknown job " + r.job_id);
    auto& hosts = per_job[it->second];
    auto h = hosts.find(r.sample.host);
    if (h == hosts.end()) {
      h = hosts.emplace(r.sample.host, NodeSeries{}).first;
      h->second.job_id = r.job_id;
      h->second.host = r.sample.host;
    }
    h->second.append(r.sample);
  });

  const std::size_t n = dataset.jobs.size();
  result.summaries.resize(n);
  std::vector<int> short_nodes(n, 0);
  auto work = [&](std::size_t i) {
    NodeSeriesSet set;
    for (const auto& host : assigned[i]) {
      if (!per_job[i].contains(host)) ++set.missing_hosts;
    }
    for (auto& [host, series] : per_job[i]) set.series.push_back(std::move(series));
    per_job[i].clear();
    for (const auto& s : set.series) short_nodes[i] += s.size() < 2 ? 1 : 0;
    const int num_nodes = assigned[i].empty() ? dataset.jobs[i].requested_nodes
                                              : static_cast<int>(assigned[i].size());
    result.summaries[i] = summarize_job(dataset.jobs[i], num_nodes, set);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < n; i = next++) {
            try {
              work(i);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.energy_warnings += short_nodes[i];
    if (result.summaries[i].missing_nodes > 0) ++result.coverage_warnings;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Summary table

namespace {

using MetricGetter = std::function<double(const JobMetrics&)>;
using BaseGetter = std::function<double(const JobSummary&)>;

struct NumericColumn {
  std::string name;
  BaseGetter base;      // always present
  MetricGetter metric;  // present only for covered jobs
};

#define COAN_METRIC(field) NumericColumn{#field, nullptr, [](const JobMetrics& m) { return static_cast<double>(m.field); }}
#define COAN_RI(field) NumericColumn{#field, nullptr, [](const JobMetrics& m) { return m.field.value; }}
#define COAN_STATS(prefix, field)                                                              \
  NumericColumn{prefix "_min", nullptr, [](const JobMetrics& m) { return m.field.min; }},      \
      NumericColumn{prefix "_max", nullptr, [](const JobMetrics& m) { return m.field.max; }},  \
      NumericColumn{prefix "_mean", nullptr, [](const JobMetrics& m) { return m.field.mean; }}, \
      NumericColumn{prefix "_std", nullptr, [](const JobMetrics& m) { return m.field.stddev; }}

const std::vector<NumericColumn>& numeric_columns() {
  static const std::vector<NumericColumn> cols = {
      COAN_METRIC(gpu_count),
      NumericColumn{"num_nodes", [](const JobSummary& s) { return static_cast<double>(s.num_nodes); }, nullptr},
      NumericColumn{"node_hours", [](const JobSummary& s) { return s.node_hours; }, nullptr},
      NumericColumn{"runtime_seconds",
                    [](const JobSummary& s) { return static_cast<double>(s.runtime_seconds); }, nullptr},
      COAN_METRIC(total_load_mean),
      COAN_METRIC(total_mem_mean),
      COAN_METRIC(total_alloc_pct_mean),
      COAN_METRIC(total_power_mean),
      COAN_METRIC(total_energy),
      COAN_RI(ri_spatial_load),
      COAN_RI(ri_spatial_mem_util),
      COAN_RI(ri_spatial_mem_alloc),
      COAN_RI(ri_temporal_load),
      COAN_RI(ri_temporal_mem_util),
      COAN_RI(ri_temporal_mem_alloc),
      COAN_METRIC(max_alloc_pct),
      COAN_STATS("load", load),
      COAN_STATS("mem_util", mem_util),
      COAN_STATS("alloc_pct", alloc_pct),
      COAN_STATS("power", power),
      NumericColumn{"telemetry_nodes", [](const JobSummary& s) { return static_cast<double>(s.telemetry_nodes); },
                    nullptr},
      NumericColumn{"missing_nodes", [](const JobSummary& s) { return static_cast<double>(s.missing_nodes); },
                    nullptr},
      NumericColumn{"samples", [](const JobSummary& s) { return static_cast<double>(s.samples); }, nullptr},
  };
  return cols;
}

#undef COAN_METRIC
#undef COAN_RI
#undef COAN_STATS

// Summary-file-only columns, written after the numeric ones.
constexpr std::array<std::string_view, 6> kCategoryColumns = {
    "ri_spatial_load_category",  "ri_spatial_mem_util_category",  "ri_spatial_mem_alloc_category",
    "ri_temporal_load_category", "ri_temporal_mem_util_category", "ri_temporal_mem_alloc_category"};

std::array<const RiResult*, 6> ri_fields(const JobMetrics& m) {
  return {&m.ri_spatial_load,  &m.ri_spatial_mem_util,  &m.ri_spatial_mem_alloc,
          &m.ri_temporal_load, &m.ri_temporal_mem_util, &m.ri_temporal_mem_alloc};
}

std::array<RiResult*, 6> ri_fields(JobMetrics& m) {
  return {&m.ri_spatial_load,  &m.ri_spatial_mem_util,  &m.ri_spatial_mem_alloc,
          &m.ri_temporal_load, &m.ri_temporal_mem_util, &m.ri_temporal_mem_alloc};
}

}  // namespace

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"job_id", "job_class", "queue"};
    for (const auto& col : numeric_columns()) c.push_back(col.name);
    for (const auto name : kCategoryColumns) c.emplace_back(name);
    return c;
  }();
  return cols;
}

void write_summary_csv(std::ostream& out, std::span<const JobSummary> summaries) {
  const auto& cols = summary_columns();
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line.push_back(',');
    line += cols[i];
  }
  line.push_back('\n');
  out << line;
  for (const auto& s : summaries) {
    line = csv_escape(s.job_id) + "," + std::string(to_string(s.job_class)) + "," + csv_escape(s.queue);
    for (const auto& col : numeric_columns()) {
      line.push_back(',');
      if (col.base) {
        append_double(line, col.base(s));
      } else if (s.metrics) {
        append_double(line, col.metric(*s.metrics));
      }
    }
    for (std::size_t k = 0; k < kCategoryColumns.size(); ++k) {
      line.push_back(',');
      if (s.metrics) line += to_string(ri_fields(*s.metrics)[k]->category);
    }
    line.push_back('\n');
    out << line;
  }
}

std::vector<JobSummary> read_summary_csv(std::istream& in) {
  std::string header;
  if (!read_line(in, header)) throw SchemaError("summary: missing header row");
  CsvSplitter splitter;
  std::vector<std::string> names;
  for (const auto f : splitter.split(header)) names.emplace_back(trim(f));
  std::map<std::string, std::size_t, std::less<>> position;
  for (std::size_t i = 0; i < names.size(); ++i) position.emplace(names[i], i);
  for (const auto& required : summary_columns()) {
    if (!position.contains(required)) throw SchemaError("summary: missing required column '" + required + "'");
  }

  std::vector<JobSummary> out;
  std::string line;
  std::size_t lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto& f = splitter.split(line);
    auto bad = [&](const std::string& why) {
      return SchemaError("summary line " + std::to_string(lineno) + ": " + why);
    };
    if (f.size() != names.size()) throw bad("field count mismatch");
    auto field = [&](std::string_view name) { return trim(f[position.find(name)->second]); };

    JobSummary s;
    s.job_id = field("job_id");
    s.queue = field("queue");
    const auto cls = parse_job_class(field("job_class"));
    if (!cls) throw bad("unknown job_class");
    s.job_class = *cls;
    const bool covered = !field("gpu_count").empty();
    JobMetrics m;
    for (const auto& col : numeric_columns()) {
      const auto text = field(col.name);
      if (col.metric && !covered) {
        if (!text.empty()) throw bad("column " + col.name + " set for a job without telemetry");
        continue;
      }
      const auto v = parse_double(text);
      if (!v) throw bad("unparseable " + col.name);
      if (col.name == "num_nodes") s.num_nodes = static_cast<int>(*v);
      else if (col.name == "node_hours") s.node_hours = *v;
      else if (col.name == "runtime_seconds") s.runtime_seconds = static_cast<Timestamp>(*v);
      else if (col.name == "telemetry_nodes") s.telemetry_nodes = static_cast<int>(*v);
      else if (col.name == "missing_nodes") s.missing_nodes = static_cast<int>(*v);
      else if (col.name == "samples") s.samples = static_cast<std::int64_t>(*v);
      else if (col.name == "gpu_count") m.gpu_count = static_cast<int>(*v);
      else if (col.name == "total_load_mean") m.total_load_mean = *v;
      else if (col.name == "total_mem_mean") m.total_mem_mean = *v;
      else if (col.name == "total_alloc_pct_mean") m.total_alloc_pct_mean = *v;
      else if (col.name == "total_power_mean") m.total_power_mean = *v;
      else if (col.name == "total_energy") m.total_energy = *v;
      else if (col.name == "max_alloc_pct") m.max_alloc_pct = *v;
      else if (col.name.starts_with("ri_")) {
        static const std::map<std::string, std::size_t, std::less<>> ri_slot = {
            {"ri_spatial_load", 0},  {"ri_spatial_mem_util", 1},  {"ri_spatial_mem_alloc", 2},
            {"ri_temporal_load", 3}, {"ri_temporal_mem_util", 4}, {"ri_temporal_mem_alloc", 5}};
        try {
          *ri_fields(m)[ri_slot.at(col.name)] = RiResult::from_value(*v);
        } catch (const InvalidInput& e) {
          throw bad(e.what());
        }
      } else {
        static const std::map<std::string, std::pair<DescriptiveStats JobMetrics::*, double DescriptiveStats::*>,
                              std::less<>>
            stat_slot = [] {
              std::map<std::string, std::pair<DescriptiveStats JobMetrics::*, double DescriptiveStats::*>,
                       std::less<>>
                  slots;
              const std::pair<const char*, DescriptiveStats JobMetrics::*> groups[] = {
                  {"load", &JobMetrics::load},
                  {"mem_util", &JobMetrics::mem_util},
                  {"alloc_pct", &JobMetrics::alloc_pct},
                  {"power", &JobMetrics::power}};
              const std::pair<const char*, double DescriptiveStats::*> stats[] = {
                  {"_min", &DescriptiveStats::min},
                  {"_max", &DescriptiveStats::max},
                  {"_mean", &DescriptiveStats::mean},
                  {"_std", &DescriptiveStats::stddev}};
              for (const auto& [g, gp] : groups) {
                for (const auto& [suffix, sp] : stats) slots[std::string(g) + suffix] = {gp, sp};
              }
              return slots;
            }();
        const auto& [group, stat] = stat_slot.at(col.name);
        (m.*group).*stat = *v;
      }
    }
    if (covered) s.metrics = m;
    out.push_back(std::move(s));
  }
  return out;
}

std::optional<double> summary_value(const JobSummary& s, std::string_view column) {
  for (const auto& col : numeric_columns()) {
    if (col.name != column) continue;
    if (col.base) return col.base(s);
    if (!s.metrics) return std::nullopt;
    return col.metric(*s.metrics);
  }
  throw InvalidInput("unknown summary column '" + std::string(column) + "'");
}

// ---------------------------------------------------------------------------
// Correlation

const std::vector<std::string>& default_correlation_metrics() {
  static const std::vector<std::string> cols = {
      "gpu_count",        "num_nodes",           "node_hours",           "runtime_seconds",
      "total_load_mean",  "total_mem_mean",      "total_alloc_pct_mean", "total_power_mean",
      "total_energy",     "ri_spatial_load",     "ri_spatial_mem_util",  "ri_spatial_mem_alloc",
      "ri_temporal_load", "ri_temporal_mem_util", "ri_temporal_mem_alloc"};
  return cols;
}

CorrelationMatrix pearson_matrix(std::span<const JobSummary> summaries, std::span<const std::string> metrics) {
  if (summaries.size() < 2) throw InvalidInput("correlation needs at least two job summaries");
  const std::size_t k = metrics.size();
  std::vector<std::vector<std::optional<double>>> columns(k);
  for (std::size_t c = 0; c < k; ++c) {
    columns[c].reserve(summaries.size());
    for (const auto& s : summaries) columns[c].push_back(summary_value(s, metrics[c]));
  }

  CorrelationMatrix m;
  m.metrics.assign(metrics.begin(), metrics.end());
  m.r.assign(k * k, std::nullopt);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      x.clear();
      y.clear();
      for (std::size_t row = 0; row < summaries.size(); ++row) {
        if (columns[i][row] && columns[j][row]) {
          x.push_back(*columns[i][row]);
          y.push_back(*columns[j][row]);
        }
      }
      std::optional<double> r = pearson(x, y);
      if (i == j && r) r = 1.0;
      m.r[i * k + j] = r;
      m.r[j * k + i] = r;
    }
  }
  return m;
}

}  // namespace coan
