#include "coan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "coan/error.hpp"
#include "coan/ingest.hpp"
#include "coan/text.hpp"

namespace coan {

namespace fs = std::filesystem;

namespace {

constexpr double kMiB = 1024.0 * 1024.0;
constexpr double kGiB = 1024.0 * kMiB;
// Lowest per-node peak, as a fraction of the job peak, so quantized values stay meaningful.
constexpr double kMinNodeWeight = 0.05;
// Sub-threshold activity placed on an unused GPU; must stay <= 2% to remain uncounted.
constexpr double kBlipUtilPct = 1.0;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) from the top 53 bits; independent of the standard
  // library's distribution implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double quantize(double v, double step) { return std::round(v / step) * step; }
double quantize_pct(double v) { return std::round(v * 100.0) / 100.0; }
double quantize_watts(double v) { return std::round(v * 10.0) / 10.0; }

std::pair<int, int> class_node_range(JobClass c) {
  switch (c) {
    case JobClass::kSmall: return {10, 24};
    case JobClass::kMedium: return {25, 99};
    case JobClass::kLarge: return {100, 496};
    case JobClass::kUnclassified: break;
  }
  return {1, 9};
}

std::pair<int, int> effective_range(const ScenarioSpec& spec, JobClass c) {
  const auto [lo, hi] = class_node_range(c);
  return {std::max(lo, spec.min_nodes), std::min(hi, spec.max_nodes)};
}

double draw_target(Rng& rng, RiCategory c, RiMode mode, int num_nodes) {
  switch (c) {
    case RiCategory::kConstant: return mode == RiMode::kTemporal ? 0.0 : rng.uniform(0.0, 0.13);
    case RiCategory::kPhased: return rng.uniform(0.27, 0.53);
    case RiCategory::kStochastic: {
      double hi = 0.80;
      if (mode == RiMode::kSpatial) {
        const double n = num_nodes;
        hi = std::min(hi, 1.0 - (1.0 + (n - 1.0) * kMinNodeWeight) / n - 0.01);
      }
      return rng.uniform(0.67, std::max(0.67, hi));
    }
  }
  return 0.0;
}

// Per-node peaks (fractions of the job peak): one node at exactly 1, the rest
// spread randomly but with a mean chosen so the spatial coefficient equals `target`.
std::vector<double> spatial_weights(Rng& rng, int n, double target) {
  std::vector<double> w(static_cast<std::size_t>(n), 1.0);
  if (n == 1) return w;
  const auto top = static_cast<std::size_t>(rng.integer(0, n - 1));
  const double mu = (n * (1.0 - target) - 1.0) / (n - 1.0);
  std::vector<double> raw;
  for (int i = 0; i < n - 1; ++i) raw.push_back(rng.uniform());
  const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(raw.size());
  const auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
  double scale = 1.0;
  if (mean - *mn > 0) scale = std::min(scale, (mu - kMinNodeWeight) / (mean - *mn));
  if (*mx - mean > 0) scale = std::min(scale, (1.0 - mu) / (*mx - mean));
  scale = std::max(scale, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i == top) continue;
    w[i] = std::clamp(mu + (raw[k++] - mean) * scale, 0.0, 1.0);
  }
  return w;
}

// Time shape with max exactly 1 and mean exactly 1 - target (when attainable).
std::vector<double> temporal_shape(Rng& rng, RiCategory c, double target, std::size_t len) {
  std::vector<double> raw(len, 1.0);
  if (c == RiCategory::kConstant || len < 2) return raw;
  if (c == RiCategory::kPhased) {
    // Square wave: high for `duty` of each cycle, low otherwise.
    const auto cycle = static_cast<std::size_t>(rng.integer(12, 120));
    const double duty = rng.uniform(0.25, 0.4);
    const auto high = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(duty * cycle)));
    const auto offset = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(cycle) - 1));
    for (std::size_t t = 0; t < len; ++t) raw[t] = ((t + offset) % cycle) < high ? 1.0 : 0.0;
  } else {
    for (auto& v : raw) v = std::pow(rng.uniform(), 6.0);
    const auto peak = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(len) - 1));
    raw[peak] = 1.0;
    const double mx = *std::max_element(raw.begin(), raw.end());
    for (auto& v : raw) v /= mx;
  }
  const double dip = 1.0 - std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(len);
  if (dip <= 0.0) return std::vector<double>(len, 1.0);
  const double a = std::min(1.0, target / dip);
  for (auto& v : raw) v = 1.0 - a * (1.0 - v);
  return raw;
}

std::string host_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "n%04d", i + 1);
  return buf;
}

struct JobOutput {
  JobRecord job;
  std::vector<std::string> hosts;
  std::vector<TelemetrySample> samples;
};

// Generates jobs in order; `emit` receives each job with its telemetry
// (job samples followed by two idle samples per host at end and end + period).
GroundTruth generate_impl(const ScenarioSpec& spec, Timestamp& range_end,
                          const std::function<void(JobOutput&)>& emit) {
  spec.validate();
  GroundTruth truth;
  truth.seed = spec.seed;
  Rng sched(splitmix64(spec.seed));
  std::vector<Timestamp> free_at(static_cast<std::size_t>(spec.cluster_hosts), spec.start_time);
  std::vector<int> order(static_cast<std::size_t>(spec.cluster_hosts));
  const Timestamp period = spec.sample_period;
  range_end = spec.start_time + period;

  for (int j = 0; j < spec.jobs; ++j) {
    Rng rng(splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(j) + 1)));
    JobTruth t;
    char id[32];
    std::snprintf(id, sizeof id, "job%05d", j + 1);
    t.job_id = id;

    const double u = sched.uniform();
    t.job_class = u < spec.mix_small ? JobClass::kSmall
                  : u < spec.mix_small + spec.mix_medium ? JobClass::kMedium
                                                         : JobClass::kLarge;
    const auto [lo, hi] = effective_range(spec, t.job_class);
    t.num_nodes = std::min(hi, lo + static_cast<int>((hi - lo + 1) * std::pow(sched.uniform(), 3.0)));
    const Timestamp steps = sched.integer((spec.min_runtime + period - 1) / period, spec.max_runtime / period);
    t.runtime_seconds = steps * period;
    t.node_hours = t.num_nodes * static_cast<double>(t.runtime_seconds) / 3600.0;

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return free_at[a] < free_at[b]; });
    Timestamp start = spec.start_time + static_cast<Timestamp>(j) * spec.arrival_spacing;
    for (int k = 0; k < t.num_nodes; ++k) start = std::max(start, free_at[order[k]]);
    start = spec.start_time + (start - spec.start_time + period - 1) / period * period;
    const Timestamp end = start + t.runtime_seconds;

    JobOutput out;
    out.job.job_id = t.job_id;
    out.job.user = "user" + std::to_string(rng.integer(1, 40));
    out.job.project = "proj" + std::to_string(rng.integer(1, 12));
    out.job.queue = std::string(to_string(t.job_class));
    out.job.submit_time = start - rng.integer(0, 3600);
    out.job.start_time = start;
    out.job.end_time = end;
    out.job.requested_nodes = t.num_nodes;
    std::vector<int> node_index(order.begin(), order.begin() + t.num_nodes);
    std::sort(node_index.begin(), node_index.end());
    for (const int h : node_index) {
      out.hosts.push_back(host_name(h));
      free_at[h] = end + 2 * period;
    }
    range_end = std::max(range_end, end + 2 * period);

    t.gpu_count = rng.uniform() < spec.zero_gpu_fraction ? 0 : static_cast<int>(rng.integer(1, 4));
    for (std::size_t m = 0; m < kRiMetrics.size(); ++m) {
      for (RiCategory* label : {&t.temporal[m], &t.spatial[m]}) {
        if (spec.pattern == "random") {
          *label = static_cast<RiCategory>(rng.integer(0, 2));
        } else {
          *label = *parse_ri_category(spec.pattern);
        }
      }
      // Without an active GPU, utilization is identically zero and therefore constant.
      if (t.gpu_count == 0 && kRiMetrics[m] != Metric::kMemAlloc) {
        t.temporal[m] = RiCategory::kConstant;
        t.spatial[m] = RiCategory::kConstant;
      }
      if (t.num_nodes == 1) t.spatial[m] = RiCategory::kConstant;
      t.temporal_target[m] = draw_target(rng, t.temporal[m], RiMode::kTemporal, t.num_nodes);
      t.spatial_target[m] = draw_target(rng, t.spatial[m], RiMode::kSpatial, t.num_nodes);
    }

    const std::array<double, 3> job_peak = {rng.uniform(40.0, 100.0), rng.uniform(20.0, 90.0),
                                            rng.uniform(8.0, 38.0) * kGiB};
    std::array<std::vector<double>, 3> weights;
    for (std::size_t m = 0; m < 3; ++m) weights[m] = spatial_weights(rng, t.num_nodes, t.spatial_target[m]);
    const int alloc_gpus = t.gpu_count == 0 ? 1 : t.gpu_count;
    // Node holding the load peak gets a sub-threshold blip on its first unused GPU.
    const auto load_top = static_cast<std::size_t>(
        std::max_element(weights[0].begin(), weights[0].end()) - weights[0].begin());
    const bool blip = t.gpu_count > 0 && t.gpu_count < kGpusPerNode && t.temporal[0] != RiCategory::kConstant;
    const auto blip_at = static_cast<std::size_t>(rng.integer(0, steps - 1));

    double joules = 0.0;
    for (std::size_t n = 0; n < static_cast<std::size_t>(t.num_nodes); ++n) {
      std::array<std::vector<double>, 3> shape;
      for (std::size_t m = 0; m < 3; ++m) {
        shape[m] = temporal_shape(rng, t.temporal[m], t.temporal_target[m], static_cast<std::size_t>(steps));
      }
      double prev_power = 0.0;
      for (std::size_t k = 0; k < static_cast<std::size_t>(steps); ++k) {
        TelemetrySample s;
        s.timestamp = start + static_cast<Timestamp>(k) * period;
        s.host = out.hosts[n];
        const double util = quantize_pct(job_peak[0] * weights[0][n] * shape[0][k]);
        const double mem = quantize_pct(job_peak[1] * weights[1][n] * shape[1][k]);
        const double alloc = quantize(job_peak[2] * weights[2][n] * shape[2][k], kMiB);
        for (int g = 0; g < kGpusPerNode; ++g) {
          const bool active = g < t.gpu_count;
          s.gpu_util[g] = active ? util : 0.0;
          s.gpu_mem_util[g] = active ? mem : 0.0;
          s.gpu_mem_alloc[g] = g < alloc_gpus ? alloc : 0.0;
          s.gpu_power[g] = quantize_watts(spec.idle_power_w + (spec.tdp_w - spec.idle_power_w) * s.gpu_util[g] / 100.0);
        }
        if (blip && n == load_top && k == blip_at) s.gpu_util[t.gpu_count] = kBlipUtilPct;
        const double power = node_power(s);
        if (k > 0) joules += static_cast<double>(period) * (prev_power + power) / 2.0;
        prev_power = power;
        out.samples.push_back(std::move(s));
      }
      for (const Timestamp idle_t : {end, end + period}) {
        TelemetrySample s;
        s.timestamp = idle_t;
        s.host = out.hosts[n];
        s.gpu_power.fill(quantize_watts(spec.idle_power_w));
        out.samples.push_back(std::move(s));
        ++truth.idle_rows;
      }
    }
    t.total_energy = joules / 1000.0;
    truth.telemetry_rows += out.samples.size();
    truth.jobs.push_back(std::move(t));
    emit(out);
  }
  range_end += period;
  return truth;
}

const char* category_name(RiCategory c) { return to_string(c).data(); }

}  // namespace

// ---------------------------------------------------------------------------
// ScenarioSpec

void ScenarioSpec::validate() const {
  if (jobs < 1) throw InvalidInput("scenario: job count must be >= 1");
  const double mix[] = {mix_small, mix_medium, mix_large};
  for (const double f : mix) {
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidInput("scenario: mix fractions must lie in [0,1]");
  }
  if (std::abs(mix_small + mix_medium + mix_large - 1.0) > 1e-9) {
    throw InvalidInput("scenario: mix fractions must sum to 1");
  }
  if (pattern != "random" && !parse_ri_category(pattern)) {
    throw InvalidInput("scenario: pattern must be random, constant, phased or stochastic");
  }
  if (sample_period < 1) throw InvalidInput("scenario: sample_period must be >= 1 s");
  if (min_nodes < 1 || max_nodes < min_nodes) throw InvalidInput("scenario: bad node range");
  if (min_runtime < sample_period || max_runtime < min_runtime ||
      max_runtime / sample_period < (min_runtime + sample_period - 1) / sample_period) {
    throw InvalidInput("scenario: runtime range must hold at least one sample period");
  }
  if (!(idle_power_w >= 0.0 && tdp_w > idle_power_w)) throw InvalidInput("scenario: need 0 <= idle power < TDP");
  if (arrival_spacing < 0) throw InvalidInput("scenario: arrival_spacing must be >= 0");
  if (!(zero_gpu_fraction >= 0.0 && zero_gpu_fraction <= 1.0)) {
    throw InvalidInput("scenario: zero_gpu_fraction must lie in [0,1]");
  }
  const JobClass classes[] = {JobClass::kSmall, JobClass::kMedium, JobClass::kLarge};
  for (int i = 0; i < 3; ++i) {
    if (mix[i] == 0.0) continue;
    const auto [lo, hi] = effective_range(*this, classes[i]);
    if (lo > hi) {
      throw InvalidInput("scenario: node range excludes the " + std::string(to_string(classes[i])) + " class");
    }
    if (hi > cluster_hosts) throw InvalidInput("scenario: cluster_hosts smaller than the largest job");
  }
}

ScenarioSpec ScenarioSpec::from_config(const std::map<std::string, std::string>& kv) {
  ScenarioSpec s;
  for (const auto& [key, value] : kv) {
    auto number = [&]() {
      const auto v = parse_double(value);
      if (!v) throw InvalidInput("scenario: bad number for " + key + ": " + value);
      return *v;
    };
    auto integer = [&]() {
      const auto v = parse_int(value);
      if (!v) throw InvalidInput("scenario: bad integer for " + key + ": " + value);
      return *v;
    };
    if (key == "seed") s.seed = static_cast<std::uint64_t>(integer());
    else if (key == "jobs") s.jobs = static_cast<int>(integer());
    else if (key == "mix") {
      CsvSplitter split;
      const auto parts = split.split(value);
      if (parts.size() != 3) throw InvalidInput("scenario: mix needs three fractions small,medium,large");
      double* dst[] = {&s.mix_small, &s.mix_medium, &s.mix_large};
      for (int i = 0; i < 3; ++i) {
        const auto v = parse_double(parts[i]);
        if (!v) throw InvalidInput("scenario: bad mix fraction");
        *dst[i] = *v;
      }
    } else if (key == "mix_small") s.mix_small = number();
    else if (key == "mix_medium") s.mix_medium = number();
    else if (key == "mix_large") s.mix_large = number();
    else if (key == "pattern") s.pattern = value;
    else if (key == "sample_period") s.sample_period = integer();
    else if (key == "min_nodes") s.min_nodes = static_cast<int>(integer());
    else if (key == "max_nodes") s.max_nodes = static_cast<int>(integer());
    else if (key == "min_runtime") s.min_runtime = integer();
    else if (key == "max_runtime") s.max_runtime = integer();
    else if (key == "idle_power") s.idle_power_w = number();
    else if (key == "tdp") s.tdp_w = number();
    else if (key == "start_time") {
      const auto t = parse_timestamp(value);
      if (!t) throw InvalidInput("scenario: bad start_time");
      s.start_time = *t;
    } else if (key == "arrival_spacing") s.arrival_spacing = integer();
    else if (key == "cluster_hosts") s.cluster_hosts = static_cast<int>(integer());
    else if (key == "zero_gpu_fraction") s.zero_gpu_fraction = number();
    else throw InvalidInput("scenario: unknown key '" + key + "'");
  }
  s.validate();
  return s;
}

std::map<std::string, std::string> ScenarioSpec::to_config() const {
  return {{"seed", std::to_string(seed)},
          {"jobs", std::to_string(jobs)},
          {"mix_small", format_double(mix_small)},
          {"mix_medium", format_double(mix_medium)},
          {"mix_large", format_double(mix_large)},
          {"pattern", pattern},
          {"sample_period", std::to_string(sample_period)},
          {"min_nodes", std::to_string(min_nodes)},
          {"max_nodes", std::to_string(max_nodes)},
          {"min_runtime", std::to_string(min_runtime)},
          {"max_runtime", std::to_string(max_runtime)},
          {"idle_power", format_double(idle_power_w)},
          {"tdp", format_double(tdp_w)},
          {"start_time", format_iso8601(start_time)},
          {"arrival_spacing", std::to_string(arrival_spacing)},
          {"cluster_hosts", std::to_string(cluster_hosts)},
          {"zero_gpu_fraction", format_double(zero_gpu_fraction)}};
}

// ---------------------------------------------------------------------------
// Ground truth

double GroundTruth::total_node_hours() const {
  double total = 0.0;
  for (const auto& j : jobs) total += j.node_hours;
  return total;
}

double GroundTruth::total_energy() const {
  double total = 0.0;
  for (const auto& j : jobs) total += j.total_energy;
  return total;
}

std::string GroundTruth::to_json() const {
  nlohmann::ordered_json doc;
  doc["seed"] = seed;
  doc["telemetry_rows"] = telemetry_rows;
  doc["idle_rows"] = idle_rows;
  doc["total_node_hours"] = total_node_hours();
  doc["total_energy"] = total_energy();
  doc["jobs"] = nlohmann::ordered_json::array();
  for (const auto& j : jobs) {
    nlohmann::ordered_json row;
    row["job_id"] = j.job_id;
    row["job_class"] = to_string(j.job_class);
    row["num_nodes"] = j.num_nodes;
    row["gpu_count"] = j.gpu_count;
    row["runtime_seconds"] = j.runtime_seconds;
    row["node_hours"] = j.node_hours;
    row["total_energy"] = j.total_energy;
    for (std::size_t m = 0; m < kRiMetrics.size(); ++m) {
      const std::string name(to_string(kRiMetrics[m]));
      row["ri_temporal_" + name] = {{"category", category_name(j.temporal[m])}, {"target", j.temporal_target[m]}};
      row["ri_spatial_" + name] = {{"category", category_name(j.spatial[m])}, {"target", j.spatial_target[m]}};
    }
    doc["jobs"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

GroundTruth GroundTruth::from_json(const std::string& text) {
  GroundTruth t;
  try {
    const auto doc = nlohmann::json::parse(text);
    t.seed = doc.at("seed").get<std::uint64_t>();
    t.telemetry_rows = doc.at("telemetry_rows").get<std::size_t>();
    t.idle_rows = doc.at("idle_rows").get<std::size_t>();
    for (const auto& row : doc.at("jobs")) {
      JobTruth j;
      j.job_id = row.at("job_id").get<std::string>();
      j.job_class = parse_job_class(row.at("job_class").get<std::string>()).value();
      j.num_nodes = row.at("num_nodes").get<int>();
      j.gpu_count = row.at("gpu_count").get<int>();
      j.runtime_seconds = row.at("runtime_seconds").get<Timestamp>();
      j.node_hours = row.at("node_hours").get<double>();
      j.total_energy = row.at("total_energy").get<double>();
      for (std::size_t m = 0; m < kRiMetrics.size(); ++m) {
        const std::string name(to_string(kRiMetrics[m]));
        const auto& temporal = row.at("ri_temporal_" + name);
        const auto& spatial = row.at("ri_spatial_" + name);
        j.temporal[m] = parse_ri_category(temporal.at("category").get<std::string>()).value();
        j.spatial[m] = parse_ri_category(spatial.at("category").get<std::string>()).value();
        j.temporal_target[m] = temporal.at("target").get<double>();
        j.spatial_target[m] = spatial.at("target").get<double>();
      }
      t.jobs.push_back(std::move(j));
    }
  } catch (const std::exception& e) {
    throw SchemaError(std::string("ground truth: ") + e.what());
  }
  return t;
}

// ---------------------------------------------------------------------------
// Generation

Scenario generate(const ScenarioSpec& spec) {
  Scenario s;
  s.range_start = spec.start_time;
  s.truth = generate_impl(spec, s.range_end, [&](JobOutput& out) {
    s.jobs.push_back(out.job);
    for (const auto& h : out.hosts) s.hosts.push_back({out.job.job_id, h});
    std::move(out.samples.begin(), out.samples.end(), std::back_inserter(s.telemetry));
  });
  return s;
}

GroundTruth write_scenario(const ScenarioSpec& spec, const fs::path& dir) {
  spec.validate();
  fs::create_directories(dir);
  std::vector<JobRecord> jobs;
  std::vector<HostAssignment> hosts;

  std::ofstream telemetry(dir / "telemetry.csv", std::ios::binary | std::ios::trunc);
  if (!telemetry) throw Error("cannot write " + (dir / "telemetry.csv").string());
  write_telemetry(telemetry, {});
  std::string buf;
  Timestamp range_end = 0;
  GroundTruth truth = generate_impl(spec, range_end, [&](JobOutput& out) {
    jobs.push_back(out.job);
    for (const auto& h : out.hosts) hosts.push_back({out.job.job_id, h});
    buf.clear();
    for (const auto& s : out.samples) {
      buf += std::to_string(s.timestamp);
      buf.push_back(',');
      buf += s.host;
      append_gpu_fields(buf, s);
      buf.push_back('\n');
    }
    telemetry.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  });
  telemetry.close();
  if (!telemetry) throw Error("write failed: " + (dir / "telemetry.csv").string());

  {
    std::ofstream out(dir / "jobs.csv", std::ios::binary | std::ios::trunc);
    write_job_log(out, jobs);
  }
  {
    std::ofstream out(dir / "hosts.csv", std::ios::binary | std::ios::trunc);
    write_host_log(out, hosts);
  }
  {
    std::ofstream out(dir / "truth.json", std::ios::binary | std::ios::trunc);
    out << truth.to_json();
  }
  {
    std::ofstream out(dir / "scenario.conf", std::ios::binary | std::ios::trunc);
    for (const auto& [k, v] : spec.to_config()) out << k << " = " << v << '\n';
  }
  DatasetManifest manifest;
  manifest.job_logs = {dir / "jobs.csv"};
  manifest.host_logs = {dir / "hosts.csv"};
  manifest.telemetry = {dir / "telemetry.csv"};
  manifest.range_start = spec.start_time;
  manifest.range_end = range_end;
  manifest.save(dir / "manifest.json");
  return truth;
}

// ---------------------------------------------------------------------------
// Oracles

std::vector<std::optional<std::string>> oracle_join(std::span<const TelemetrySample> samples,
                                                    std::span<const JobRecord> jobs,
                                                    std::span<const HostAssignment> hosts) {
  struct Occupancy {
    const JobRecord* job;
    std::string host;
  };
  std::vector<Occupancy> occupancy;
  for (const auto& a : hosts) {
    const JobRecord* owner = nullptr;
    for (const auto& j : jobs) {
      if (j.job_id == a.job_id) owner = &j;
    }
    if (!owner) throw FusionError("host assignment references unknown job " + a.job_id);
    bool duplicate = false;
    for (const auto& o : occupancy) duplicate = duplicate || (o.job == owner && o.host == a.host);
    if (!duplicate) occupancy.push_back({owner, a.host});
  }
  for (std::size_t i = 0; i < occupancy.size(); ++i) {
    for (std::size_t k = i + 1; k < occupancy.size(); ++k) {
      const auto& a = occupancy[i];
      const auto& b = occupancy[k];
      if (a.host == b.host && a.job->start_time < b.job->end_time && b.job->start_time < a.job->end_time) {
        throw FusionError("overlapping jobs on " + a.host + ": " + a.job->job_id + "," + b.job->job_id);
      }
    }
  }
  std::vector<std::optional<std::string>> tags;
  tags.reserve(samples.size());
  for (const auto& s : samples) {
    std::optional<std::string> tag;
    for (const auto& o : occupancy) {
      if (o.host == s.host && o.job->start_time <= s.timestamp && s.timestamp < o.job->end_time) {
        tag = o.job->job_id;
      }
    }
    tags.push_back(std::move(tag));
  }
  return tags;
}

double oracle_ri(const std::vector<std::vector<double>>& per_node, RiMode mode) {
  if (per_node.empty()) throw InvalidInput("oracle_ri: no nodes");
  const std::size_t nodes = per_node.size();
  if (mode == RiMode::kTemporal) {
    double result = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
      const auto& u = per_node[n];
      double numerator = 0.0;
      double denominator = 0.0;
      for (std::size_t t = 0; t < u.size(); ++t) {
        numerator += u[t];
        double node_max = 0.0;
        for (std::size_t tt = 0; tt < u.size(); ++tt) node_max = std::max(node_max, u[tt]);
        denominator += node_max;
      }
      const double term = denominator == 0.0 ? 0.0 : 1.0 - numerator / denominator;
      result = n == 0 ? term : std::max(result, term);
    }
    return result;
  }
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t n = 0; n < nodes; ++n) {
    double node_max = 0.0;
    for (const double v : per_node[n]) node_max = std::max(node_max, v);
    numerator += node_max;
    double global_max = 0.0;
    for (std::size_t nn = 0; nn < nodes; ++nn) {
      for (const double v : per_node[nn]) global_max = std::max(global_max, v);
    }
    denominator += global_max;
  }
  return denominator == 0.0 ? 0.0 : 1.0 - numerator / denominator;
}

DescriptiveStats oracle_stats(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("oracle_stats: empty");
  DescriptiveStats s{values[0], values[0], 0.0, 0.0};
  double sum = 0.0;
  for (const double v : values) {
    sum += v;
    if (v < s.min) s.min = v;
    if (v > s.max) s.max = v;
  }
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

std::optional<double> oracle_pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace coan
