#include "coan/model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "coan/error.hpp"

namespace coan {

double node_util(const TelemetrySample& s) {
  return std::accumulate(s.gpu_util.begin(), s.gpu_util.end(), 0.0) / kGpusPerNode;
}

double node_mem_util(const TelemetrySample& s) {
  return std::accumulate(s.gpu_mem_util.begin(), s.gpu_mem_util.end(), 0.0) / kGpusPerNode;
}

double node_alloc_pct(const TelemetrySample& s) {
  return std::accumulate(s.gpu_mem_alloc.begin(), s.gpu_mem_alloc.end(), 0.0) /
         kNodeGpuMemoryBytes * 100.0;
}

double node_power(const TelemetrySample& s) {
  return std::accumulate(s.gpu_power.begin(), s.gpu_power.end(), 0.0);
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kLoad: return "load";
    case Metric::kMemUtil: return "mem_util";
    case Metric::kMemAlloc: return "mem_alloc";
    case Metric::kPower: return "power";
  }
  return "?";
}

const std::vector<double>& NodeSeries::values(Metric m) const {
  switch (m) {
    case Metric::kLoad: return node_util;
    case Metric::kMemUtil: return node_mem_util;
    case Metric::kMemAlloc: return node_alloc_pct;
    case Metric::kPower: return node_power;
  }
  return node_util;
}

void NodeSeries::append(const TelemetrySample& s) {
  if (!timestamps.empty() && s.timestamp <= timestamps.back()) {
    throw InvalidInput("node series for job " + job_id + " on " + host +
                       ": timestamps not strictly increasing at " + std::to_string(s.timestamp));
  }
  timestamps.push_back(s.timestamp);
  node_util.push_back(coan::node_util(s));
  node_mem_util.push_back(coan::node_mem_util(s));
  node_alloc_pct.push_back(coan::node_alloc_pct(s));
  node_power.push_back(coan::node_power(s));
  for (int g = 0; g < kGpusPerNode; ++g) {
    gpu_util_peak[g] = std::max(gpu_util_peak[g], s.gpu_util[g]);
  }
}

std::string_view to_string(RiCategory c) {
  switch (c) {
    case RiCategory::kConstant: return "constant";
    case RiCategory::kPhased: return "phased";
    case RiCategory::kStochastic: return "stochastic";
  }
  return "?";
}

std::optional<RiCategory> parse_ri_category(std::string_view s) {
  if (s == "constant") return RiCategory::kConstant;
  if (s == "phased") return RiCategory::kPhased;
  if (s == "stochastic") return RiCategory::kStochastic;
  return std::nullopt;
}

RiCategory classify_ri(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvalidInput("RI value outside [0,1]: " + std::to_string(value));
  }
  if (value <= 0.2) return RiCategory::kConstant;
  if (value <= 0.6) return RiCategory::kPhased;
  return RiCategory::kStochastic;
}

std::string_view to_string(JobClass c) {
  switch (c) {
    case JobClass::kSmall: return "small";
    case JobClass::kMedium: return "medium";
    case JobClass::kLarge: return "large";
    case JobClass::kUnclassified: return "unclassified";
  }
  return "?";
}

std::optional<JobClass> parse_job_class(std::string_view s) {
  if (s == "small") return JobClass::kSmall;
  if (s == "medium") return JobClass::kMedium;
  if (s == "large") return JobClass::kLarge;
  if (s == "unclassified") return JobClass::kUnclassified;
  return std::nullopt;
}

JobClass classify_job(int num_nodes) {
  if (num_nodes < 1) {
    throw InvalidInput("node count must be >= 1, got " + std::to_string(num_nodes));
  }
  if (num_nodes >= 10 && num_nodes <= 24) return JobClass::kSmall;
  if (num_nodes >= 25 && num_nodes <= 99) return JobClass::kMedium;
  if (num_nodes >= 100 && num_nodes <= 496) return JobClass::kLarge;
  return JobClass::kUnclassified;
}

}  // namespace coan
