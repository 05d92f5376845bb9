#include "coan/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

#include "coan/error.hpp"
#include "coan/text.hpp"

namespace coan {

namespace fs = std::filesystem;

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<CdfPoint> points;
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    points.push_back({values[i], i + 1 == values.size() ? 1.0 : static_cast<double>(i + 1) / n});
  }
  return points;
}

std::map<JobClass, std::vector<CdfPoint>> cdf_by_class(std::span<const JobSummary> summaries,
                                                       std::string_view metric) {
  std::map<JobClass, std::vector<double>> values;
  for (const auto& s : summaries) {
    if (s.job_class == JobClass::kUnclassified) continue;
    if (const auto v = summary_value(s, metric)) values[s.job_class].push_back(*v);
  }
  std::map<JobClass, std::vector<CdfPoint>> out;
  for (auto& [cls, v] : values) out[cls] = empirical_cdf(std::move(v));
  return out;
}

ClassBreakdown class_breakdown(std::span<const JobSummary> summaries) {
  ClassBreakdown b;
  for (const JobClass c : {JobClass::kSmall, JobClass::kMedium, JobClass::kLarge, JobClass::kUnclassified}) {
    ClassTotals row;
    row.job_class = c;
    b.rows.push_back(row);
  }
  b.all.job_class = JobClass::kUnclassified;
  for (const auto& s : summaries) {
    const double energy = s.metrics ? s.metrics->total_energy : 0.0;
    auto& row = b.rows[static_cast<std::size_t>(s.job_class)];
    for (ClassTotals* t : {&row, &b.all}) {
      ++t->jobs;
      t->node_hours += s.node_hours;
      t->total_energy += energy;
    }
  }
  double jobs = 0, node_hours = 0, energy = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    jobs += static_cast<double>(b.rows[i].jobs);
    node_hours += b.rows[i].node_hours;
    energy += b.rows[i].total_energy;
  }
  auto share = [](double part, double whole) -> std::optional<double> {
    if (whole > 0.0) return part / whole;
    return std::nullopt;
  };
  for (std::size_t i = 0; i < 3; ++i) {
    auto& r = b.rows[i];
    r.job_share = share(static_cast<double>(r.jobs), jobs);
    r.node_hours_share = share(r.node_hours, node_hours);
    r.energy_share = share(r.total_energy, energy);
  }
  return b;
}

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sequence");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("box statistics of an empty group");
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.n = values.size();
  b.q1 = quantile_linear(values, 0.25);
  b.median = quantile_linear(values, 0.5);
  b.q3 = quantile_linear(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double low_fence = b.q1 - 1.5 * iqr;
  const double high_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (const double v : values) {
    if (v < low_fence || v > high_fence) {
      b.outliers.push_back(v);
      continue;
    }
    b.whisker_low = std::min(b.whisker_low, v);
    b.whisker_high = std::max(b.whisker_high, v);
  }
  return b;
}

std::vector<BoxGroup> power_boxplot_stats(std::span<const JobSummary> summaries) {
  std::map<std::pair<JobClass, int>, std::vector<double>> groups;
  for (const auto& s : summaries) {
    if (s.job_class == JobClass::kUnclassified || !s.metrics) continue;
    groups[{s.job_class, s.metrics->gpu_count}].push_back(s.metrics->total_power_mean);
  }
  std::vector<BoxGroup> out;
  for (auto& [key, values] : groups) out.push_back({key.first, key.second, box_stats(std::move(values))});
  return out;
}

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out.flush()) throw Error("write failed: " + path.string());
}

}  // namespace

std::string heatmap_export(const CorrelationMatrix& matrix) {
  std::string out = "metric";
  for (const auto& m : matrix.metrics) out += "," + csv_escape(m);
  out.push_back('\n');
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out += csv_escape(matrix.metrics[i]);
    for (std::size_t j = 0; j < matrix.size(); ++j) out += "," + optional_cell(matrix.at(i, j));
    out.push_back('\n');
  }
  return out;
}

std::string cdf_csv(const std::map<JobClass, std::vector<CdfPoint>>& cdf) {
  std::string out = "class,value,fraction\n";
  for (const auto& [cls, points] : cdf) {
    for (const auto& p : points) {
      out += std::string(to_string(cls)) + "," + format_double(p.value) + "," + format_double(p.fraction) + "\n";
    }
  }
  return out;
}

std::string class_breakdown_csv(const ClassBreakdown& b) {
  std::string out = "class,jobs,node_hours,total_energy,job_share,node_hours_share,energy_share\n";
  auto row = [&](std::string_view name, const ClassTotals& t) {
    out += std::string(name) + "," + std::to_string(t.jobs) + "," + format_double(t.node_hours) + "," +
           format_double(t.total_energy) + "," + optional_cell(t.job_share) + "," +
           optional_cell(t.node_hours_share) + "," + optional_cell(t.energy_share) + "\n";
  };
  for (const auto& r : b.rows) row(to_string(r.job_class), r);
  row("all", b.all);
  return out;
}

std::string power_box_csv(std::span<const BoxGroup> groups) {
  std::string out = "class,gpu_count,n,q1,median,q3,whisker_low,whisker_high,outliers\n";
  for (const auto& g : groups) {
    std::string outliers;
    for (const double v : g.stats.outliers) {
      if (!outliers.empty()) outliers.push_back(';');
      append_double(outliers, v);
    }
    out += std::string(to_string(g.job_class)) + "," + std::to_string(g.gpu_count) + "," +
           std::to_string(g.stats.n) + "," + format_double(g.stats.q1) + "," + format_double(g.stats.median) +
           "," + format_double(g.stats.q3) + "," + format_double(g.stats.whisker_low) + "," +
           format_double(g.stats.whisker_high) + "," + outliers + "\n";
  }
  return out;
}

std::vector<std::string> write_report(std::span<const JobSummary> summaries, const fs::path& summary_path,
                                      const fs::path& out_dir, const ReportConfig& config) {
  fs::create_directories(out_dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, std::string_view text) {
    write_text(out_dir / name, text);
    files.push_back(name);
  };

  for (const auto& metric : config.cdf_metrics) {
    emit("cdf_" + metric + ".csv", cdf_csv(cdf_by_class(summaries, metric)));
  }
  emit("class_breakdown.csv", class_breakdown_csv(class_breakdown(summaries)));
  emit("power_box.csv", power_box_csv(power_boxplot_stats(summaries)));
  if (summaries.size() >= 2) {
    emit("correlation.csv", heatmap_export(pearson_matrix(summaries, config.correlation_metrics)));
  }

  nlohmann::ordered_json manifest;
  manifest["tool"] = "coan";
  manifest["version"] = kToolVersion;
  manifest["config"] = {{"cdf_metrics", config.cdf_metrics}, {"correlation_metrics", config.correlation_metrics}};
  manifest["inputs"] = nlohmann::ordered_json::array();
  if (!summary_path.empty()) {
    manifest["inputs"].push_back(
        {{"path", summary_path.filename().string()}, {"sha256", sha256_file_hex(summary_path.string())}});
  }
  manifest["jobs"] = summaries.size();
  manifest["outputs"] = files;
  emit("run_manifest.json", manifest.dump(2) + "\n");
  return files;
}

}  // namespace coan
