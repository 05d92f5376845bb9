#include "coan/ingest.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>
#include <utility>

#include "json.hpp"

#include "coan/error.hpp"
#include "coan/text.hpp"

namespace coan {

namespace fs = std::filesystem;

ColumnMapping ColumnMapping::load(const fs::path& path) {
  return ColumnMapping(read_flat_config_file(path.string()));
}

std::string_view ColumnMapping::source_name(std::string_view canonical) const {
  const auto it = renames_.find(std::string(canonical));
  return it == renames_.end() ? canonical : std::string_view(it->second);
}

namespace {

std::vector<std::string> gpu_columns() {
  std::vector<std::string> cols;
  for (const char* metric : {"gpu_util", "gpu_mem_util", "gpu_mem_alloc", "gpu_power"}) {
    for (int g = 0; g < kGpusPerNode; ++g) cols.push_back(std::string(metric) + "_" + std::to_string(g));
  }
  return cols;
}

// Resolves each canonical column to its position in the header row.
class HeaderIndex {
 public:
  HeaderIndex(std::istream& in, const std::vector<std::string>& required,
              const ColumnMapping& mapping, std::string_view what) {
    std::string header;
    if (!read_line(in, header)) {
      throw SchemaError(std::string(what) + ": missing header row");
    }
    CsvSplitter splitter;
    const auto& names = splitter.split(header);
    width_ = names.size();
    for (const auto& canonical : required) {
      const auto source = mapping.source_name(canonical);
      std::size_t found = names.size();
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (trim(names[i]) == source) {
          found = i;
          break;
        }
      }
      if (found == names.size()) {
        throw SchemaError(std::string(what) + ": missing required column '" + std::string(source) +
                          "'");
      }
      positions_.push_back(found);
    }
  }

  std::size_t width() const { return width_; }
  std::size_t operator[](std::size_t required_index) const { return positions_[required_index]; }

 private:
  std::vector<std::size_t> positions_;
  std::size_t width_ = 0;
};

// Drives the row loop shared by every parser: blank lines are skipped, the
// field count is checked, and `convert` either fills a record or returns a
// reject reason.
template <class Record, class Convert>
ParseResult<Record> parse_rows(std::istream& in, const std::vector<std::string>& required,
                               const ColumnMapping& mapping, std::string_view what,
                               Convert&& convert) {
  HeaderIndex index(in, required, mapping, what);
  ParseResult<Record> result;
  CsvSplitter splitter;
  std::vector<std::string_view> row(required.size());
  std::string line;
  std::size_t lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++result.total_rows;
    const auto& fields = splitter.split(line);
    if (fields.size() != index.width()) {
      result.rejects.push_back({lineno, "field count mismatch: expected " +
                                            std::to_string(index.width()) + ", got " +
                                            std::to_string(fields.size()),
                                line});
      continue;
    }
    for (std::size_t i = 0; i < required.size(); ++i) row[i] = trim(fields[index[i]]);
    Record record;
    std::string reason = convert(row, record);
    if (reason.empty()) {
      result.records.push_back(std::move(record));
    } else {
      result.rejects.push_back({lineno, std::move(reason), line});
    }
  }
  return result;
}

}  // namespace

const std::vector<std::string>& job_log_columns() {
  static const std::vector<std::string> cols = {"job_id",     "user",       "project",  "queue",
                                                "submit_time", "start_time", "end_time", "requested_nodes"};
  return cols;
}

const std::vector<std::string>& host_log_columns() {
  static const std::vector<std::string> cols = {"job_id", "host"};
  return cols;
}

const std::vector<std::string>& telemetry_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"timestamp", "host"};
    for (auto& g : gpu_columns()) c.push_back(std::move(g));
    return c;
  }();
  return cols;
}

ParseResult<JobRecord> parse_job_log(std::istream& in, const ColumnMapping& mapping) {
  std::unordered_set<std::string> seen;
  const auto& cols = job_log_columns();
  return parse_rows<JobRecord>(
      in, cols, mapping, "job log",
      [&](const std::vector<std::string_view>& f, JobRecord& job) -> std::string {
        if (f[0].empty()) return "empty job_id";
        Timestamp* times[] = {&job.submit_time, &job.start_time, &job.end_time};
        for (int i = 0; i < 3; ++i) {
          const auto t = parse_timestamp(f[4 + i]);
          if (!t) return "unparseable timestamp in " + cols[4 + i];
          *times[i] = *t;
        }
        const auto nodes = parse_int(f[7]);
        if (!nodes) return "unparseable requested_nodes";
        if (*nodes < 1 || *nodes > 1'000'000) return "requested_nodes out of range";
        if (job.end_time < job.start_time) return "negative runtime";
        job.job_id = f[0];
        job.user = f[1];
        job.project = f[2];
        job.queue = f[3];
        job.requested_nodes = static_cast<int>(*nodes);
        if (!seen.insert(job.job_id).second) return "duplicate job_id";
        return {};
      });
}

ParseResult<HostAssignment> parse_host_log(std::istream& in, const ColumnMapping& mapping) {
  std::set<std::pair<std::string, std::string>> seen;
  auto result = parse_rows<HostAssignment>(
      in, host_log_columns(), mapping, "host log",
      [&](const std::vector<std::string_view>& f, HostAssignment& a) -> std::string {
        if (f[0].empty()) return "empty job_id";
        if (f[1].empty()) return "empty host";
        a.job_id = f[0];
        a.host = f[1];
        if (!seen.emplace(a.job_id, a.host).second) return std::string(kRejectDuplicateAssignment);
        return {};
      });
  for (const auto& r : result.rejects) {
    if (r.reason == kRejectDuplicateAssignment) ++result.duplicates;
  }
  return result;
}

ParseResult<TelemetrySample> parse_telemetry(std::istream& in, const ColumnMapping& mapping) {
  const auto& cols = telemetry_columns();
  return parse_rows<TelemetrySample>(
      in, cols, mapping, "telemetry",
      [&](const std::vector<std::string_view>& f, TelemetrySample& s) -> std::string {
        const auto t = parse_timestamp(f[0]);
        if (!t) return "unparseable timestamp";
        if (f[1].empty()) return "empty host";
        s.timestamp = *t;
        GpuArray* groups[] = {&s.gpu_util, &s.gpu_mem_util, &s.gpu_mem_alloc, &s.gpu_power};
        for (int m = 0; m < 4; ++m) {
          for (int g = 0; g < kGpusPerNode; ++g) {
            const std::size_t col = 2 + m * kGpusPerNode + g;
            const auto v = parse_double(f[col]);
            if (!v) return "unparseable number in " + cols[col];
            if (!std::isfinite(*v)) return "non-finite value in " + cols[col];
            (*groups[m])[g] = *v;
          }
        }
        for (int g = 0; g < kGpusPerNode; ++g) {
          if (s.gpu_util[g] < 0 || s.gpu_util[g] > 100 || s.gpu_mem_util[g] < 0 ||
              s.gpu_mem_util[g] > 100) {
            return "percent out of range";
          }
          if (s.gpu_mem_alloc[g] < 0 || s.gpu_mem_alloc[g] > kGpuMemoryBytes) {
            return "allocation out of range";
          }
          if (s.gpu_power[g] < 0) return "negative power";
        }
        s.host = f[1];
        return {};
      });
}

void write_job_log(std::ostream& out, std::span<const JobRecord> jobs) {
  const auto& cols = job_log_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& j : jobs) {
    out << csv_escape(j.job_id) << ',' << csv_escape(j.user) << ',' << csv_escape(j.project) << ','
        << csv_escape(j.queue) << ',' << j.submit_time << ',' << j.start_time << ',' << j.end_time
        << ',' << j.requested_nodes << '\n';
  }
}

void write_host_log(std::ostream& out, std::span<const HostAssignment> hosts) {
  out << "job_id,host\n";
  for (const auto& h : hosts) out << csv_escape(h.job_id) << ',' << csv_escape(h.host) << '\n';
}

void append_gpu_fields(std::string& out, const TelemetrySample& s) {
  for (const GpuArray* group : {&s.gpu_util, &s.gpu_mem_util, &s.gpu_mem_alloc, &s.gpu_power}) {
    for (double v : *group) {
      out.push_back(',');
      append_double(out, v);
    }
  }
}

void write_telemetry(std::ostream& out, std::span<const TelemetrySample> samples) {
  const auto& cols = telemetry_columns();
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line.push_back(',');
    line += cols[i];
  }
  line.push_back('\n');
  out << line;
  for (const auto& s : samples) {
    line = std::to_string(s.timestamp);
    line.push_back(',');
    line += csv_escape(s.host);
    append_gpu_fields(line, s);
    line.push_back('\n');
    out << line;
  }
}

void write_rejects(std::ostream& out, std::span<const RejectedRow> rejects) {
  out << "line,reason,raw\n";
  for (const auto& r : rejects) {
    out << r.line << ',' << csv_escape(r.reason) << ',' << csv_escape(r.raw) << '\n';
  }
}

void DatasetManifest::validate() const {
  if (job_logs.empty()) throw InvalidInput("manifest: no job logs listed");
  if (host_logs.empty()) throw InvalidInput("manifest: no host logs listed");
  if (telemetry.empty()) throw InvalidInput("manifest: no telemetry files listed");
  if (range_end <= range_start) throw InvalidInput("manifest: time range must satisfy start < end");
}

namespace {

Timestamp json_timestamp(const nlohmann::json& v, const char* what) {
  if (v.is_number_integer()) return v.get<Timestamp>();
  if (v.is_string()) {
    if (const auto t = parse_timestamp(v.get<std::string>())) return *t;
  }
  throw SchemaError(std::string("manifest: unparseable ") + what);
}

std::vector<fs::path> json_paths(const nlohmann::json& doc, const char* key, const fs::path& base) {
  std::vector<fs::path> out;
  if (!doc.contains(key)) throw SchemaError(std::string("manifest: missing '") + key + "'");
  for (const auto& p : doc.at(key)) {
    const fs::path path = p.get<std::string>();
    out.push_back(path.is_absolute() ? path : base / path);
  }
  return out;
}

}  // namespace

DatasetManifest DatasetManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("manifest " + path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  DatasetManifest m;
  try {
    m.job_logs = json_paths(doc, "job_logs", base);
    m.host_logs = json_paths(doc, "host_logs", base);
    m.telemetry = json_paths(doc, "telemetry", base);
    if (!doc.contains("time_range")) throw SchemaError("manifest: missing 'time_range'");
    m.range_start = json_timestamp(doc["time_range"].at("start"), "time_range.start");
    m.range_end = json_timestamp(doc["time_range"].at("end"), "time_range.end");
    if (doc.contains("column_mapping") && !doc["column_mapping"].get<std::string>().empty()) {
      const fs::path cm = doc["column_mapping"].get<std::string>();
      m.column_mapping = cm.is_absolute() ? cm : base / cm;
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("manifest " + path.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

void DatasetManifest::save(const fs::path& path) const {
  const fs::path base = fs::absolute(path).parent_path();
  auto rel = [&](const fs::path& p) { return fs::absolute(p).lexically_relative(base).generic_string(); };
  nlohmann::json doc;
  for (const auto& [key, list] : {std::pair{"job_logs", &job_logs}, std::pair{"host_logs", &host_logs},
                                  std::pair{"telemetry", &telemetry}}) {
    doc[key] = nlohmann::json::array();
    for (const auto& p : *list) doc[key].push_back(rel(p));
  }
  doc["time_range"] = {{"start", format_iso8601(range_start)}, {"end", format_iso8601(range_end)}};
  if (!column_mapping.empty()) doc["column_mapping"] = rel(column_mapping);
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace coan
