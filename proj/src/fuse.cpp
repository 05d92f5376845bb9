#include "coan/fuse.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"

#include "coan/codec.hpp"
#include "coan/error.hpp"
#include "coan/text.hpp"

namespace coan {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Interval index

IntervalIndex IntervalIndex::build(std::span<const JobRecord> jobs,
                                   std::span<const HostAssignment> hosts) {
  IntervalIndex index;
  index.jobs_.assign(jobs.begin(), jobs.end());
  index.hosts_of_.resize(jobs.size());
  std::unordered_map<std::string, std::uint32_t> slot;
  for (std::uint32_t i = 0; i < jobs.size(); ++i) {
    if (!slot.emplace(jobs[i].job_id, i).second) {
      throw FusionError("duplicate job id " + jobs[i].job_id);
    }
  }

  std::vector<std::string> dangling;
  std::set<std::pair<std::uint32_t, std::string>> seen;
  for (const auto& a : hosts) {
    const auto it = slot.find(a.job_id);
    if (it == slot.end()) {
      dangling.push_back(a.job_id);
      continue;
    }
    if (!seen.emplace(it->second, a.host).second) continue;
    const JobRecord& job = jobs[it->second];
    index.hosts_of_[it->second].push_back(a.host);
    index.by_host_[a.host].push_back({job.start_time, job.end_time, it->second});
  }
  if (!dangling.empty()) {
    std::sort(dangling.begin(), dangling.end());
    dangling.erase(std::unique(dangling.begin(), dangling.end()), dangling.end());
    std::string msg = "host assignments reference unknown jobs:";
    for (const auto& id : dangling) msg += " " + id;
    throw FusionError(msg);
  }

  std::vector<std::string> conflicts;
  for (auto& [host, intervals] : index.by_host_) {
    std::sort(intervals.begin(), intervals.end(), [&](const JobInterval& a, const JobInterval& b) {
      return std::tie(a.start, a.end, jobs[a.job].job_id) < std::tie(b.start, b.end, jobs[b.job].job_id);
    });
    // Empty intervals own no instant and cannot conflict.
    std::erase_if(intervals, [](const JobInterval& iv) { return iv.end <= iv.start; });
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      for (std::size_t j = i + 1; j < intervals.size() && intervals[j].start < intervals[i].end; ++j) {
        conflicts.push_back(host + ": " + jobs[intervals[i].job].job_id + "," +
                            jobs[intervals[j].job].job_id);
      }
    }
  }
  if (!conflicts.empty()) {
    std::string msg = "overlapping jobs on one host (";
    msg += std::to_string(conflicts.size()) + " conflicts):";
    for (const auto& c : conflicts) msg += " [" + c + "]";
    throw FusionError(msg);
  }

  index.num_nodes_.resize(jobs.size());
  for (std::uint32_t i = 0; i < jobs.size(); ++i) {
    const auto assigned = static_cast<int>(index.hosts_of_[i].size());
    index.num_nodes_[i] = assigned > 0 ? assigned : jobs[i].requested_nodes;
  }
  return index;
}

std::optional<std::uint32_t> IntervalIndex::lookup(std::string_view host, Timestamp t) const {
  const auto it = by_host_.find(host);
  if (it == by_host_.end()) return std::nullopt;
  const auto& intervals = it->second;
  // Last interval starting at or before t.
  auto pos = std::upper_bound(intervals.begin(), intervals.end(), t,
                              [](Timestamp value, const JobInterval& iv) { return value < iv.start; });
  if (pos == intervals.begin()) return std::nullopt;
  --pos;
  if (t < pos->end) return pos->job;
  return std::nullopt;
}

std::size_t IntervalIndex::interval_count() const {
  std::size_t n = 0;
  for (const auto& [host, intervals] : by_host_) n += intervals.size();
  return n;
}

std::vector<FusedRecord> tag_samples(std::span<const TelemetrySample> samples, const IntervalIndex& index) {
  std::vector<FusedRecord> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    FusedRecord r{s, {}, {}, 0};
    if (const auto job = index.lookup(s.host, s.timestamp)) {
      r.job_id = index.jobs()[*job].job_id;
      r.queue = index.jobs()[*job].queue;
      r.num_nodes = index.num_nodes(*job);
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fused line format

const std::vector<std::string>& fused_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"timestamp", "host", "job_id", "queue", "num_nodes"};
    const auto& t = telemetry_columns();
    c.insert(c.end(), t.begin() + 2, t.end());
    return c;
  }();
  return cols;
}

void append_fused_line(std::string& out, const TelemetrySample& s, std::string_view job_id,
                       std::string_view queue, int num_nodes) {
  out += std::to_string(s.timestamp);
  out.push_back(',');
  out += csv_escape(s.host);
  out.push_back(',');
  out += csv_escape(job_id);
  out.push_back(',');
  out += csv_escape(queue);
  out.push_back(',');
  out += std::to_string(num_nodes);
  append_gpu_fields(out, s);
  out.push_back('\n');
}

FusedRecord parse_fused_line(std::string_view line) {
  thread_local CsvSplitter splitter;
  const auto& f = splitter.split(line);
  if (f.size() != fused_columns().size()) {
    throw SchemaError("fused record: expected " + std::to_string(fused_columns().size()) +
                      " fields, got " + std::to_string(f.size()));
  }
  FusedRecord r;
  const auto ts = parse_int(f[0]);
  const auto nodes = parse_int(f[4]);
  if (!ts || !nodes) throw SchemaError("fused record: bad timestamp or num_nodes");
  r.sample.timestamp = *ts;
  r.sample.host = f[1];
  r.job_id = f[2];
  r.queue = f[3];
  r.num_nodes = static_cast<int>(*nodes);
  GpuArray* groups[] = {&r.sample.gpu_util, &r.sample.gpu_mem_util, &r.sample.gpu_mem_alloc,
                        &r.sample.gpu_power};
  for (int m = 0; m < 4; ++m) {
    for (int g = 0; g < kGpusPerNode; ++g) {
      const auto v = parse_double(f[5 + m * kGpusPerNode + g]);
      if (!v) throw SchemaError("fused record: bad number");
      (*groups[m])[g] = *v;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Chunking

ChunkSpec ChunkSpec::parse(std::string_view text) {
  text = trim(text);
  if (text == "month" || text == "monthly") return {};
  Timestamp unit = 1;
  std::string_view digits = text;
  if (!text.empty()) {
    switch (text.back()) {
      case 's': unit = 1; digits.remove_suffix(1); break;
      case 'm': unit = 60; digits.remove_suffix(1); break;
      case 'h': unit = 3600; digits.remove_suffix(1); break;
      case 'd': unit = 86400; digits.remove_suffix(1); break;
      default: break;
    }
  }
  const auto n = parse_int(digits);
  if (!n || *n <= 0) {
    throw InvalidInput("bad chunk spec '" + std::string(text) + "' (expected month or <n>[s|m|h|d])");
  }
  return {false, *n * unit};
}

std::string ChunkSpec::to_string() const { return monthly ? "month" : std::to_string(seconds) + "s"; }

namespace {

struct PlannedChunk {
  std::string id;
  Timestamp start = 0;
  Timestamp end = 0;
  std::size_t first = 0;  // range into the canonical order
  std::size_t last = 0;
};

Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::pair<Timestamp, Timestamp> chunk_bounds(const ChunkSpec& spec, Timestamp origin, Timestamp t) {
  if (spec.monthly) {
    const Timestamp start = month_floor(t);
    return {start, next_month(start)};
  }
  const Timestamp start = origin + floor_div(t - origin, spec.seconds) * spec.seconds;
  return {start, start + spec.seconds};
}

std::string chunk_id(const ChunkSpec& spec, Timestamp start) {
  const std::string iso = format_iso8601(start);
  if (spec.monthly) return iso.substr(0, 7);
  std::string compact;
  for (char c : iso) {
    if (c != '-' && c != ':') compact.push_back(c);
  }
  return compact;
}

// ---------------------------------------------------------------------------
// Ledger

constexpr std::string_view kLedgerMagic = "coan-fusion-ledger 1";

struct Ledger {
  std::string inputs_digest;
  std::string codec;
  std::vector<ChunkReport> chunks;
  std::optional<std::pair<std::size_t, std::size_t>> complete;  // chunks, rows
};

Ledger read_ledger(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResumeRefused("cannot read checkpoint ledger " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!text.empty() && text.back() != '\n') {
    throw ResumeRefused("checkpoint ledger " + path.string() + " ends with a partial line");
  }
  Ledger ledger;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  auto corrupt = [&](const std::string& why) {
    return ResumeRefused("corrupt checkpoint ledger " + path.string() + " line " +
                         std::to_string(lineno) + ": " + why);
  };
  while (std::getline(lines, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != kLedgerMagic) throw corrupt("bad header");
      continue;
    }
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    if (ledger.complete) throw corrupt("entries after completion marker");
    if (tag == "inputs") {
      fields >> ledger.inputs_digest;
    } else if (tag == "codec") {
      fields >> ledger.codec;
    } else if (tag == "chunk") {
      ChunkReport c;
      c.resumed = true;
      if (!(fields >> c.id >> c.start >> c.end >> c.rows >> c.tagged >> c.idle >> c.digest >> c.file)) {
        throw corrupt("malformed chunk entry");
      }
      if (c.tagged + c.idle != c.rows || c.digest.size() != 64) throw corrupt("inconsistent chunk entry");
      ledger.chunks.push_back(std::move(c));
    } else if (tag == "complete") {
      std::size_t n = 0, rows = 0;
      if (!(fields >> n >> rows)) throw corrupt("malformed completion marker");
      ledger.complete = std::pair{n, rows};
    } else {
      throw corrupt("unknown entry '" + tag + "'");
    }
    std::string extra;
    if (fields >> extra) throw corrupt("trailing fields");
  }
  if (lineno == 0) throw ResumeRefused("checkpoint ledger " + path.string() + " is empty");
  if (ledger.inputs_digest.size() != 64 || ledger.codec.empty()) {
    throw ResumeRefused("checkpoint ledger " + path.string() + " lacks inputs/codec entries");
  }
  if (ledger.complete) {
    std::size_t rows = 0;
    for (const auto& c : ledger.chunks) rows += c.rows;
    if (ledger.complete->first != ledger.chunks.size() || ledger.complete->second != rows) {
      throw ResumeRefused("checkpoint ledger " + path.string() + ": completion marker disagrees with entries");
    }
  }
  return ledger;
}

class LedgerWriter {
 public:
  LedgerWriter(const fs::path& path, bool truncate)
      : out_(path, std::ios::binary | (truncate ? std::ios::trunc : std::ios::app)), path_(path) {
    if (!out_) throw Error("cannot open checkpoint ledger " + path.string());
  }
  void append(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw Error("cannot append to checkpoint ledger " + path_.string());
  }

 private:
  std::ofstream out_;
  fs::path path_;
};

std::string chunk_line(const ChunkReport& c) {
  std::ostringstream s;
  s << "chunk " << c.id << ' ' << c.start << ' ' << c.end << ' ' << c.rows << ' ' << c.tagged << ' '
    << c.idle << ' ' << c.digest << ' ' << c.file;
  return s.str();
}

template <class Record>
void write_csv_file(const fs::path& path, std::span<const Record> records,
                    void (*writer)(std::ostream&, std::span<const Record>)) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  writer(out, records);
  if (!out.flush()) throw Error("write failed: " + path.string());
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open input " + path.string());
  return in;
}

void write_rejects_file(const fs::path& path, std::span<const RejectedRow> rejects) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_rejects(out, rejects);
}

struct SampleOrigin {
  std::uint32_t file = 0;
  std::uint32_t row = 0;  // position among accepted records of that file
};

}  // namespace

std::string FusionReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["complete"] = complete;
  doc["jobs"] = jobs;
  doc["intervals"] = intervals;
  doc["samples"] = samples;
  doc["tagged"] = tagged;
  doc["idle"] = idle;
  doc["planned_chunks"] = planned_chunks;
  doc["inputs"] = nlohmann::ordered_json::array();
  for (const auto& i : inputs) {
    doc["inputs"].push_back(
        {{"kind", i.kind}, {"path", i.path}, {"rows", i.rows}, {"accepted", i.accepted}, {"rejected", i.rejected}});
  }
  doc["chunks"] = nlohmann::ordered_json::array();
  for (const auto& c : chunks) {
    doc["chunks"].push_back({{"id", c.id},
                             {"rows", c.rows},
                             {"tagged", c.tagged},
                             {"idle", c.idle},
                             {"resumed", c.resumed},
                             {"file", c.file}});
  }
  return doc.dump(2);
}

FusionReport run_fusion(const DatasetManifest& manifest, const FusionConfig& config) {
  manifest.validate();
  if (config.out_dir.empty()) throw InvalidInput("fusion: output directory not set");
  const auto codec = make_codec(config.codec);
  const ColumnMapping mapping =
      manifest.column_mapping.empty() ? ColumnMapping{} : ColumnMapping::load(manifest.column_mapping);
  fs::create_directories(config.out_dir / "rejects");

  FusionReport report;
  std::string digest_material = "range " + std::to_string(manifest.range_start) + " " +
                                std::to_string(manifest.range_end) + "\nchunk " +
                                config.chunk.to_string() + "\ncodec " + codec->name() + "\n";
  for (const auto& [k, v] : mapping.renames()) digest_material += "map " + k + "=" + v + "\n";

  auto record_input = [&](const char* kind, std::size_t i, const fs::path& path, std::size_t rows,
                          std::size_t accepted, std::span<const RejectedRow> rejects) {
    report.inputs.push_back({kind, path.string(), rows, accepted, rejects.size()});
    write_rejects_file(config.out_dir / "rejects" / (std::string(kind) + "-" + std::to_string(i) + ".rejects.csv"),
                       rejects);
    digest_material += std::string(kind) + " " + sha256_file_hex(path.string()) + "\n";
  };

  std::vector<JobRecord> jobs;
  for (std::size_t i = 0; i < manifest.job_logs.size(); ++i) {
    auto in = open_input(manifest.job_logs[i]);
    auto parsed = parse_job_log(in, mapping);
    record_input("job_log", i, manifest.job_logs[i], parsed.total_rows, parsed.records.size(), parsed.rejects);
    std::move(parsed.records.begin(), parsed.records.end(), std::back_inserter(jobs));
  }

  std::vector<HostAssignment> hosts;
  {
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < manifest.host_logs.size(); ++i) {
      auto in = open_input(manifest.host_logs[i]);
      auto parsed = parse_host_log(in, mapping);
      std::vector<HostAssignment> kept;
      for (auto& a : parsed.records) {
        if (seen.emplace(a.job_id, a.host).second) {
          kept.push_back(std::move(a));
        } else {
          // Same pair listed in an earlier host log.
          parsed.rejects.push_back({0, std::string(kRejectDuplicateAssignment), a.job_id + "," + a.host});
        }
      }
      record_input("host_log", i, manifest.host_logs[i], parsed.total_rows, kept.size(), parsed.rejects);
      std::move(kept.begin(), kept.end(), std::back_inserter(hosts));
    }
  }

  const IntervalIndex index = IntervalIndex::build(jobs, hosts);
  report.jobs = jobs.size();
  report.intervals = index.interval_count();

  std::vector<TelemetrySample> samples;
  std::vector<SampleOrigin> origins;
  std::vector<std::vector<RejectedRow>> telemetry_rejects(manifest.telemetry.size());
  std::vector<std::size_t> telemetry_rows(manifest.telemetry.size());
  for (std::size_t i = 0; i < manifest.telemetry.size(); ++i) {
    auto in = open_input(manifest.telemetry[i]);
    auto parsed = parse_telemetry(in, mapping);
    telemetry_rows[i] = parsed.total_rows;
    telemetry_rejects[i] = std::move(parsed.rejects);
    std::uint32_t row = 0;
    for (auto& s : parsed.records) {
      if (s.timestamp < manifest.range_start || s.timestamp >= manifest.range_end) {
        telemetry_rejects[i].push_back({0, "outside manifest time range",
                                        std::to_string(s.timestamp) + "," + s.host});
        continue;
      }
      samples.push_back(std::move(s));
      origins.push_back({static_cast<std::uint32_t>(i), row++});
    }
  }

  // Canonical order: (timestamp, host), ties broken by input position.
  std::vector<std::uint32_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& sa = samples[a];
    const auto& sb = samples[b];
    if (sa.timestamp != sb.timestamp) return sa.timestamp < sb.timestamp;
    if (const int c = sa.host.compare(sb.host); c != 0) return c < 0;
    return std::tie(origins[a].file, origins[a].row) < std::tie(origins[b].file, origins[b].row);
  });
  {
    std::vector<std::uint32_t> unique;
    unique.reserve(order.size());
    for (const auto idx : order) {
      if (!unique.empty()) {
        const auto& prev = samples[unique.back()];
        if (prev.timestamp == samples[idx].timestamp && prev.host == samples[idx].host) {
          telemetry_rejects[origins[idx].file].push_back(
              {0, "duplicate sample", std::to_string(samples[idx].timestamp) + "," + samples[idx].host});
          continue;
        }
      }
      unique.push_back(idx);
    }
    order = std::move(unique);
  }
  origins.clear();
  origins.shrink_to_fit();
  for (std::size_t i = 0; i < manifest.telemetry.size(); ++i) {
    const std::size_t rejected = telemetry_rejects[i].size();
    record_input("telemetry", i, manifest.telemetry[i], telemetry_rows[i], telemetry_rows[i] - rejected,
                 telemetry_rejects[i]);
  }
  report.samples = order.size();

  write_csv_file<JobRecord>(config.out_dir / kFusedJobsFile, jobs, &write_job_log);
  write_csv_file<HostAssignment>(config.out_dir / kFusedHostsFile, hosts, &write_host_log);

  std::vector<PlannedChunk> plan;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const Timestamp t = samples[order[pos]].timestamp;
    if (plan.empty() || t >= plan.back().end) {
      const auto [start, end] = chunk_bounds(config.chunk, manifest.range_start, t);
      plan.push_back({chunk_id(config.chunk, start), start, end, pos, pos});
    }
    plan.back().last = pos + 1;
  }
  report.planned_chunks = plan.size();
  const std::string inputs_digest = sha256_hex(digest_material);

  const fs::path ledger_path = config.out_dir / kLedgerFile;
  std::size_t done = 0;
  bool already_complete = false;
  if (config.resume && fs::exists(ledger_path)) {
    const Ledger ledger = read_ledger(ledger_path);
    if (ledger.inputs_digest != inputs_digest) {
      throw ResumeRefused("checkpoint ledger was written for different inputs or settings");
    }
    if (ledger.codec != codec->name()) throw ResumeRefused("checkpoint ledger uses codec " + ledger.codec);
    if (ledger.chunks.size() > plan.size()) throw ResumeRefused("checkpoint ledger lists more chunks than planned");
    for (const auto& c : ledger.chunks) {
      const auto& p = plan[done];
      if (c.id != p.id || c.start != p.start || c.end != p.end || c.rows != p.last - p.first) {
        throw ResumeRefused("checkpoint ledger chunk " + c.id + " does not match the planned chunk " + p.id);
      }
      const fs::path file = config.out_dir / c.file;
      if (!fs::exists(file) || sha256_file_hex(file.string()) != c.digest) {
        throw ResumeRefused("chunk file " + c.file + " is missing or does not match its ledger digest");
      }
      report.chunks.push_back(c);
      ++done;
    }
    if (ledger.complete && done != plan.size()) {
      throw ResumeRefused("checkpoint ledger marked complete but chunks are missing");
    }
    already_complete = ledger.complete.has_value();
  } else {
    // Fresh run: drop chunk files left by any earlier run in this directory.
    for (const auto& entry : fs::directory_iterator(config.out_dir)) {
      const auto name = entry.path().filename().string();
      if (name.starts_with("chunk-")) fs::remove(entry.path());
    }
    LedgerWriter header(ledger_path, true);
    header.append(std::string(kLedgerMagic));
    header.append("inputs " + inputs_digest);
    header.append("codec " + codec->name());
  }

  LedgerWriter ledger(ledger_path, false);
  const unsigned workers = std::max(1u, config.workers);
  std::vector<std::int64_t> tags;
  std::size_t written = 0;
  for (std::size_t ci = done; ci < plan.size(); ++ci) {
    if (config.stop_after_chunks && written >= *config.stop_after_chunks) break;
    const auto& p = plan[ci];
    const std::size_t n = p.last - p.first;
    tags.assign(n, -1);
    auto tag_range = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) {
        const auto& s = samples[order[p.first + k]];
        if (const auto job = index.lookup(s.host, s.timestamp)) tags[k] = *job;
      }
    };
    if (workers == 1 || n < 2 * workers) {
      tag_range(0, n);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t step = (n + workers - 1) / workers;
      for (std::size_t lo = 0; lo < n; lo += step) pool.emplace_back(tag_range, lo, std::min(n, lo + step));
    }

    ChunkReport c;
    c.id = p.id;
    c.start = p.start;
    c.end = p.end;
    c.rows = n;
    c.file = "chunk-" + p.id + codec->extension();
    const fs::path final_path = config.out_dir / c.file;
    const fs::path tmp_path = config.out_dir / (c.file + ".tmp");
    {
      auto writer = codec->open_writer(tmp_path);
      std::string buf;
      for (std::size_t i = 0; i < fused_columns().size(); ++i) {
        if (i) buf.push_back(',');
        buf += fused_columns()[i];
      }
      buf.push_back('\n');
      for (std::size_t k = 0; k < n; ++k) {
        const auto& s = samples[order[p.first + k]];
        if (tags[k] >= 0) {
          const auto job = static_cast<std::uint32_t>(tags[k]);
          append_fused_line(buf, s, index.jobs()[job].job_id, index.jobs()[job].queue, index.num_nodes(job));
          ++c.tagged;
        } else {
          append_fused_line(buf, s, {}, {}, 0);
          ++c.idle;
        }
        if (buf.size() >= (1u << 20)) {
          writer->write(buf);
          buf.clear();
        }
      }
      writer->write(buf);
      writer->close();
    }
    fs::rename(tmp_path, final_path);
    c.digest = sha256_file_hex(final_path.string());
    ledger.append(chunk_line(c));
    report.chunks.push_back(c);
    ++written;
  }

  report.complete = report.chunks.size() == plan.size();
  if (report.complete) {
    if (!already_complete) {
      ledger.append("complete " + std::to_string(plan.size()) + " " + std::to_string(order.size()));
    }
  }
  for (const auto& c : report.chunks) {
    report.tagged += c.tagged;
    report.idle += c.idle;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Reading a completed fusion output

FusedDataset FusedDataset::open(const fs::path& dir) {
  const fs::path ledger_path = dir / kLedgerFile;
  if (!fs::exists(ledger_path)) throw ResumeRefused("no fusion ledger in " + dir.string());
  const Ledger ledger = read_ledger(ledger_path);
  if (!ledger.complete) {
    throw ResumeRefused("fusion in " + dir.string() + " is incomplete (" + std::to_string(ledger.chunks.size()) +
                        " chunks recorded); resume it first");
  }
  FusedDataset ds;
  ds.dir = dir;
  ds.codec = ledger.codec;
  ds.chunks = ledger.chunks;
  for (const auto& c : ds.chunks) {
    const fs::path file = dir / c.file;
    if (!fs::exists(file) || sha256_file_hex(file.string()) != c.digest) {
      throw ResumeRefused("chunk file " + c.file + " is missing or does not match its ledger digest");
    }
  }
  {
    auto in = open_input(dir / kFusedJobsFile);
    auto parsed = parse_job_log(in);
    if (!parsed.rejects.empty()) throw SchemaError("fused jobs file has malformed rows");
    ds.jobs = std::move(parsed.records);
  }
  {
    auto in = open_input(dir / kFusedHostsFile);
    auto parsed = parse_host_log(in);
    if (!parsed.rejects.empty()) throw SchemaError("fused hosts file has malformed rows");
    ds.hosts = std::move(parsed.records);
  }
  return ds;
}

std::uintmax_t FusedDataset::fused_bytes() const {
  std::uintmax_t total = 0;
  for (const auto& c : chunks) total += fs::file_size(dir / c.file);
  return total;
}

void FusedDataset::for_each_record(const std::function<void(const FusedRecord&)>& fn) const {
  const auto reader = make_codec(codec);
  for (const auto& c : chunks) {
    bool header = true;
    reader->read_lines(dir / c.file, [&](std::string_view line) {
      if (header) {
        header = false;
        return;
      }
      if (line.empty()) return;
      fn(parse_fused_line(line));
    });
  }
}

}  // namespace coan
