#include "coan/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "coan/error.hpp"
#include "coan/fuse.hpp"
#include "coan/report.hpp"
#include "coan/summarize.hpp"
#include "coan/synth.hpp"
#include "coan/text.hpp"

namespace coan {

namespace fs = std::filesystem;

namespace {

class Log {
 public:
  Log(std::ostream& err, std::string cmd) : err_(err), cmd_(std::move(cmd)) {}

  void operator()(std::string_view level, std::string_view event,
                  std::initializer_list<std::pair<std::string_view, std::string>> fields = {}) const {
    std::string line = "level=" + std::string(level) + " cmd=" + cmd_ + " event=" + std::string(event);
    for (const auto& [k, v] : fields) {
      line += " " + std::string(k) + "=";
      line += v.find_first_of(" \"=") == std::string::npos && !v.empty() ? v : quote(v);
    }
    err_ << line << '\n';
  }

 private:
  static std::string quote(std::string_view v) {
    std::string q = "\"";
    for (const char c : v) {
      if (c == '"' || c == '\\') q.push_back('\\');
      q.push_back(c == '\n' ? ' ' : c);
    }
    return q + "\"";
  }

  std::ostream& err_;
  std::string cmd_;
};

fs::path default_out(std::string_view cmd) {
  const char* root = std::getenv(kOutRootEnv);
  return fs::path(root && *root ? root : "coan-out") / cmd;
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Options shared by every subcommand; values from --config fill in whatever
// the command line leaves unset.
struct Common {
  std::string config;
  std::string out;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) items.emplace_back(t);
  }
  return items;
}

// Applies config-file keys to options the user did not pass explicitly.
void apply_config(CLI::App& cmd, const std::string& path, const std::vector<std::string>& allowed) {
  if (path.empty()) return;
  for (const auto& [key, value] : read_flat_config_file(path)) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidInput("config " + path + ": unknown key '" + key + "'");
    }
    CLI::Option* opt = cmd.get_option_no_throw("--" + key);
    if (!opt || opt->count() > 0) continue;
    opt->clear();
    opt->add_result(value);
    opt->run_callback();
  }
}

std::uintmax_t file_size_or_zero(const fs::path& p) {
  std::error_code ec;
  const auto n = fs::file_size(p, ec);
  return ec ? 0 : n;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GPU telemetry and job log co-analysis", "coan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // fuse
  Common fuse_common;
  std::string manifest_path;
  std::string chunk = "month";
  unsigned workers = default_workers();
  bool resume = false;
  std::string codec = "gzip";
  std::size_t stop_after = 0;
  auto* fuse = app.add_subcommand("fuse", "Join job/host logs with telemetry into compressed chunks");
  fuse->add_option("manifest", manifest_path, "Dataset manifest (JSON)")->required();
  fuse->add_option("--chunk", chunk, "Chunk width: month or N[s|m|h|d]");
  fuse->add_option("--workers", workers, "Parallel workers")->check(CLI::PositiveNumber);
  fuse->add_option("--out", fuse_common.out, "Output directory");
  fuse->add_flag("--resume", resume, "Continue from the checkpoint ledger");
  fuse->add_option("--codec", codec, "Chunk codec: gzip, gzip:N or none");
  fuse->add_option("--stop-after", stop_after, "Stop after writing N chunks (leaves the run resumable)");
  fuse->add_option("--config", fuse_common.config, "Flat key=value config; flags win");

  // summarize
  Common sum_common;
  std::string fused_dir;
  unsigned sum_workers = default_workers();
  auto* summarize = app.add_subcommand("summarize", "Condense fused chunks into one row per job");
  summarize->add_option("fused_dir", fused_dir, "Fusion output directory")->required();
  summarize->add_option("--out", sum_common.out, "Output directory");
  summarize->add_option("--workers", sum_workers, "Parallel workers")->check(CLI::PositiveNumber);
  summarize->add_option("--config", sum_common.config, "Flat key=value config; flags win");

  // report
  Common rep_common;
  std::string summary_path;
  std::string cdf_metrics;
  std::string correlation_metrics;
  auto* report = app.add_subcommand("report", "Produce CDF, breakdown, box-plot and correlation tables");
  report->add_option("summary", summary_path, "Per-job summary CSV")->required();
  report->add_option("--out", rep_common.out, "Output directory");
  report->add_option("--cdf-metrics", cdf_metrics, "Comma-separated summary columns");
  report->add_option("--correlation-metrics", correlation_metrics, "Comma-separated summary columns");
  report->add_option("--config", rep_common.config, "Flat key=value config; flags win");

  // synth
  Common syn_common;
  std::string spec_path;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  synth->add_option("spec", spec_path, "Scenario file (key = value)")->required();
  synth->add_option("--out", syn_common.out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  const Log log(err, active->get_name());
  try {
    if (active == fuse) {
      apply_config(*fuse, fuse_common.config, {"chunk", "workers", "out", "resume", "codec"});
      FusionConfig config;
      config.chunk = ChunkSpec::parse(chunk);
      config.workers = workers;
      config.out_dir = fuse_common.out.empty() ? default_out("fused") : fs::path(fuse_common.out);
      config.resume = resume;
      config.codec = codec;
      if (stop_after > 0) config.stop_after_chunks = stop_after;
      log("info", "start", {{"manifest", manifest_path}, {"out", config.out_dir.string()},
                            {"chunk", config.chunk.to_string()}, {"workers", std::to_string(workers)},
                            {"resume", resume ? "true" : "false"}});
      const auto manifest = DatasetManifest::load(manifest_path);
      const auto result = run_fusion(manifest, config);
      for (const auto& in : result.inputs) {
        if (in.rejected > 0) {
          log("warn", "rejects", {{"kind", in.kind}, {"path", in.path}, {"rows", std::to_string(in.rejected)}});
        }
      }
      out << result.to_json();
      log("info", "done", {{"chunks", std::to_string(result.chunks.size())},
                           {"samples", std::to_string(result.samples)},
                           {"complete", result.complete ? "true" : "false"}});
      return kExitOk;
    }

    if (active == summarize) {
      apply_config(*summarize, sum_common.config, {"out", "workers"});
      const fs::path out_dir = sum_common.out.empty() ? default_out("summary") : fs::path(sum_common.out);
      log("info", "start", {{"fused", fused_dir}, {"out", out_dir.string()}});
      const auto dataset = FusedDataset::open(fused_dir);
      const auto result = summarize_dataset(dataset, sum_workers);
      fs::create_directories(out_dir);
      const fs::path summary_file = out_dir / "job_summary.csv";
      {
        std::ofstream f(summary_file, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + summary_file.string());
        write_summary_csv(f, result.summaries);
      }
      if (result.summaries.size() >= 2) {
        const auto& metrics = default_correlation_metrics();
        std::ofstream f(out_dir / "correlation.csv", std::ios::binary | std::ios::trunc);
        f << heatmap_export(pearson_matrix(result.summaries, metrics));
      }
      if (result.coverage_warnings > 0) {
        log("warn", "coverage", {{"jobs_missing_hosts", std::to_string(result.coverage_warnings)}});
      }
      if (result.energy_warnings > 0) {
        log("warn", "energy", {{"short_nodes", std::to_string(result.energy_warnings)}});
      }
      const auto summary_bytes = file_size_or_zero(summary_file);
      const auto fused_bytes = dataset.fused_bytes();
      const double ratio =
          fused_bytes == 0 ? 0.0 : static_cast<double>(summary_bytes) / static_cast<double>(fused_bytes);
      nlohmann::ordered_json doc;
      doc["jobs"] = result.summaries.size();
      doc["fused_records"] = result.fused_records;
      doc["idle_records"] = result.idle_records;
      doc["summary_bytes"] = summary_bytes;
      doc["fused_bytes"] = fused_bytes;
      doc["condensation_ratio"] = ratio;
      out << doc.dump(2) << '\n';
      log("info", "done", {{"jobs", std::to_string(result.summaries.size())},
                           {"condensation_ratio", format_double(ratio)}});
      return kExitOk;
    }

    if (active == report) {
      apply_config(*report, rep_common.config, {"out", "cdf-metrics", "correlation-metrics"});
      const fs::path out_dir = rep_common.out.empty() ? default_out("report") : fs::path(rep_common.out);
      ReportConfig config;
      if (!cdf_metrics.empty()) config.cdf_metrics = split_list(cdf_metrics);
      if (!correlation_metrics.empty()) config.correlation_metrics = split_list(correlation_metrics);
      std::ifstream in(summary_path, std::ios::binary);
      if (!in) throw InvalidInput("cannot read " + summary_path);
      const auto summaries = read_summary_csv(in);
      log("info", "start", {{"summary", summary_path}, {"out", out_dir.string()},
                            {"jobs", std::to_string(summaries.size())}});
      const auto files = write_report(summaries, summary_path, out_dir, config);
      for (const auto& f : files) out << (out_dir / f).string() << '\n';
      log("info", "done", {{"files", std::to_string(files.size())}});
      return kExitOk;
    }

    if (active == synth) {
      const fs::path out_dir = syn_common.out.empty() ? default_out("synth") : fs::path(syn_common.out);
      const auto spec = ScenarioSpec::from_config(read_flat_config_file(spec_path));
      log("info", "start", {{"spec", spec_path}, {"out", out_dir.string()}, {"seed", std::to_string(spec.seed)}});
      const auto truth = write_scenario(spec, out_dir);
      nlohmann::ordered_json doc;
      doc["jobs"] = truth.jobs.size();
      doc["telemetry_rows"] = truth.telemetry_rows;
      doc["idle_rows"] = truth.idle_rows;
      doc["manifest"] = (out_dir / "manifest.json").string();
      out << doc.dump(2) << '\n';
      log("info", "done", {{"jobs", std::to_string(truth.jobs.size())}});
      return kExitOk;
    }
  } catch (const InvalidInput& e) {
    log("error", "failed", {{"kind", "invalid_input"}, {"message", e.what()}});
    return kExitData;
  } catch (const SchemaError& e) {
    log("error", "failed", {{"kind", "schema"}, {"message", e.what()}});
    return kExitData;
  } catch (const FusionError& e) {
    log("error", "failed", {{"kind", "fusion"}, {"message", e.what()}});
    return kExitData;
  } catch (const ResumeRefused& e) {
    log("error", "failed", {{"kind", "resume_refused"}, {"message", e.what()}});
    return kExitData;
  } catch (const std::exception& e) {
    log("error", "failed", {{"kind", "internal"}, {"message", e.what()}});
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace coan
