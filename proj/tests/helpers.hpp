#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "coan/fuse.hpp"
#include "coan/model.hpp"
#include "coan/synth.hpp"

namespace coan::fixture {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("coan-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline TelemetrySample sample(Timestamp t, const std::string& host, double util = 0.0, double power = 0.0) {
  TelemetrySample s;
  s.timestamp = t;
  s.host = host;
  s.gpu_util.fill(util);
  s.gpu_mem_util.fill(util / 2);
  s.gpu_mem_alloc.fill(util * 1e8);
  s.gpu_power.fill(power);
  return s;
}

inline JobRecord job(const std::string& id, Timestamp start, Timestamp end, int nodes = 1,
                     const std::string& queue = "small") {
  JobRecord j;
  j.job_id = id;
  j.user = "u";
  j.project = "p";
  j.queue = queue;
  j.submit_time = start;
  j.start_time = start;
  j.end_time = end;
  j.requested_nodes = nodes;
  return j;
}

// Byte contents of every regular file below `dir`, keyed by relative path.
inline std::vector<std::pair<std::string, std::string>> tree_bytes(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.emplace_back(std::filesystem::relative(e.path(), dir).string(), slurp(e.path()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Random non-overlapping jobs over `hosts` hosts, with matching assignments.
struct RandomJoin {
  std::vector<JobRecord> jobs;
  std::vector<HostAssignment> hosts;
  std::vector<TelemetrySample> samples;
};

inline RandomJoin random_join(std::uint64_t seed, int num_jobs, int num_hosts, int num_samples,
                              Timestamp horizon) {
  std::mt19937_64 rng(seed);
  auto draw = [&](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  RandomJoin r;
  std::vector<std::vector<std::pair<Timestamp, Timestamp>>> busy(static_cast<std::size_t>(num_hosts));
  auto host_name = [](std::int64_t h) { return "h" + std::to_string(h); };
  while (static_cast<int>(r.jobs.size()) < num_jobs) {
    const Timestamp start = draw(0, horizon - 2);
    const Timestamp end = start + draw(1, horizon / 10);
    const auto width = draw(1, 3);
    const auto first = draw(0, num_hosts - width);
    bool clash = false;
    for (auto h = first; h < first + width; ++h) {
      for (const auto& [s, e] : busy[static_cast<std::size_t>(h)]) clash = clash || (start < e && s < end);
    }
    if (clash) continue;
    const std::string id = "J" + std::to_string(r.jobs.size());
    r.jobs.push_back(job(id, start, end, static_cast<int>(width)));
    for (auto h = first; h < first + width; ++h) {
      busy[static_cast<std::size_t>(h)].emplace_back(start, end);
      r.hosts.push_back({id, host_name(h)});
    }
  }
  for (int i = 0; i < num_samples; ++i) {
    Timestamp t = draw(0, horizon);
    // Bias a share of samples onto interval edges.
    if (i % 4 == 0) {
      const auto& j = r.jobs[static_cast<std::size_t>(draw(0, num_jobs - 1))];
      const Timestamp edges[] = {j.start_time, j.end_time, j.end_time - 1, j.start_time - 1};
      t = edges[draw(0, 3)];
    }
    r.samples.push_back(sample(t, host_name(draw(0, num_hosts - 1)), 10.0, 100.0));
  }
  return r;
}

}  // namespace coan::fixture
