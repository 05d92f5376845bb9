#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "coan/codec.hpp"
#include "coan/error.hpp"
#include "coan/fuse.hpp"
#include "coan/ingest.hpp"
#include "coan/synth.hpp"
#include "helpers.hpp"

using namespace coan;
using coan::fixture::TempDir;

namespace {

DatasetManifest write_dataset(const TempDir& dir, const std::vector<JobRecord>& jobs,
                              const std::vector<HostAssignment>& hosts,
                              const std::vector<TelemetrySample>& samples, Timestamp start, Timestamp end) {
  {
    std::ofstream f(dir / "jobs.csv");
    write_job_log(f, jobs);
  }
  {
    std::ofstream f(dir / "hosts.csv");
    write_host_log(f, hosts);
  }
  {
    std::ofstream f(dir / "telemetry.csv");
    write_telemetry(f, samples);
  }
  DatasetManifest m;
  m.job_logs = {dir / "jobs.csv"};
  m.host_logs = {dir / "hosts.csv"};
  m.telemetry = {dir / "telemetry.csv"};
  m.range_start = start;
  m.range_end = end;
  return m;
}

ScenarioSpec three_month_spec() {
  ScenarioSpec spec;
  spec.seed = 11;
  spec.jobs = 30;
  spec.min_nodes = 10;
  spec.max_nodes = 30;
  spec.mix_small = 0.8;
  spec.mix_medium = 0.2;
  spec.mix_large = 0.0;
  spec.min_runtime = 300;
  spec.max_runtime = 600;
  spec.arrival_spacing = 3 * 86400;
  spec.cluster_hosts = 40;
  return spec;
}

std::size_t count_chunks(const std::filesystem::path& dir) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    n += name.starts_with("chunk-") && !name.ends_with(".tmp");
  }
  return n;
}

}  // namespace

TEST(IntervalIndex, TouchingIntervalsAreDisjoint) {
  const std::vector<JobRecord> jobs = {fixture::job("J1", 0, 100), fixture::job("J2", 100, 200)};
  const std::vector<HostAssignment> hosts = {{"J1", "n1"}, {"J2", "n1"}};
  const auto index = IntervalIndex::build(jobs, hosts);
  EXPECT_EQ(index.interval_count(), 2u);
  EXPECT_EQ(index.lookup("n1", 99), 0u);
  EXPECT_EQ(index.lookup("n1", 100), 1u);
  EXPECT_FALSE(index.lookup("n1", 200));
  EXPECT_FALSE(index.lookup("n2", 50));
}

TEST(IntervalIndex, OverlapNamesBothJobs) {
  const std::vector<JobRecord> jobs = {fixture::job("J1", 0, 100), fixture::job("J2", 50, 150)};
  const std::vector<HostAssignment> hosts = {{"J1", "n1"}, {"J2", "n1"}};
  try {
    IntervalIndex::build(jobs, hosts);
    FAIL() << "expected FusionError";
  } catch (const FusionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("J1"), std::string::npos);
    EXPECT_NE(msg.find("J2"), std::string::npos);
    EXPECT_NE(msg.find("n1"), std::string::npos);
  }
}

TEST(IntervalIndex, DanglingAssignmentFails) {
  const std::vector<JobRecord> jobs = {fixture::job("J1", 0, 100)};
  const std::vector<HostAssignment> hosts = {{"J9", "n1"}};
  EXPECT_THROW(IntervalIndex::build(jobs, hosts), FusionError);
}

TEST(IntervalIndex, SyntheticHasNoConflicts) {
  ScenarioSpec spec;
  spec.jobs = 20;
  spec.min_nodes = spec.max_nodes = 10;
  spec.mix_small = 1.0;
  spec.mix_medium = spec.mix_large = 0.0;
  spec.min_runtime = spec.max_runtime = 60;
  const auto sc = generate(spec);
  const auto index = IntervalIndex::build(sc.jobs, sc.hosts);
  EXPECT_EQ(index.interval_count(), 200u);
}

TEST(TagSamples, HalfOpenBoundary) {
  const std::vector<JobRecord> jobs = {fixture::job("J1", 0, 100)};
  const std::vector<HostAssignment> hosts = {{"J1", "n1"}};
  const auto index = IntervalIndex::build(jobs, hosts);
  const std::vector<TelemetrySample> samples = {fixture::sample(50, "n1"), fixture::sample(100, "n1"),
                                                fixture::sample(0, "n1")};
  const auto tagged = tag_samples(samples, index);
  EXPECT_EQ(tagged[0].job_id, "J1");
  EXPECT_TRUE(tagged[1].idle());
  EXPECT_EQ(tagged[2].job_id, "J1");
}

TEST(TagSamples, MatchesOracleOnRandomInstances) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = fixture::random_join(seed, 20, 8, 1000, 5000);
    const auto index = IntervalIndex::build(r.jobs, r.hosts);
    const auto fast = tag_samples(r.samples, index);
    const auto slow = oracle_join(r.samples, r.jobs, r.hosts);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      EXPECT_EQ(fast[i].idle() ? std::nullopt : std::optional(fast[i].job_id), slow[i]) << "seed " << seed;
    }
  }
}

TEST(FusedLine, RoundTrip) {
  auto s = fixture::sample(1704067200, "x3001c0s1b0n0", 12.5, 61.3);
  s.gpu_mem_alloc[2] = 1234567890.0;
  std::string line;
  append_fused_line(line, s, "J,1", "prod", 12);
  ASSERT_EQ(line.back(), '\n');
  line.pop_back();
  const auto r = parse_fused_line(line);
  EXPECT_EQ(r.sample, s);
  EXPECT_EQ(r.job_id, "J,1");
  EXPECT_EQ(r.queue, "prod");
  EXPECT_EQ(r.num_nodes, 12);
}

TEST(ChunkSpec, Parse) {
  EXPECT_TRUE(ChunkSpec::parse("month").monthly);
  EXPECT_EQ(ChunkSpec::parse("30m").seconds, 1800);
  EXPECT_EQ(ChunkSpec::parse("2d").seconds, 172800);
  EXPECT_EQ(ChunkSpec::parse("3600").seconds, 3600);
  EXPECT_THROW(ChunkSpec::parse("0h"), InvalidInput);
  EXPECT_THROW(ChunkSpec::parse("fortnight"), InvalidInput);
}

TEST(Codec, GzipRoundTripAndDeterminism) {
  TempDir dir("codec");
  const auto codec = make_codec("gzip");
  std::string text;
  for (int i = 0; i < 5000; ++i) text += "row," + std::to_string(i * 7) + "\n";
  for (const char* name : {"a.gz", "b.gz"}) {
    auto w = codec->open_writer(dir / name);
    w->write(text);
    w->close();
  }
  EXPECT_EQ(fixture::slurp(dir / "a.gz"), fixture::slurp(dir / "b.gz"));
  std::string back;
  codec->read_lines(dir / "a.gz", [&](std::string_view l) { (back += l) += "\n"; });
  EXPECT_EQ(back, text);
  EXPECT_THROW(make_codec("zstd"), InvalidInput);
}

TEST(Fusion, EmptyTelemetry) {
  TempDir dir("empty");
  const auto m = write_dataset(dir, {fixture::job("J1", 0, 100)}, {{"J1", "n1"}}, {}, 0, 1000);
  FusionConfig cfg;
  cfg.out_dir = dir / "out";
  const auto report = run_fusion(m, cfg);
  EXPECT_TRUE(report.complete);
  EXPECT_EQ(report.samples, 0u);
  EXPECT_EQ(report.tagged, 0u);
  EXPECT_EQ(report.idle, 0u);
  const auto ds = FusedDataset::open(dir / "out");
  std::size_t n = 0;
  ds.for_each_record([&](const FusedRecord&) { ++n; });
  EXPECT_EQ(n, 0u);
}

TEST(Fusion, NodeDayAllTagged) {
  TempDir dir("day");
  std::vector<TelemetrySample> day;
  for (Timestamp t = 0; t < 86400; t += 5) day.push_back(fixture::sample(t, "n1", 40.0, 250.0));
  const auto m = write_dataset(dir, {fixture::job("J1", 0, 86400)}, {{"J1", "n1"}}, day, 0, 86400);
  FusionConfig cfg;
  cfg.out_dir = dir / "out";
  cfg.chunk = ChunkSpec::parse("6h");
  const auto report = run_fusion(m, cfg);
  EXPECT_EQ(report.samples, 17280u);
  EXPECT_EQ(report.tagged, 17280u);
  EXPECT_EQ(report.chunks.size(), 4u);
  const auto ds = FusedDataset::open(dir / "out");
  std::size_t n = 0;
  Timestamp last = -1;
  ds.for_each_record([&](const FusedRecord& r) {
    EXPECT_EQ(r.job_id, "J1");
    EXPECT_GT(r.sample.timestamp, last);
    last = r.sample.timestamp;
    ++n;
  });
  EXPECT_EQ(n, 17280u);
}

TEST(Fusion, OutOfRangeAndDuplicateSamplesAreRejected) {
  TempDir dir("rej");
  std::vector<TelemetrySample> s = {fixture::sample(10, "n1"), fixture::sample(10, "n1"),
                                    fixture::sample(5000, "n1")};
  const auto m = write_dataset(dir, {fixture::job("J1", 0, 100)}, {{"J1", "n1"}}, s, 0, 1000);
  FusionConfig cfg;
  cfg.out_dir = dir / "out";
  const auto report = run_fusion(m, cfg);
  EXPECT_EQ(report.samples, 1u);
  const auto& tel = report.inputs.back();
  EXPECT_EQ(tel.rows, 3u);
  EXPECT_EQ(tel.accepted + tel.rejected, tel.rows);
}

TEST(Fusion, OverlapAborts) {
  TempDir dir("overlap");
  const auto m = write_dataset(dir, {fixture::job("J1", 0, 100), fixture::job("J2", 50, 150)},
                               {{"J1", "n1"}, {"J2", "n1"}}, {fixture::sample(10, "n1")}, 0, 1000);
  FusionConfig cfg;
  cfg.out_dir = dir / "out";
  EXPECT_THROW(run_fusion(m, cfg), FusionError);
}

TEST(Fusion, WorkerCountAndResumeAreByteIdentical) {
  TempDir dir("det");
  write_scenario(three_month_spec(), dir / "data");
  const auto m = DatasetManifest::load(dir / "data" / "manifest.json");

  FusionConfig one;
  one.out_dir = dir / "w1";
  one.workers = 1;
  const auto r1 = run_fusion(m, one);
  ASSERT_GE(r1.chunks.size(), 3u);

  FusionConfig eight = one;
  eight.out_dir = dir / "w8";
  eight.workers = 8;
  run_fusion(m, eight);

  FusionConfig cut = one;
  cut.out_dir = dir / "resumed";
  cut.stop_after_chunks = 1;
  const auto partial = run_fusion(m, cut);
  EXPECT_FALSE(partial.complete);
  EXPECT_EQ(count_chunks(cut.out_dir), 1u);
  EXPECT_THROW(FusedDataset::open(cut.out_dir), ResumeRefused);
  cut.stop_after_chunks.reset();
  cut.resume = true;
  const auto resumed = run_fusion(m, cut);
  EXPECT_TRUE(resumed.complete);
  EXPECT_TRUE(resumed.chunks.front().resumed);
  EXPECT_FALSE(resumed.chunks.back().resumed);

  const auto a = fixture::tree_bytes(one.out_dir);
  EXPECT_EQ(a, fixture::tree_bytes(eight.out_dir));
  EXPECT_EQ(a, fixture::tree_bytes(cut.out_dir));

  // Resuming a finished run is a no-op.
  run_fusion(m, cut);
  EXPECT_EQ(a, fixture::tree_bytes(cut.out_dir));
}

TEST(Fusion, ResumeRefusesUntrustworthyLedger) {
  TempDir dir("refuse");
  write_scenario(three_month_spec(), dir / "data");
  const auto m = DatasetManifest::load(dir / "data" / "manifest.json");
  FusionConfig cfg;
  cfg.out_dir = dir / "out";
  cfg.stop_after_chunks = 2;
  run_fusion(m, cfg);
  const auto ledger = cfg.out_dir / std::string(kLedgerFile);
  const std::string good = fixture::slurp(ledger);
  cfg.stop_after_chunks.reset();
  cfg.resume = true;

  fixture::spit(ledger, good.substr(0, good.size() - 5));
  EXPECT_THROW(run_fusion(m, cfg), ResumeRefused) << "partial trailing line";

  fixture::spit(ledger, good + "garbage entry\n");
  EXPECT_THROW(run_fusion(m, cfg), ResumeRefused) << "corrupt line";

  fixture::spit(ledger, good);
  FusionConfig other = cfg;
  other.codec = "gzip:6";
  EXPECT_THROW(run_fusion(m, other), ResumeRefused) << "codec changed";
  other = cfg;
  other.chunk = ChunkSpec::parse("7d");
  EXPECT_THROW(run_fusion(m, other), ResumeRefused) << "chunking changed";

  std::string first_chunk;
  for (const auto& e : std::filesystem::directory_iterator(cfg.out_dir)) {
    if (e.path().filename().string().starts_with("chunk-")) first_chunk = e.path().string();
  }
  const std::string bytes = fixture::slurp(first_chunk);
  fixture::spit(first_chunk, bytes + "x");
  EXPECT_THROW(run_fusion(m, cfg), ResumeRefused) << "tampered chunk";

  fixture::spit(first_chunk, bytes);
  EXPECT_TRUE(run_fusion(m, cfg).complete);
}

TEST(FusedDataset, RefusesEmptyDirectory) {
  TempDir dir("nothing");
  EXPECT_THROW(FusedDataset::open(dir.path()), ResumeRefused);
}
