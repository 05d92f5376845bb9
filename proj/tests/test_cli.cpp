#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "coan/cli.hpp"
#include "coan/ingest.hpp"
#include "json.hpp"
#include "helpers.hpp"

using namespace coan;
using coan::fixture::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void write_spec(const std::filesystem::path& p, int jobs, std::uint64_t seed = 1) {
  fixture::spit(p, "# small scenario\nseed = " + std::to_string(seed) + "\njobs = " + std::to_string(jobs) +
                       "\nmin_runtime = 600\nmax_runtime = 900\nmin_nodes = 10\nmax_nodes = 30\nmix = 0.8,0.2,0\n");
}

std::size_t data_rows(const std::filesystem::path& csv) {
  const auto text = fixture::slurp(csv);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"explode"}).code, kExitUsage);
  EXPECT_EQ(run({"fuse"}).code, kExitUsage);
  EXPECT_EQ(run({"fuse", "m.json", "--workers", "0"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(Cli, EndToEndPipeline) {
  TempDir dir("cli");
  write_spec(dir / "spec.conf", 20);
  const auto syn = run({"synth", (dir / "spec.conf").string(), "--out", (dir / "data").string()});
  ASSERT_EQ(syn.code, kExitOk) << syn.err;
  EXPECT_NE(syn.err.find("level=info cmd=synth event=done"), std::string::npos);

  const auto fuse = run({"fuse", (dir / "data" / "manifest.json").string(), "--out", (dir / "fused").string(),
                         "--chunk", "1h", "--workers", "2"});
  ASSERT_EQ(fuse.code, kExitOk) << fuse.err;
  const auto report = nlohmann::json::parse(fuse.out);
  EXPECT_TRUE(report["complete"].get<bool>());
  EXPECT_GT(report["samples"].get<std::size_t>(), 0u);

  const auto sum = run({"summarize", (dir / "fused").string(), "--out", (dir / "sum").string()});
  ASSERT_EQ(sum.code, kExitOk) << sum.err;
  EXPECT_EQ(data_rows(dir / "sum" / "job_summary.csv"), 20u);
  EXPECT_TRUE(std::filesystem::exists(dir / "sum" / "correlation.csv"));
  const auto stats = nlohmann::json::parse(sum.out);
  EXPECT_LE(stats["condensation_ratio"].get<double>(), 0.10);

  const auto rep = run({"report", (dir / "sum" / "job_summary.csv").string(), "--out", (dir / "rep").string()});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "rep")) ++files;
  EXPECT_GE(files, 4u);

  // Reruns reproduce every byte.
  ASSERT_EQ(run({"report", (dir / "sum" / "job_summary.csv").string(), "--out", (dir / "rep2").string()}).code, 0);
  EXPECT_EQ(fixture::tree_bytes(dir / "rep"), fixture::tree_bytes(dir / "rep2"));
  ASSERT_EQ(run({"summarize", (dir / "fused").string(), "--out", (dir / "sum2").string(), "--workers", "1"}).code, 0);
  EXPECT_EQ(fixture::tree_bytes(dir / "sum"), fixture::tree_bytes(dir / "sum2"));
}

TEST(Cli, ResumeCompletesRemainingChunks) {
  TempDir dir("cli-resume");
  write_spec(dir / "spec.conf", 10);
  ASSERT_EQ(run({"synth", (dir / "spec.conf").string(), "--out", (dir / "data").string()}).code, 0);
  const auto manifest = (dir / "data" / "manifest.json").string();
  const auto first = run({"fuse", manifest, "--out", (dir / "f").string(), "--chunk", "10m", "--stop-after", "1"});
  ASSERT_EQ(first.code, kExitOk) << first.err;
  EXPECT_FALSE(nlohmann::json::parse(first.out)["complete"].get<bool>());
  EXPECT_EQ(run({"summarize", (dir / "f").string(), "--out", (dir / "s").string()}).code, kExitData);

  const auto second = run({"fuse", manifest, "--out", (dir / "f").string(), "--chunk", "10m", "--resume"});
  ASSERT_EQ(second.code, kExitOk) << second.err;
  const auto chunks = nlohmann::json::parse(second.out)["chunks"];
  ASSERT_GE(chunks.size(), 2u);
  EXPECT_TRUE(chunks[0]["resumed"].get<bool>());
  for (std::size_t i = 1; i < chunks.size(); ++i) EXPECT_FALSE(chunks[i]["resumed"].get<bool>());
}

TEST(Cli, OverlapIsDataError) {
  TempDir dir("cli-overlap");
  fixture::spit(dir / "jobs.csv", "job_id,user,project,queue,submit_time,start_time,end_time,requested_nodes\n"
                                  "J1,u,p,q,0,0,100,1\nJ2,u,p,q,0,50,150,1\n");
  fixture::spit(dir / "hosts.csv", "job_id,host\nJ1,n1\nJ2,n1\n");
  std::ostringstream tel;
  write_telemetry(tel, {});
  fixture::spit(dir / "tel.csv", tel.str());
  DatasetManifest m;
  m.job_logs = {dir / "jobs.csv"};
  m.host_logs = {dir / "hosts.csv"};
  m.telemetry = {dir / "tel.csv"};
  m.range_end = 1000;
  m.save(dir / "manifest.json");
  const auto r = run({"fuse", (dir / "manifest.json").string(), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("J1"), std::string::npos);
  EXPECT_NE(r.err.find("J2"), std::string::npos);
}

TEST(Cli, EmptyFusedDirIsRefused) {
  TempDir dir("cli-empty");
  const auto r = run({"summarize", dir.path().string(), "--out", (dir / "s").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("level=error"), std::string::npos);
}

TEST(Cli, ReportNamesMissingColumn) {
  TempDir dir("cli-report");
  fixture::spit(dir / "bad.csv", "job_id,job_class\nJ1,small\n");
  const auto r = run({"report", (dir / "bad.csv").string(), "--out", (dir / "r").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("queue"), std::string::npos);
}

TEST(Cli, InvalidMixIsDataError) {
  TempDir dir("cli-mix");
  fixture::spit(dir / "spec.conf", "mix = 0.5,0.6,0.1\n");
  EXPECT_EQ(run({"synth", (dir / "spec.conf").string(), "--out", (dir / "o").string()}).code, kExitData);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  TempDir dir("cli-config");
  write_spec(dir / "spec.conf", 5);
  ASSERT_EQ(run({"synth", (dir / "spec.conf").string(), "--out", (dir / "data").string()}).code, 0);
  fixture::spit(dir / "fuse.conf", "chunk = 30m\nworkers = 3\nout = " + (dir / "from-config").string() + "\n");
  const auto manifest = (dir / "data" / "manifest.json").string();
  const auto a = run({"fuse", manifest, "--config", (dir / "fuse.conf").string()});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NE(a.err.find("chunk=1800s"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "from-config" / "ledger.txt"));
  const auto b = run({"fuse", manifest, "--config", (dir / "fuse.conf").string(), "--chunk", "2h", "--out",
                      (dir / "from-flag").string()});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_NE(b.err.find("chunk=7200s"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "from-flag" / "ledger.txt"));

  fixture::spit(dir / "typo.conf", "chunkk = 1h\n");
  EXPECT_EQ(run({"fuse", manifest, "--config", (dir / "typo.conf").string()}).code, kExitData);
}

TEST(Cli, OutputRootFromEnvironment) {
  TempDir dir("cli-env");
  write_spec(dir / "spec.conf", 3);
  ::setenv(kOutRootEnv, (dir / "root").string().c_str(), 1);
  const auto r = run({"synth", (dir / "spec.conf").string()});
  ::unsetenv(kOutRootEnv);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "root" / "synth" / "manifest.json"));
}
