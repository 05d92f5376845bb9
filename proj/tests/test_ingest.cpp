#include <gtest/gtest.h>

#include <sstream>

#include "coan/error.hpp"
#include "coan/ingest.hpp"
#include "coan/synth.hpp"
#include "coan/text.hpp"
#include "helpers.hpp"

using namespace coan;

namespace {

const std::string kJobHeader = "job_id,user,project,queue,submit_time,start_time,end_time,requested_nodes\n";

std::string telemetry_header() {
  std::string h;
  for (const auto& c : telemetry_columns()) h += (h.empty() ? "" : ",") + c;
  return h + "\n";
}

template <class R>
void expect_conserved(const ParseResult<R>& r) {
  EXPECT_EQ(r.records.size() + r.rejects.size(), r.total_rows);
}

}  // namespace

TEST(JobLog, IsoRowMapsDirectly) {
  std::istringstream in(kJobHeader + "J1,alice,proj,small,2024-01-01T00:00:00Z,2024-01-01T00:00:00Z,"
                                     "2024-01-01T01:00:00Z,10\n");
  const auto r = parse_job_log(in);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].runtime_seconds(), 3600);
  EXPECT_EQ(r.records[0].start_time, 1704067200);
  EXPECT_EQ(classify_job(r.records[0].requested_nodes), JobClass::kSmall);
}

TEST(JobLog, EndBeforeStartIsRejected) {
  std::istringstream in(kJobHeader + "J1,a,p,q,100,200,150,10\n");
  const auto r = parse_job_log(in);
  EXPECT_TRUE(r.records.empty());
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].reason, "negative runtime");
  EXPECT_EQ(r.rejects[0].line, 2u);
}

TEST(JobLog, MissingColumnIsNamed) {
  std::istringstream in("job_id,user,project,queue,submit_time,start_time,requested_nodes\n");
  try {
    parse_job_log(in);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("end_time"), std::string::npos);
  }
}

TEST(JobLog, ColumnMappingRenamesAndReorders) {
  ColumnMapping mapping({{"job_id", "Job_Id"}, {"requested_nodes", "Resource_List.nodect"}});
  std::istringstream in(
      "Resource_List.nodect,queue,Job_Id,user,project,submit_time,start_time,end_time\n"
      "12,prod,\"1234.polaris\",u,p,0,10,20\n");
  const auto r = parse_job_log(in, mapping);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].job_id, "1234.polaris");
  EXPECT_EQ(r.records[0].requested_nodes, 12);
}

TEST(JobLog, DuplicateIdRejected) {
  std::istringstream in(kJobHeader + "J1,a,p,q,0,0,10,10\nJ1,a,p,q,0,0,10,10\n");
  const auto r = parse_job_log(in);
  EXPECT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].reason, "duplicate job_id");
  expect_conserved(r);
}

TEST(HostLog, TwoHosts) {
  std::istringstream in("job_id,host\nJ1,n1\nJ1,n2\n");
  const auto r = parse_host_log(in);
  EXPECT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.duplicates, 0u);
}

TEST(HostLog, DuplicateCollapsedAndCounted) {
  std::istringstream in("job_id,host\nJ1,n1\nJ1,n1\n");
  const auto r = parse_host_log(in);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.duplicates, 1u);
  expect_conserved(r);
}

TEST(Telemetry, AggregatesAfterParse) {
  std::istringstream in(telemetry_header() + "1000,n1,50,50,50,50,0,0,0,0,0,0,0,0,100,100,100,100\n");
  const auto r = parse_telemetry(in);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_DOUBLE_EQ(node_util(r.records[0]), 50.0);
  EXPECT_DOUBLE_EQ(node_power(r.records[0]), 400.0);
}

TEST(Telemetry, PercentOutOfRange) {
  std::istringstream in(telemetry_header() + "1000,n1,150,50,50,50,0,0,0,0,0,0,0,0,100,100,100,100\n");
  const auto r = parse_telemetry(in);
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].reason, "percent out of range");
}

TEST(Telemetry, NodeDayCount) {
  std::vector<TelemetrySample> day;
  for (Timestamp t = 0; t < 86400; t += 5) day.push_back(fixture::sample(t, "n1", 30.0, 200.0));
  std::stringstream buf;
  write_telemetry(buf, day);
  const auto r = parse_telemetry(buf);
  EXPECT_EQ(r.records.size(), 17280u);
  EXPECT_TRUE(r.rejects.empty());
}

TEST(Ingest, SyntheticCountsMatchGenerator) {
  ScenarioSpec spec;
  spec.jobs = 20;
  spec.min_nodes = 10;
  spec.max_nodes = 10;
  spec.mix_small = 1.0;
  spec.mix_medium = spec.mix_large = 0.0;
  spec.min_runtime = spec.max_runtime = 60;
  const auto sc = generate(spec);
  std::stringstream jobs, hosts;
  write_job_log(jobs, sc.jobs);
  write_host_log(hosts, sc.hosts);
  const auto rj = parse_job_log(jobs);
  const auto rh = parse_host_log(hosts);
  EXPECT_EQ(rj.records.size(), 20u);
  EXPECT_TRUE(rj.rejects.empty());
  EXPECT_EQ(rh.records.size(), 200u);
}

// Property: every data row ends up either accepted or rejected, whatever the damage.
TEST(Ingest, ConservationUnderCorruption) {
  ScenarioSpec spec;
  spec.jobs = 6;
  spec.min_runtime = spec.max_runtime = 100;
  const auto sc = generate(spec);
  std::stringstream clean;
  write_telemetry(clean, sc.telemetry);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(clean, line)) lines.push_back(line);

  std::mt19937_64 rng(7);
  const std::vector<std::string> damage = {"", ",", "x", "\"", "-1", "nan", "1e999", "150", ",,,"};
  for (int round = 0; round < 40; ++round) {
    std::string text = lines[0] + "\n";
    for (std::size_t i = 1; i < lines.size(); ++i) {
      std::string l = lines[i];
      if (rng() % 5 == 0) {
        const auto pos = rng() % (l.size() + 1);
        const auto cut = rng() % 4;
        l = l.substr(0, pos) + damage[rng() % damage.size()] + l.substr(std::min(l.size(), pos + cut));
      }
      text += l + "\n";
    }
    std::istringstream in(text);
    const auto r = parse_telemetry(in);
    expect_conserved(r);
    EXPECT_EQ(r.total_rows, lines.size() - 1);
  }
}

TEST(Ingest, RoundTripIsLossless) {
  ScenarioSpec spec;
  spec.jobs = 5;
  spec.min_runtime = spec.max_runtime = 60;
  const auto sc = generate(spec);
  std::stringstream jobs, hosts, tel;
  write_job_log(jobs, sc.jobs);
  write_host_log(hosts, sc.hosts);
  write_telemetry(tel, sc.telemetry);
  EXPECT_EQ(parse_job_log(jobs).records, sc.jobs);
  EXPECT_EQ(parse_host_log(hosts).records, sc.hosts);
  EXPECT_EQ(parse_telemetry(tel).records, sc.telemetry);
}

TEST(Ingest, QuotedFieldsRoundTrip) {
  std::vector<JobRecord> jobs = {fixture::job("J,1", 0, 10), fixture::job("J\"2", 0, 10)};
  jobs[0].user = "smith, j";
  std::stringstream buf;
  write_job_log(buf, jobs);
  EXPECT_EQ(parse_job_log(buf).records, jobs);
}

TEST(Text, TimestampForms) {
  EXPECT_EQ(parse_timestamp("1704067200"), 1704067200);
  EXPECT_EQ(parse_timestamp("1704067200.9"), 1704067200);
  EXPECT_EQ(parse_timestamp("2024-01-01T00:00:00Z"), 1704067200);
  EXPECT_EQ(parse_timestamp("2024-01-01T02:00:00+02:00"), 1704067200);
  EXPECT_FALSE(parse_timestamp("yesterday"));
  EXPECT_EQ(format_iso8601(1704067200), "2024-01-01T00:00:00Z");
  EXPECT_EQ(next_month(month_floor(1706745599)), 1706745600);
}

TEST(Manifest, SaveLoadRelativePaths) {
  fixture::TempDir dir("manifest");
  DatasetManifest m;
  m.job_logs = {dir / "jobs.csv"};
  m.host_logs = {dir / "hosts.csv"};
  m.telemetry = {dir / "a.csv", dir / "b.csv"};
  m.range_start = 0;
  m.range_end = 100;
  m.save(dir / "manifest.json");
  const auto text = fixture::slurp(dir / "manifest.json");
  EXPECT_EQ(text.find(dir.path().string()), std::string::npos);
  const auto back = DatasetManifest::load(dir / "manifest.json");
  ASSERT_EQ(back.telemetry.size(), 2u);
  EXPECT_EQ(back.telemetry[1].filename(), "b.csv");
  EXPECT_EQ(back.telemetry[1].parent_path(), std::filesystem::absolute(dir.path()));
  EXPECT_EQ(back.range_end, 100);
}
