#include <gtest/gtest.h>

#include <set>

#include "coan/error.hpp"
#include "coan/summarize.hpp"
#include "coan/synth.hpp"
#include "helpers.hpp"

using namespace coan;

namespace {

ScenarioSpec small_spec() {
  ScenarioSpec spec;
  spec.jobs = 20;
  spec.min_runtime = 300;
  spec.max_runtime = 600;
  return spec;
}

}  // namespace

TEST(Synth, SeedFixedBytesAreReproducible) {
  fixture::TempDir dir("synth");
  write_scenario(small_spec(), dir / "a");
  write_scenario(small_spec(), dir / "b");
  EXPECT_EQ(fixture::tree_bytes(dir / "a"), fixture::tree_bytes(dir / "b"));
  auto other = small_spec();
  other.seed = 2;
  write_scenario(other, dir / "c");
  EXPECT_NE(fixture::slurp(dir / "a" / "telemetry.csv"), fixture::slurp(dir / "c" / "telemetry.csv"));
}

TEST(Synth, GenerateMatchesWrittenTruth) {
  fixture::TempDir dir("truth");
  const auto truth = write_scenario(small_spec(), dir.path());
  const auto back = GroundTruth::from_json(fixture::slurp(dir / "truth.json"));
  const auto sc = generate(small_spec());
  EXPECT_EQ(back.jobs.size(), 20u);
  EXPECT_EQ(back.telemetry_rows, sc.telemetry.size());
  EXPECT_EQ(sc.truth.to_json(), truth.to_json());
}

TEST(Synth, InvalidSpecs) {
  auto s = small_spec();
  s.mix_small = 0.5;
  EXPECT_THROW(s.validate(), InvalidInput);
  s = small_spec();
  s.pattern = "bursty";
  EXPECT_THROW(s.validate(), InvalidInput);
  s = small_spec();
  s.min_nodes = 200;
  s.max_nodes = 300;
  EXPECT_THROW(s.validate(), InvalidInput);
  EXPECT_THROW(ScenarioSpec::from_config({{"colour", "blue"}}), InvalidInput);
  EXPECT_THROW(ScenarioSpec::from_config({{"mix", "0.5,0.5"}}), InvalidInput);
}

TEST(Synth, ConfigRoundTrip) {
  auto s = small_spec();
  s.seed = 99;
  s.pattern = "phased";
  const auto back = ScenarioSpec::from_config(s.to_config());
  EXPECT_EQ(back.to_config(), s.to_config());
}

TEST(Synth, JobsNeverOverlapAndClassesFollowNodes) {
  const auto sc = generate(small_spec());
  EXPECT_NO_THROW(IntervalIndex::build(sc.jobs, sc.hosts));
  for (std::size_t j = 0; j < sc.jobs.size(); ++j) {
    EXPECT_EQ(classify_job(sc.jobs[j].requested_nodes), sc.truth.jobs[j].job_class);
    EXPECT_EQ(sc.jobs[j].runtime_seconds(), sc.truth.jobs[j].runtime_seconds);
  }
}

TEST(Synth, ConstantPatternSeriesAreLiterallyConstant) {
  auto spec = small_spec();
  spec.pattern = "constant";
  const auto sc = generate(spec);
  std::map<std::pair<std::string, std::string>, TelemetrySample> first;
  std::map<std::string, std::vector<const JobRecord*>> jobs_on;
  for (const auto& h : sc.hosts) {
    for (const auto& j : sc.jobs) {
      if (j.job_id == h.job_id) jobs_on[h.host].push_back(&j);
    }
  }
  for (const auto& s : sc.telemetry) {
    const JobRecord* owner = nullptr;
    for (const auto* j : jobs_on[s.host]) {
      if (s.timestamp >= j->start_time && s.timestamp < j->end_time) owner = j;
    }
    if (!owner) continue;
    auto [it, fresh] = first.try_emplace({owner->job_id, s.host}, s);
    if (!fresh) {
      EXPECT_EQ(it->second.gpu_util, s.gpu_util);
      EXPECT_EQ(it->second.gpu_mem_util, s.gpu_mem_util);
      EXPECT_EQ(it->second.gpu_mem_alloc, s.gpu_mem_alloc);
      EXPECT_EQ(it->second.gpu_power, s.gpu_power);
    }
  }
  EXPECT_FALSE(first.empty());
}

TEST(Synth, ConstantPowerEnergyIsAnalytic) {
  auto spec = small_spec();
  spec.pattern = "constant";
  spec.zero_gpu_fraction = 1.0;
  spec.jobs = 3;
  const auto sc = generate(spec);
  for (const auto& j : sc.truth.jobs) {
    const double node_watts = 4 * spec.idle_power_w;
    // Samples span [start, end - period], so the trapezoid covers runtime - period seconds.
    const double expected = j.num_nodes * node_watts * static_cast<double>(j.runtime_seconds - spec.sample_period) / 1000.0;
    EXPECT_NEAR(j.total_energy, expected, 1e-9 * expected);
  }
}

TEST(Synth, LabelTargetsSitInsideCategories) {
  const auto sc = generate(ScenarioSpec{});
  for (const auto& j : sc.truth.jobs) {
    for (std::size_t m = 0; m < 3; ++m) {
      for (const double t : {j.temporal_target[m], j.spatial_target[m]}) {
        EXPECT_GE(std::abs(t - 0.2), 0.05);
        EXPECT_GE(std::abs(t - 0.6), 0.05);
      }
      EXPECT_EQ(classify_ri(j.temporal_target[m]), j.temporal[m]);
      EXPECT_EQ(classify_ri(j.spatial_target[m]), j.spatial[m]);
    }
  }
}

TEST(Oracle, JoinBasics) {
  const std::vector<JobRecord> jobs = {fixture::job("J1", 0, 100)};
  const std::vector<HostAssignment> hosts = {{"J1", "n1"}};
  const std::vector<TelemetrySample> s = {fixture::sample(99, "n1"), fixture::sample(100, "n1")};
  const auto tags = oracle_join(s, jobs, hosts);
  EXPECT_EQ(tags[0], "J1");
  EXPECT_FALSE(tags[1]);
  const auto none = oracle_join(s, {}, {});
  EXPECT_FALSE(none[0] || none[1]);
  const std::vector<JobRecord> clash = {fixture::job("J1", 0, 100), fixture::job("J2", 99, 120)};
  const std::vector<HostAssignment> both = {{"J1", "n1"}, {"J2", "n1"}};
  EXPECT_THROW(oracle_join(s, clash, both), FusionError);
}

TEST(Oracle, RiExamples) {
  EXPECT_DOUBLE_EQ(oracle_ri({{100, 0, 0, 0}}, RiMode::kTemporal), 0.75);
  EXPECT_EQ(oracle_ri({{100, 3}, {1, 100}}, RiMode::kSpatial), 0.0);
  EXPECT_DOUBLE_EQ(oracle_ri({{100}, {50}}, RiMode::kSpatial), 0.25);
}

TEST(Oracle, StatsAndPearson) {
  const std::vector<double> v = {0, 100};
  const auto s = oracle_stats(v);
  EXPECT_EQ(s.mean, 50);
  EXPECT_EQ(s.stddev, 50);
  const std::vector<double> x = {1, 2, 3}, y = {2, 4, 6}, c = {5, 5, 5};
  EXPECT_NEAR(*oracle_pearson(x, y), 1.0, 1e-15);
  EXPECT_FALSE(oracle_pearson(x, c));
}
