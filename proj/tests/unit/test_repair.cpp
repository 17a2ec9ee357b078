#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "stackrepair/destabilizer.hpp"
#include "stackrepair/repair.hpp"
#include "stackrepair/synthetic.hpp"

using namespace stackrepair;
namespace fs = std::filesystem;

namespace {

// Records for a corpus with the given outcome counts.
std::vector<RepairRecord> fixture(std::int64_t unstable, std::int64_t stabilized, std::int64_t stable) {
  std::vector<RepairRecord> out;
  int n = 0;
  auto next_id = [&] {
    char buf[16];
    std::snprintf(buf, sizeof buf, "l%07d", n++);
    return std::string(buf);
  };
  for (std::int64_t i = 0; i < stable; ++i) {
    RepairRecord r;
    r.level_id = next_id();
    r.initially_stable = true;
    out.push_back(r);
  }
  for (std::int64_t i = 0; i < unstable; ++i) {
    RepairRecord r;
    r.level_id = next_id();
    r.repair_attempted = true;
    r.mask_nonempty = true;
    r.finally_stable = i < stabilized;
    out.push_back(r);
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ScaledRatio, HalfUp) {
  EXPECT_EQ(scaled_ratio(1254, 7055, 1000), 178);
  EXPECT_EQ(scaled_ratio(1, 8, 100), 13);  // 12.5 rounds up
  EXPECT_EQ(scaled_ratio(1, 3, 100), 33);
  EXPECT_EQ(scaled_ratio(2, 3, 100), 67);
  EXPECT_EQ(scaled_ratio(0, 5, 1000), 0);
}

TEST(RoundHalfUp, Decimals) {
  EXPECT_DOUBLE_EQ(round_half_up(25.05, 1), 25.1);
  EXPECT_DOUBLE_EQ(round_half_up(11.538, 1), 11.5);
  EXPECT_DOUBLE_EQ(round_half_up(-0.25, 1), -0.2);
  EXPECT_DOUBLE_EQ(round_half_up(2.0, 1), 2.0);
}

TEST(Aggregate, VelocityRow) {
  const auto r = aggregate(fixture(7055, 1254, 945), Metric::velocity);
  EXPECT_EQ(r.initial_unstable, 7055);
  EXPECT_EQ(r.stabilized, 1254);
  EXPECT_EQ(r.final_stable, 2199);
  EXPECT_EQ(r.repair_rate_text(), "17.8%");
  EXPECT_EQ(r.growth_text(), "2.33");
  EXPECT_DOUBLE_EQ(*r.repair_rate, 1254.0 / 7055.0);
  EXPECT_DOUBLE_EQ(*r.no_gap_found_fraction, 0.0);
}

TEST(Aggregate, DamageRow) {
  const auto r = aggregate(fixture(6259, 1452, 1741), Metric::damage);
  EXPECT_EQ(r.final_stable, 3193);
  EXPECT_EQ(r.repair_rate_text(), "23.2%");
  EXPECT_EQ(r.growth_text(), "1.83");
}

TEST(Aggregate, DestructionRowArithmetic) {
  const auto r = aggregate(fixture(4533, 2051, 3467), Metric::destruction);
  EXPECT_EQ(r.final_stable, 5518);
  EXPECT_EQ(r.growth_text(), "1.59");
  // 2051 / 4533 = 0.45246...
  EXPECT_EQ(r.repair_rate_tenths, 452);
}

TEST(Aggregate, ZeroUnstable) {
  const auto r = aggregate(fixture(0, 0, 12), Metric::velocity);
  EXPECT_FALSE(r.repair_rate);
  EXPECT_EQ(r.repair_rate_text(), "null");
  EXPECT_EQ(r.growth_text(), "1.00");
  EXPECT_DOUBLE_EQ(*r.growth_factor, 1.0);
  const auto j = to_json(r);
  EXPECT_TRUE(j["repair_rate"].is_null());
  EXPECT_EQ(j["growth_factor"], 1.0);
}

TEST(Aggregate, EmptyMaskCountsAsNoGap) {
  auto recs = fixture(4, 1, 2);
  recs[3].mask_nonempty = false;
  recs[3].finally_stable = false;
  recs[4].mask_nonempty = false;
  const auto r = aggregate(recs, Metric::velocity);
  EXPECT_DOUBLE_EQ(*r.no_gap_found_fraction, 0.5);
}

TEST(Aggregate, OrderIndependentAndMonotone) {
  auto recs = fixture(30, 11, 9);
  const auto a = to_json(aggregate(recs, Metric::velocity));
  std::reverse(recs.begin(), recs.end());
  const auto b = to_json(aggregate(recs, Metric::velocity));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_GE(a["final_stable"].get<int>(), a["initial_stable"].get<int>());
}

TEST(Mitigation, ReferenceFigures) {
  EXPECT_DOUBLE_EQ(*reduction_pct(51.99, 38.95), 25.1);
  EXPECT_DOUBLE_EQ(*reduction_pct(5.2, 4.6), 11.5);
  EXPECT_DOUBLE_EQ(*reduction_pct(3.0, 3.0), 0.0);
  EXPECT_FALSE(reduction_pct(0.0, 1.0));
}

TEST(Mitigation, MeansOverFailedRepairs) {
  std::vector<RepairRecord> recs(3);
  recs[0].repair_attempted = true;
  recs[0].finally_stable = false;
  recs[0].damage_before = 4.0;
  recs[0].damage_after = 2.0;
  recs[0].destroyed_before = 2;
  recs[0].destroyed_after = 1;
  recs[1] = recs[0];
  recs[1].damage_before = 6.0;
  recs[1].damage_after = 6.0;
  recs[2].repair_attempted = true;
  recs[2].finally_stable = true;  // not a failure
  recs[2].damage_before = 100.0;
  recs[2].damage_after = 0.0;
  const auto m = mitigation_stats(recs);
  EXPECT_DOUBLE_EQ(*m.avg_damage_before, 5.0);
  EXPECT_DOUBLE_EQ(*m.avg_damage_after, 4.0);
  EXPECT_DOUBLE_EQ(*m.damage_reduction_pct, 20.0);
  EXPECT_DOUBLE_EQ(*m.avg_destroyed_before, 2.0);
  EXPECT_DOUBLE_EQ(*m.destroyed_reduction_pct, 50.0);

  const auto none = mitigation_stats(std::vector<RepairRecord>{});
  EXPECT_FALSE(none.avg_damage_before);
  EXPECT_FALSE(none.damage_reduction_pct);
}

TEST(RecordJson, RoundTrip) {
  RepairRecord r;
  r.level_id = "lvl";
  r.metric = Metric::damage;
  r.detector = DetectorKind::oracle;
  r.repair_attempted = true;
  r.mask_nonempty = true;
  r.mask_cells = 100;
  r.dropped_mask_cells = 3;
  r.blocks_added = 1;
  r.finally_stable = false;
  r.repaired_level_path = "lvl.xml";
  r.damage_before = 1.25;
  r.damage_after = 0.5;
  r.destroyed_before = 2;
  r.destroyed_after = 1;
  r.error = "x";
  EXPECT_EQ(record_from_json(to_json(r)), r);

  RepairRecord stable;
  stable.level_id = "s";
  stable.initially_stable = true;
  const auto j = to_json(stable);
  EXPECT_TRUE(j["finally_stable"].is_null());
  EXPECT_EQ(record_from_json(j), stable);
}

TEST(RepairLevel, GatekeeperLeavesStableLevelsAlone) {
  for (const Level& level : stable_corpus(20, 71)) {
    const auto out = repair_level(level);
    EXPECT_TRUE(out.record.initially_stable);
    EXPECT_FALSE(out.record.repair_attempted);
    EXPECT_FALSE(out.record.finally_stable);
    EXPECT_EQ(serialize_level(out.repaired), serialize_level(level));
  }
}

TEST(RepairLevel, OracleFixesDestabilizedTowers) {
  DestabilizeOptions dopt;
  dopt.max_k = 1;
  RepairOptions opt;
  opt.detector = DetectorKind::oracle;
  int attempted = 0;
  for (const Level& level : stable_corpus(15, 72)) {
    const auto pair = destabilize(level, 3, dopt);
    if (!pair) continue;
    const auto out = repair_level(pair->modified, opt);
    ++attempted;
    EXPECT_TRUE(out.record.repair_attempted);
    EXPECT_TRUE(out.record.mask_nonempty) << level.id;
    EXPECT_EQ(out.record.finally_stable, true) << level.id;
    EXPECT_GE(out.record.blocks_added, 1);
    EXPECT_EQ(out.repaired.blocks.size(), pair->modified.blocks.size() + out.record.blocks_added);
    for (std::size_t i = 0; i < pair->modified.blocks.size(); ++i) EXPECT_EQ(out.repaired.blocks[i], pair->modified.blocks[i]);
    for (std::size_t i = pair->modified.blocks.size(); i < out.repaired.blocks.size(); ++i) {
      EXPECT_EQ(out.repaired.blocks[i].material, Material::wood);
    }
  }
  EXPECT_GT(attempted, 8);
}

TEST(RepairLevel, EmptyMaskIsANoOp) {
  Level level;
  level.id = "falling";
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  level.blocks.push_back(Block{BlockKind::SquareTiny, Material::wood, 4.0, 3.0, 0});
  RepairOptions opt;
  opt.detector = DetectorKind::oracle;  // no single block reaches 3.0
  const auto out = repair_level(level, opt);
  EXPECT_FALSE(out.record.initially_stable);
  EXPECT_TRUE(out.record.repair_attempted);
  EXPECT_FALSE(out.record.mask_nonempty);
  EXPECT_EQ(out.record.finally_stable, false);
  EXPECT_EQ(out.record.blocks_added, 0);
  EXPECT_EQ(serialize_level(out.repaired), serialize_level(level));
  EXPECT_EQ(aggregate({out.record}, Metric::velocity).no_gap_found_fraction, 1.0);
}

TEST(RepairLevel, ExternalMaskMissingFileIsRecorded) {
  Level level;
  level.id = "nomask";
  level.blocks.push_back(Block{BlockKind::SquareTiny, Material::wood, 0.0, 2.0, 0});
  RepairOptions opt;
  opt.detector = DetectorKind::external_mask;
  opt.mask_dir = fs::temp_directory_path() / "stackrepair_no_such_dir";
  const auto out = repair_level(level, opt);
  EXPECT_FALSE(out.record.error.empty());
  EXPECT_EQ(out.record.finally_stable, false);
}

TEST(RepairLevel, ExternalGroundTruthMaskRepairs) {
  const auto dir = fs::temp_directory_path() / "stackrepair_ext_repair";
  fs::remove_all(dir);
  DestabilizeOptions dopt;
  dopt.max_k = 1;
  std::vector<Level> broken;
  for (const Level& level : stable_corpus(6, 73)) {
    const auto pair = destabilize(level, 1, dopt);
    if (!pair) continue;
    broken.push_back(pair->modified);
    const auto ds = dir / "masks";
    fs::create_directories(ds);
    write_grid(ds / (level.id + ".pgm"), pair->mask);
  }
  ASSERT_FALSE(broken.empty());
  RepairOptions opt;
  opt.detector = DetectorKind::external_mask;
  opt.mask_dir = dir / "masks";
  const auto res = repair_batch(broken, opt);
  for (const auto& o : res.outcomes) {
    EXPECT_TRUE(o.record.error.empty()) << o.record.error;
    EXPECT_TRUE(o.record.mask_nonempty);
    EXPECT_EQ(o.record.dropped_mask_cells, 0u);
  }
  EXPECT_GT(res.report.stabilized, 0);
  fs::remove_all(dir);
}

TEST(RepairBatch, WritesOutputsAndReportRederives) {
  const auto dir = fs::temp_directory_path() / "stackrepair_batch";
  fs::remove_all(dir);
  std::vector<Level> levels = stable_corpus(6, 74);
  DestabilizeOptions dopt;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto pair = destabilize(levels[i], i, dopt);
    if (pair) levels.push_back(pair->modified), levels.back().id += "_broken";
  }
  RepairOptions opt;
  opt.threads = 3;
  const auto res = repair_batch(levels, opt, dir);
  ASSERT_EQ(res.outcomes.size(), levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    EXPECT_EQ(res.outcomes[i].record.level_id, levels[i].id);
    EXPECT_TRUE(fs::exists(dir / (levels[i].id + ".xml")));
  }
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(slurp(dir / (levels[i].id + ".xml")), serialize_level(levels[i]));
  }
  const auto records = read_records(dir / "records.jsonl");
  EXPECT_EQ(records.size(), levels.size());
  EXPECT_TRUE(std::is_sorted(records.begin(), records.end(),
                             [](const auto& a, const auto& b) { return a.level_id < b.level_id; }));
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report.dump(), to_json(aggregate(records, Metric::velocity)).dump());
  EXPECT_EQ(report["initial_stable"], 6);

  opt.threads = 1;
  const auto again = repair_batch(levels, opt);
  EXPECT_EQ(to_json(again.report).dump(), report.dump());
  fs::remove_all(dir);
}
