#include <gtest/gtest.h>

#include <fstream>

#include "stackrepair/destabilizer.hpp"
#include "stackrepair/error.hpp"
#include "stackrepair/gap_detector.hpp"
#include "stackrepair/synthetic.hpp"

using namespace stackrepair;
namespace fs = std::filesystem;

namespace {

// Cells whose centers lie strictly between x0 and x1 and below height y_top,
// down to the ground. Assumes nothing occupies that region.
GapMask region_below(const GridSpec& spec, double x0, double x1, double y_top) {
  GapMask m(spec);
  for (int col = 0; col < spec.width_cells; ++col) {
    const double cx = spec.origin_x + (col + 0.5) * spec.cell_size;
    if (cx <= x0 || cx >= x1) continue;
    for (int row = 0; row < spec.height_cells; ++row) {
      const double cy = spec.origin_y + (row + 0.5) * spec.cell_size;
      if (cy < y_top) m.set(col, row);
    }
  }
  return m;
}

DetectionResult geometric(const Level& level) {
  const GridSpec spec = fit_grid(level);
  return detect_geometric(encode(level, spec), level);
}

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::io_error;
}

}  // namespace

TEST(DetectorKind, Names) {
  for (auto k : {DetectorKind::external_mask, DetectorKind::geometric, DetectorKind::oracle}) {
    EXPECT_EQ(detector_from_name(to_string(k)), k);
  }
  EXPECT_FALSE(detector_from_name("unet"));
}

TEST(Geometric, GroundedBlockGivesEmptyMask) {
  Level level;
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  const auto r = geometric(level);
  EXPECT_TRUE(r.mask.empty());
  EXPECT_TRUE(r.confidence.empty());
  EXPECT_EQ(r.detector, DetectorKind::geometric);
}

TEST(Geometric, BeamOnLeftQuarter) {
  Level level;
  // Column under the left 0.43 of a 2.06 beam.
  level.blocks.push_back(make_block(BlockKind::RectFat, -0.815, 0.0, 90));
  level.blocks.push_back(make_block(BlockKind::RectBig, 0.0, 0.85));
  const GridSpec spec = fit_grid(level);
  const auto r = geometric(level);
  EXPECT_EQ(r.mask, region_below(spec, -0.6, 1.03, 0.85));
  ASSERT_EQ(r.confidence.size(), 1u);
  EXPECT_NEAR(r.confidence[0], 1.0 - 0.43 / 2.06, 1e-9);
  // The region reaches the ground.
  bool ground = false;
  for (int col = 0; col < 128; ++col) ground = ground || r.mask.at(col, 0);
  EXPECT_TRUE(ground);
}

TEST(Geometric, TOverhang) {
  Level level;
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  level.blocks.push_back(make_block(BlockKind::RectMedium, 0.84, 0.85));
  const GridSpec spec = fit_grid(level);
  const auto r = geometric(level);
  EXPECT_EQ(r.mask, region_below(spec, 0.425, 1.68, 0.85));
  ASSERT_EQ(r.confidence.size(), 1u);
  EXPECT_NEAR(r.confidence[0], 1.0 - 0.425 / 1.68, 1e-9);
}

TEST(Geometric, StopsAtFirstOccupiedCell) {
  Level level;
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  level.blocks.push_back(make_block(BlockKind::RectMedium, 0.84, 0.85));
  level.blocks.push_back(make_block(BlockKind::RectSmall, 1.2, 0.0));  // low slab under the overhang
  const GridSpec spec = fit_grid(level);
  const auto r = geometric(level);
  const OccupancyGrid occ = encode(level, spec);
  for (int row = 0; row < 128; ++row) {
    for (int col = 0; col < 128; ++col) EXPECT_FALSE(r.mask.at(col, row) && occ.at(col, row));
  }
  // No cell below the slab is marked.
  const int slab_col = static_cast<int>((1.2 - spec.origin_x) / spec.cell_size);
  EXPECT_FALSE(r.mask.at(slab_col, 0));
  EXPECT_TRUE(r.mask.at(slab_col, 3));
}

TEST(Geometric, LowConfidenceComponentsAreDropped) {
  Level level;
  // Beam hanging just past the edge of its column.
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  level.blocks.push_back(make_block(BlockKind::RectMedium, 0.84, 0.85));
  const GridSpec spec = fit_grid(level);
  GeometricOptions opt;
  opt.confidence_threshold = 0.8;
  EXPECT_TRUE(detect_geometric(encode(level, spec), level, opt).mask.empty());
}

TEST(Geometric, NoFalseFiresOnStableLevels) {
  for (const Level& level : stable_corpus(100, 31)) {
    EXPECT_TRUE(geometric(level).mask.empty()) << level.id;
  }
}

TEST(Geometric, SpecMismatch) {
  Level level;
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  const OccupancyGrid empty(fit_grid(level));
  EXPECT_EQ(error_of([&] { detect_geometric(empty, level); }), Errc::spec_mismatch);
}

TEST(Oracle, FlankedMissingColumnGivesItsFootprint) {
  Level full;
  full.blocks.push_back(make_block(BlockKind::SquareHole, -0.85, 0.0));
  full.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  full.blocks.push_back(make_block(BlockKind::SquareHole, 0.85, 0.0));
  full.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.85));
  ASSERT_TRUE(is_stable(full, Metric::velocity));
  const std::size_t idx[] = {1};
  const Level broken = remove_blocks(full, idx);
  ASSERT_FALSE(is_stable(broken, Metric::velocity));

  OracleOptions opt;
  opt.threads = 1;
  const auto r = detect_oracle(broken, Metric::velocity, opt);
  const GridSpec spec = fit_grid(broken);
  const OccupancyGrid occ = encode(broken, spec);
  EXPECT_EQ(r.mask, footprint_mask(std::span(&full.blocks[1], 1), occ));
  ASSERT_TRUE(r.oracle_block);
  EXPECT_EQ(r.oracle_block->type, BlockKind::SquareHole);
  EXPECT_NEAR(r.oracle_block->x, 0.0, 1e-6);
  EXPECT_EQ(r.confidence, std::vector<double>{1.0});
}

TEST(Oracle, TowerMissingBaseIsRepairedUnderneath) {
  Level full;
  full.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  full.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.85));
  const std::size_t idx[] = {0};
  const Level broken = remove_blocks(full, idx);
  const auto r = detect_oracle(broken, Metric::velocity);
  ASSERT_TRUE(r.oracle_block);
  ASSERT_FALSE(r.mask.empty());
  // The insertion sits on the ground below the hovering block and holds it.
  const Aabb box = effective_aabb(*r.oracle_block);
  EXPECT_NEAR(box.y_min, 0.0, 1e-6);
  EXPECT_NEAR(box.y_max, 0.85, 1e-6);
  EXPECT_TRUE(is_stable(insert_blocks(broken, std::span(&*r.oracle_block, 1)), Metric::velocity));
}

TEST(Oracle, FreeFallingBlockHasNoFix) {
  Level level;
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  level.blocks.push_back(Block{BlockKind::SquareTiny, Material::wood, 4.0, 3.0, 0});
  OracleOptions opt;
  opt.threads = 2;
  const auto r = detect_oracle(level, Metric::velocity, opt);
  EXPECT_TRUE(r.mask.empty());
  EXPECT_FALSE(r.oracle_block);
  EXPECT_TRUE(r.confidence.empty());
  EXPECT_GT(r.candidates_considered, 0u);
}

TEST(Oracle, AlreadyStable) {
  Level level;
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  EXPECT_EQ(error_of([&] { detect_oracle(level, Metric::velocity); }), Errc::already_stable);
}

TEST(Oracle, SoundOnDestabilizedPairs) {
  DestabilizeOptions dopt;
  dopt.max_k = 1;
  const auto corpus = stable_corpus(25, 41);
  int found = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto pair = destabilize(corpus[i], i, dopt);
    if (!pair) continue;
    const auto r = detect_oracle(pair->modified, Metric::velocity);
    if (r.mask.empty()) continue;
    ++found;
    const auto blocks = decode_mask(r.mask, encode(pair->modified, r.mask.spec()), pair->modified);
    EXPECT_TRUE(is_stable(insert_blocks(pair->modified, blocks), Metric::velocity)) << corpus[i].id;
  }
  EXPECT_GT(found, 15);
}

TEST(Oracle, ThreadCountDoesNotChangeResult) {
  DestabilizeOptions dopt;
  dopt.max_k = 2;
  const auto corpus = stable_corpus(8, 52);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto pair = destabilize(corpus[i], i, dopt);
    if (!pair) continue;
    OracleOptions one;
    one.threads = 1;
    OracleOptions many;
    many.threads = 5;
    const auto a = detect_oracle(pair->modified, Metric::velocity, one);
    const auto b = detect_oracle(pair->modified, Metric::velocity, many);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.oracle_block, b.oracle_block);
  }
}

TEST(External, AllZeroGivesEmptyMask) {
  const GridSpec spec;
  const auto r = accept_external_mask(GapMask(spec), OccupancyGrid(spec));
  EXPECT_TRUE(r.mask.empty());
  EXPECT_EQ(r.input_cells, 0u);
  EXPECT_EQ(r.drop_rate(), 0.0);
}

TEST(External, GroundTruthRoundTrip) {
  const auto dir = fs::temp_directory_path() / "stackrepair_ext_rt";
  fs::create_directories(dir);
  DestabilizeOptions dopt;
  const auto corpus = stable_corpus(5, 61);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto pair = destabilize(corpus[i], i, dopt);
    if (!pair) continue;
    write_grid(dir / "m.pgm", pair->mask);
    const auto r = load_external_mask(dir / "m.pgm", pair->image);
    EXPECT_EQ(r.mask, pair->mask);
    EXPECT_EQ(r.dropped_cells, 0u);
    EXPECT_EQ(r.detector, DetectorKind::external_mask);
    for (double c : r.confidence) EXPECT_EQ(c, 1.0);
  }
  fs::remove_all(dir);
}

TEST(External, OverlapIsDroppedAndCounted) {
  Level level;
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  const GridSpec spec = fit_grid(level);
  const OccupancyGrid occ = encode(level, spec);
  // 70 free cells next to the block plus 30 of the block's own cells.
  GapMask raw(spec);
  int free_cells = 0;
  int taken = 0;
  for (int row = 0; row < 10; ++row) {
    for (int col = 0; col < 128; ++col) {
      if (occ.at(col, row) && taken < 30) {
        raw.set(col, row);
        ++taken;
      } else if (!occ.at(col, row) && free_cells < 70 && col > 64) {
        raw.set(col, row);
        ++free_cells;
      }
    }
  }
  const auto r = accept_external_mask(raw, occ);
  EXPECT_EQ(r.input_cells, 100u);
  EXPECT_EQ(r.dropped_cells, 30u);
  EXPECT_DOUBLE_EQ(r.drop_rate(), 0.3);
  EXPECT_EQ(r.mask.count(), 70u);
  for (int row = 0; row < 128; ++row) {
    for (int col = 0; col < 128; ++col) EXPECT_FALSE(r.mask.at(col, row) && occ.at(col, row));
  }
}

TEST(External, FileErrors) {
  const auto dir = fs::temp_directory_path() / "stackrepair_ext_err";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "bad.pgm", std::ios::binary);
    out << "P6\n128 128\n255\n";
  }
  const OccupancyGrid occ{GridSpec{}};
  EXPECT_EQ(error_of([&] { load_external_mask(dir / "bad.pgm", occ); }), Errc::bad_magic);
  write_pgm(dir / "small.pgm", PgmImage{32, 32, std::vector<std::uint8_t>(32 * 32, 255)});
  EXPECT_EQ(error_of([&] { load_external_mask(dir / "small.pgm", occ); }), Errc::dimension_mismatch);
  fs::remove_all(dir);
}
