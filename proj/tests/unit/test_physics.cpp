#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "stackrepair/destabilizer.hpp"
#include "stackrepair/error.hpp"
#include "stackrepair/physics.hpp"
#include "stackrepair/support.hpp"
#include "stackrepair/synthetic.hpp"

using namespace stackrepair;

namespace {

Level single(BlockKind kind, double x, double bottom, int rotation = 0, Material m = Material::wood) {
  Level level;
  level.blocks.push_back(make_block(kind, x, bottom, rotation, m));
  return level;
}

Level table() {
  Level level;
  level.blocks.push_back(make_block(BlockKind::RectSmall, -0.93, 0.0, 90));
  level.blocks.push_back(make_block(BlockKind::RectSmall, 0.93, 0.0, 90));
  level.blocks.push_back(make_block(BlockKind::RectBig, 0.0, 0.85));
  return level;
}

double energy(const StepSnapshot& s, double g) {
  double e = 0.0;
  for (const auto& b : s.bodies) {
    if (!b.alive) continue;
    e += 0.5 * b.mass * (b.vx * b.vx + b.vy * b.vy) + b.mass * g * b.y;
  }
  return e;
}

template <class Fn>
Errc error_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::io_error;
}

}  // namespace

TEST(Simulate, RestingSquareSmallIsStable) {
  const SimOutcome out = simulate(single(BlockKind::SquareSmall, 0.0, 0.0));
  EXPECT_TRUE(out.stable_velocity);
  EXPECT_TRUE(out.stable_destruction);
  EXPECT_TRUE(out.stable_damage);
  EXPECT_DOUBLE_EQ(out.total_damage, -1.0);
  EXPECT_DOUBLE_EQ(single(BlockKind::SquareSmall, 0.0, 0.0).blocks[0].y, 0.215);
}

TEST(Simulate, FloatingBoxFalls) {
  Level level;
  level.blocks.push_back(Block{BlockKind::SquareSmall, Material::wood, 0.0, 3.0, 0});
  const SimOutcome out = simulate(level);
  EXPECT_FALSE(out.stable_velocity);
  EXPECT_NEAR(out.per_block[0].net_displacement, 3.0 - 0.215, 0.02);
}

TEST(Simulate, FreeFallMatchesClosedForm) {
  Level level;
  level.blocks.push_back(Block{BlockKind::SquareSmall, Material::wood, 0.0, 6.0, 0});
  const SimConfig cfg;
  std::vector<double> ys;
  simulate(level, cfg, [&](const StepSnapshot& s) { ys.push_back(s.bodies[0].y); });
  for (int n : {24, 60, 120, 240}) {
    const double t = n * cfg.dt;
    const double expected = 0.5 * cfg.gravity * t * t;
    ASSERT_LT(expected, 6.0 - 0.215);
    const double fallen = 6.0 - ys[static_cast<std::size_t>(n - 1)];
    EXPECT_NEAR(fallen, expected, 0.05 * expected) << "t=" << t;
  }
}

TEST(Simulate, RestingBoxStaysPutForLongRuns) {
  SimConfig cfg;
  cfg.settle_steps = 4800;
  cfg.stop_when_quiescent = false;
  for (auto kind : {BlockKind::SquareSmall, BlockKind::RectBig, BlockKind::SquareTiny}) {
    for (auto m : {Material::wood, Material::ice, Material::stone}) {
      const SimOutcome out = simulate(single(kind, 1.0, 0.0, 0, m), cfg);
      EXPECT_LE(out.per_block[0].net_displacement, cfg.displacement_epsilon);
      EXPECT_TRUE(out.stable_velocity);
      EXPECT_EQ(out.steps_run, 4800);
    }
  }
}

TEST(Simulate, TableIsStable) {
  const SimOutcome out = simulate(table());
  EXPECT_TRUE(out.stable_velocity);
  EXPECT_DOUBLE_EQ(out.total_damage, -3.0);
}

TEST(Simulate, TableWithoutLeftColumnCollapses) {
  Level level = table();
  level.blocks.erase(level.blocks.begin());
  SimConfig cfg;
  cfg.impact_damage_scale = 5.0;
  std::vector<double> beam_y;
  const SimOutcome out = simulate(level, cfg, [&](const StepSnapshot& s) { beam_y.push_back(s.bodies[1].y); });
  EXPECT_FALSE(out.stable_velocity);
  EXPECT_GT(out.per_block[1].net_displacement, 0.5);
  EXPECT_GT(out.per_block[1].damage, -1.0);

  // The beam drops freely until it reaches the ground 0.85 below.
  const double t = 72 * cfg.dt;
  const double expected = 0.5 * cfg.gravity * t * t;
  ASSERT_LT(expected, 0.85);
  EXPECT_NEAR(level.blocks[1].y - beam_y[71], expected, 0.05 * expected);
}

TEST(Simulate, Deterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Level level = synthetic_level(seed, "d");
    if (level.blocks.size() > 1) level.blocks.erase(level.blocks.begin());
    std::vector<double> trace1, trace2;
    const auto a = simulate(level, {}, [&](const StepSnapshot& s) {
      for (const auto& b : s.bodies) trace1.push_back(b.x + 7 * b.y + 13 * b.vx + 17 * b.vy);
    });
    const auto b = simulate(level, {}, [&](const StepSnapshot& s) {
      for (const auto& bd : s.bodies) trace2.push_back(bd.x + 7 * bd.y + 13 * bd.vx + 17 * bd.vy);
    });
    EXPECT_EQ(a, b);
    EXPECT_EQ(trace1, trace2);
  }
}

TEST(Simulate, EnergyNeverIncreases) {
  SimConfig cfg;
  cfg.stop_when_quiescent = false;
  cfg.settle_steps = 600;
  int levels = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Level level = synthetic_level(seed, "e");
    for (std::size_t drop = 0; drop < level.blocks.size(); ++drop) {
      const std::size_t idx[] = {drop};
      const Level broken = remove_blocks(level, idx);
      double prev = std::numeric_limits<double>::infinity();
      double worst = 0.0;
      simulate(broken, cfg, [&](const StepSnapshot& s) {
        const double e = energy(s, cfg.gravity);
        worst = std::max(worst, e - prev);
        prev = e;
      });
      EXPECT_LE(worst, 1e-6) << worst << " seed " << seed << " without block " << drop;
      ++levels;
    }
  }
  EXPECT_GT(levels, 40);
}

TEST(Simulate, DestructionIsMonotoneAndRemovedBodiesStayInert) {
  // A stone block dropped onto an ice plank.
  Level level;
  level.blocks.push_back(make_block(BlockKind::RectBig, 0.0, 0.0, 0, Material::ice));
  level.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 2.5, 0, Material::stone));
  SimConfig cfg;
  cfg.impact_damage_scale = 10.0;
  int last = 0;
  std::vector<std::optional<std::pair<double, double>>> frozen(2);
  simulate(level, cfg, [&](const StepSnapshot& s) {
    EXPECT_GE(s.destroyed_count, last);
    last = s.destroyed_count;
    for (std::size_t i = 0; i < s.bodies.size(); ++i) {
      if (s.bodies[i].alive) continue;
      if (!frozen[i]) frozen[i] = std::pair{s.bodies[i].x, s.bodies[i].y};
      EXPECT_EQ(s.bodies[i].x, frozen[i]->first);
      EXPECT_EQ(s.bodies[i].y, frozen[i]->second);
    }
  });
  EXPECT_GE(last, 1);
  const SimOutcome out = simulate(level, cfg);
  EXPECT_FALSE(out.stable_destruction);
  EXPECT_FALSE(out.stable_damage);
  EXPECT_EQ(out.destroyed_count, last);
}

TEST(Simulate, VelocityStableImpliesOtherVerdicts) {
  int stable = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Level level = synthetic_level(seed, "m");
    if (seed % 2 == 1 && level.blocks.size() > 1) level.blocks.erase(level.blocks.begin());
    const SimOutcome out = simulate(level);
    if (out.stable_velocity) {
      ++stable;
      EXPECT_TRUE(out.stable_destruction) << seed;
      EXPECT_TRUE(out.stable_damage) << seed;
    }
  }
  EXPECT_GT(stable, 50);
}

TEST(Simulate, VerdictInvariants) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Level level = synthetic_level(seed, "v");
    if (level.blocks.size() > 2) level.blocks.erase(level.blocks.begin() + 1);
    const SimConfig cfg;
    const SimOutcome out = simulate(level, cfg);
    bool all_still = true;
    double total = 0.0;
    int destroyed = 0;
    for (const auto& b : out.per_block) {
      all_still = all_still && b.peak_velocity <= cfg.velocity_epsilon && b.net_displacement <= cfg.displacement_epsilon;
      total += b.damage;
      destroyed += b.destroyed ? 1 : 0;
    }
    EXPECT_EQ(out.stable_velocity, all_still);
    EXPECT_EQ(out.destroyed_count, destroyed);
    EXPECT_DOUBLE_EQ(out.total_damage, total);
    EXPECT_EQ(out.stable_destruction, destroyed == 0);
    EXPECT_EQ(out.stable_damage, total <= 0.0);
  }
}

TEST(Simulate, EarlyExitAgreesWithFullRun) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Level level = synthetic_level(seed, "x");
    if (seed % 3 == 0 && level.blocks.size() > 1) level.blocks.erase(level.blocks.begin());
    EXPECT_EQ(is_stable(level, Metric::velocity), simulate(level).stable_velocity) << seed;
  }
}

TEST(Classify, Examples) {
  SimOutcome out;
  EXPECT_TRUE(classify(out, Metric::damage));
  out.destroyed_count = 1;
  out.stable_destruction = false;
  EXPECT_FALSE(classify(out, Metric::destruction));
  SimOutcome three;
  three.total_damage = -3.0;
  three.stable_damage = three.total_damage <= 0.0;
  EXPECT_TRUE(classify(three, Metric::damage));
}

TEST(Simulate, InvalidLevels) {
  Level overlap;
  overlap.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  overlap.blocks.push_back(make_block(BlockKind::SquareHole, 0.7, 0.0));
  EXPECT_EQ(error_of([&] { simulate(overlap); }), Errc::invalid_level);

  Level sunk;
  sunk.blocks.push_back(Block{BlockKind::SquareHole, Material::wood, 0.0, 0.3, 0});
  EXPECT_EQ(error_of([&] { simulate(sunk); }), Errc::invalid_level);

  Level nan;
  nan.blocks.push_back(Block{BlockKind::SquareHole, Material::wood, std::nan(""), 1.0, 0});
  EXPECT_EQ(error_of([&] { simulate(nan); }), Errc::invalid_level);

  // Slight overlap below the load limit is accepted.
  Level touching;
  touching.blocks.push_back(make_block(BlockKind::SquareHole, 0.0, 0.0));
  touching.blocks.push_back(make_block(BlockKind::SquareHole, 0.84, 0.0));
  EXPECT_NO_THROW(simulate(touching));

  EXPECT_EQ(error_of([&] { check_loadable(overlap); }), Errc::invalid_level);
  EXPECT_EQ(error_of([&] { check_loadable(nan); }), Errc::invalid_level);
  EXPECT_NO_THROW(check_loadable(touching));
}

TEST(SimConfig, Validation) {
  SimConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.dt = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.settle_steps = 100;  // 0.42 s window
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.materials[Material::ice].restitution = 0.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Support, BeamOnOneColumn) {
  const Level level = table();
  auto boxes = level_boxes(level);
  auto info = analyze_support(boxes, 0.02);
  EXPECT_TRUE(info[0].grounded);
  EXPECT_FALSE(info[2].com_outside);
  EXPECT_EQ(info[2].supporters.size(), 2u);
  EXPECT_NEAR(info[2].unsupported_fraction, 0.0, 1e-9);

  boxes.erase(boxes.begin());
  info = analyze_support(boxes, 0.02);
  const SupportInfo& beam = info[1];
  EXPECT_TRUE(beam.has_support);
  EXPECT_TRUE(beam.com_outside);
  EXPECT_NEAR(beam.span_min, 0.83, 1e-6);
  EXPECT_NEAR(beam.span_max, 1.03, 1e-6);
  EXPECT_NEAR(beam.unsupported_fraction, 1.0 - 0.2 / 2.06, 1e-6);
}

TEST(Support, FloatingBoxHasNoSupport) {
  Level level;
  level.blocks.push_back(Block{BlockKind::SquareTiny, Material::wood, 0.0, 1.0, 0});
  const auto info = analyze_support(level_boxes(level), 0.02);
  EXPECT_FALSE(info[0].has_support);
  EXPECT_TRUE(info[0].com_outside);
  EXPECT_FALSE(statically_supported(level, 0.005));
}
