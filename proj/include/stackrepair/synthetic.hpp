#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stackrepair/level.hpp"
#include "stackrepair/physics.hpp"
#include "stackrepair/rng.hpp"

namespace stackrepair {

// Procedural towers and tables used as test corpora.

struct SyntheticOptions {
  int min_structures = 1;
  int max_structures = 2;
  int min_tower_blocks = 2;
  int max_tower_blocks = 5;
  /// Probability that a structure is a table rather than a tower.
  double table_chance = 0.5;
  double pig_chance = 0.3;
  double topper_chance = 0.5;
  /// Horizontal room for all structures; must fit the default grid (10.88).
  double max_width = 10.5;
  double max_height = 6.0;
  /// Minimum horizontal clearance between structures.
  double clearance = 0.5;
};

/// Block resting with its bottom at `bottom`, quantized like the serializer.
Block make_block(BlockKind kind, double x, double bottom, int rotation = 0, Material material = Material::wood);

/// Blocks stacked bottom-up on the ground, each centered over the one below
/// with a random offset that keeps its center at least 0.1 inside.
std::vector<Block> random_tower(Rng& rng, double x, const SyntheticOptions& options = {});

/// Two equal columns under a beam, optionally with blocks on the beam.
std::vector<Block> random_table(Rng& rng, double x, const SyntheticOptions& options = {});

/// One level with one or more structures side by side.
Level synthetic_level(std::uint64_t seed, const std::string& id, const SyntheticOptions& options = {});

/// `count` levels that are stable under `metric`, ids "syn_<seed>_<n>".
/// Generation seeds follow stream_seed(seed, i); unstable draws are skipped.
std::vector<Level> stable_corpus(std::size_t count, std::uint64_t seed, Metric metric = Metric::velocity,
                                 const SyntheticOptions& options = {}, const SimConfig& sim = {});

}  // namespace stackrepair
