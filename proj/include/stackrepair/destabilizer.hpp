#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stackrepair/grid.hpp"
#include "stackrepair/level.hpp"
#include "stackrepair/physics.hpp"

namespace stackrepair {

struct DestabilizeOptions {
  Metric metric = Metric::velocity;
  int max_attempts = 20;
  /// Number of removed blocks is drawn uniformly from [min_k, max_k],
  /// capped at the level's block count.
  int min_k = 1;
  int max_k = 4;
  SimConfig sim;
  /// Grid size and cell size; the origin is refit per level.
  GridSpec grid;
  /// 0 means hardware concurrency.
  int threads = 0;
};

/// An unstable level made by removing blocks from a stable one, with the
/// footprints of the removed blocks as the target mask.
struct TrainingPair {
  std::string source_id;
  std::vector<Block> removed;
  std::vector<std::size_t> removed_indices;  // ascending, into the source's blocks
  Level modified;
  OccupancyGrid image;
  GapMask mask;
  Metric metric_used = Metric::velocity;
  std::uint64_t seed = 0;
  int attempts = 0;  // trials used, including the successful one
};

/// Levels whose verdict under `metric` is stable, in input order. Levels the
/// simulator rejects are skipped; their ids go to `skipped` when given.
std::vector<Level> filter_stable(std::span<const Level> levels, Metric metric, const SimConfig& sim = {},
                                 std::vector<std::string>* skipped = nullptr, int threads = 0);

/// Copy of `level` without the blocks at `indices` (ascending).
Level remove_blocks(const Level& level, std::span<const std::size_t> indices);

/// Copy of `modified` with `removed` put back at their original list positions.
Level restore_blocks(const Level& modified, std::span<const Block> removed, std::span<const std::size_t> indices);

/// Tries up to max_attempts random removals and returns the first that makes
/// the level unstable. Throws Error(not_stable_input) for unstable input.
std::optional<TrainingPair> destabilize(const Level& level, std::uint64_t seed, const DestabilizeOptions& options = {});

struct ManifestRecord {
  std::string id;
  std::string source_id;
  std::string image;  // relative to the dataset root
  std::string mask;
  int k = 0;
  std::vector<Block> removed;
  std::vector<std::size_t> removed_indices;
  std::uint64_t seed = 0;
  int attempts = 0;
  Metric metric = Metric::velocity;
  GridSpec grid;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::size_t levels_in = 0;
  std::size_t levels_stable = 0;
  std::vector<std::string> skipped;  // rejected by the simulator
};

/// Filters stable levels, destabilizes each with its own seed stream and
/// writes images/, masks/, manifest.jsonl and split.json under out_dir.
/// Output bytes depend only on the level order and seed.
DatasetManifest build_dataset(std::span<const Level> levels, std::uint64_t seed, const std::filesystem::path& out_dir,
                              const DestabilizeOptions& options = {});

/// Reads a manifest.jsonl written by build_dataset.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Deterministic train/validation split: seeded shuffle, first floor(0.8 n) train.
std::pair<std::vector<std::string>, std::vector<std::string>> split_ids(std::vector<std::string> ids,
                                                                        std::uint64_t seed);

}  // namespace stackrepair
