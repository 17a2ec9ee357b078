#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stackrepair/decoder.hpp"
#include "stackrepair/gap_detector.hpp"
#include "stackrepair/level.hpp"
#include "stackrepair/physics.hpp"

namespace stackrepair {

struct RepairOptions {
  Metric metric = Metric::velocity;
  DetectorKind detector = DetectorKind::geometric;
  /// Material of inserted blocks.
  Material material = Material::wood;
  SimConfig sim;
  DecodeOptions decode;
  GeometricOptions geometric;
  /// Grid size and cell size; the origin is fit per level.
  GridSpec grid;
  /// External detector: masks are read from <mask_dir>/<level id>.pgm.
  std::filesystem::path mask_dir;
  int threads = 0;
};

struct RepairRecord {
  std::string level_id;
  Metric metric = Metric::velocity;
  DetectorKind detector = DetectorKind::geometric;
  /// False when the level could not be simulated at all (see error).
  bool evaluated = true;
  bool initially_stable = false;
  bool repair_attempted = false;
  bool mask_nonempty = false;
  std::size_t mask_cells = 0;
  std::size_t dropped_mask_cells = 0;
  int blocks_added = 0;
  /// Set only when a repair was attempted.
  std::optional<bool> finally_stable;
  std::string repaired_level_path;
  /// Damage sustained by all blocks, not counting the -1 starting value.
  double damage_before = 0.0;
  std::optional<double> damage_after;
  int destroyed_before = 0;
  std::optional<int> destroyed_after;
  std::string error;

  bool operator==(const RepairRecord&) const = default;
};

struct RepairOutcome {
  RepairRecord record;
  Level repaired;  // the input itself when no repair was attempted
};

/// Simulates the level; stable levels pass through untouched. Unstable ones are
/// encoded, run through the detector, decoded into blocks of the repair
/// material, inserted and simulated again. Detector and codec errors are
/// recorded, not thrown.
RepairOutcome repair_level(const Level& level, const RepairOptions& options = {});

/// Rounded value of num/den as an integer number of `scale` units, half-up,
/// computed exactly. For example scaled_ratio(1254, 7055, 1000) = 178 (17.8%).
std::int64_t scaled_ratio(std::int64_t num, std::int64_t den, std::int64_t scale);

/// Half-up rounding of a non-negative or negative value to `digits` decimals.
double round_half_up(double value, int digits);

struct MitigationStats {
  std::optional<double> avg_damage_before;
  std::optional<double> avg_damage_after;
  std::optional<double> damage_reduction_pct;  // one decimal
  std::optional<double> avg_destroyed_before;
  std::optional<double> avg_destroyed_after;
  std::optional<double> destroyed_reduction_pct;
};

/// (before - after) / before * 100, rounded to one decimal; nullopt when before is 0.
std::optional<double> reduction_pct(double before, double after);

/// Means over failed repairs (attempted and still unstable); nulls for an empty set.
MitigationStats mitigation_stats(std::span<const RepairRecord> records);

struct RepairReport {
  Metric metric = Metric::velocity;
  std::int64_t levels = 0;
  std::int64_t skipped = 0;  // not evaluated
  std::int64_t initial_unstable = 0;
  std::int64_t stabilized = 0;
  std::int64_t initial_stable = 0;
  std::int64_t final_stable = 0;
  std::optional<double> repair_rate;
  std::optional<double> growth_factor;
  /// Repair rate in tenths of a percent, half-up (178 = 17.8%).
  std::optional<std::int64_t> repair_rate_tenths;
  /// Growth factor in hundredths, half-up (233 = 2.33).
  std::optional<std::int64_t> growth_hundredths;
  std::optional<double> no_gap_found_fraction;
  MitigationStats mitigation;

  [[nodiscard]] std::string repair_rate_text() const;  // "17.8%" or "null"
  [[nodiscard]] std::string growth_text() const;       // "2.33" or "null"
};

/// Deterministic fold over records (sorted by level id first).
RepairReport aggregate(std::vector<RepairRecord> records, Metric metric);

nlohmann::json to_json(const RepairRecord& record);
RepairRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RepairReport& report);

std::vector<RepairRecord> read_records(const std::filesystem::path& path);

struct BatchResult {
  std::vector<RepairOutcome> outcomes;  // input order
  RepairReport report;
};

/// Repairs every level. When out_dir is non-empty, writes <id>.xml per level,
/// records.jsonl (sorted by level id) and report.json there.
BatchResult repair_batch(std::span<const Level> levels, const RepairOptions& options = {},
                         const std::filesystem::path& out_dir = {});

}  // namespace stackrepair
