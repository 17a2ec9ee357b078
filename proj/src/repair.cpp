#include "stackrepair/repair.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "stackrepair/error.hpp"
#include "stackrepair/parallel.hpp"

namespace stackrepair {

using nlohmann::json;

namespace {

double sustained_damage(const SimOutcome& outcome) {
  double sum = 0.0;
  for (const auto& b : outcome.per_block) sum += b.damage + 1.0;
  return sum;
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

}  // namespace

RepairOutcome repair_level(const Level& level, const RepairOptions& options) {
  RepairOutcome out;
  out.repaired = level;
  RepairRecord& rec = out.record;
  rec.level_id = level.id;
  rec.metric = options.metric;
  rec.detector = options.detector;
  rec.repaired_level_path = level.id + ".xml";

  SimOutcome before;
  try {
    before = simulate(level, options.sim);
  } catch (const Error& e) {
    rec.evaluated = false;
    rec.error = std::string(to_string(e.code())) + ": " + e.what();
    return out;
  }
  rec.initially_stable = classify(before, options.metric);
  rec.damage_before = sustained_damage(before);
  rec.destroyed_before = before.destroyed_count;
  if (rec.initially_stable) return out;

  rec.repair_attempted = true;
  rec.finally_stable = false;
  try {
    const GridSpec spec = fit_grid(level, options.grid);
    const OccupancyGrid occ = encode(level, spec);
    DetectionResult det;
    switch (options.detector) {
      case DetectorKind::geometric:
        det = detect_geometric(occ, level, options.geometric);
        break;
      case DetectorKind::oracle: {
        OracleOptions o;
        o.sim = options.sim;
        o.decode = options.decode;
        o.material = options.material;
        o.grid = options.grid;
        o.threads = 1;
        det = detect_oracle(level, options.metric, o);
        break;
      }
      case DetectorKind::external_mask: {
        const auto path = options.mask_dir / (level.id + ".pgm");
        if (!std::filesystem::exists(path)) {
          throw Error(Errc::unpaired_files, "no mask " + path.string() + " for level '" + level.id + "'");
        }
        det = load_external_mask(path, occ);
        break;
      }
    }
    rec.mask_cells = det.mask.count();
    rec.dropped_mask_cells = det.dropped_cells;
    rec.mask_nonempty = rec.mask_cells > 0;

    const auto blocks = decode_mask(det.mask, occ, level, options.material, options.decode);
    rec.blocks_added = static_cast<int>(blocks.size());
    out.repaired = insert_blocks(level, blocks);
    const SimOutcome after = blocks.empty() ? before : simulate(out.repaired, options.sim);
    rec.finally_stable = classify(after, options.metric);
    rec.damage_after = sustained_damage(after);
    rec.destroyed_after = after.destroyed_count;
  } catch (const Error& e) {
    rec.error = std::string(to_string(e.code())) + ": " + e.what();
    out.repaired = level;
  }
  return out;
}

std::int64_t scaled_ratio(std::int64_t num, std::int64_t den, std::int64_t scale) {
  const std::int64_t n = 2 * scale * num + den;
  const std::int64_t d = 2 * den;
  std::int64_t q = n / d;
  if ((n % d != 0) && ((n < 0) != (d < 0))) --q;
  return q;
}

double round_half_up(double value, int digits) {
  const double scale = std::pow(10.0, digits);
  // The epsilon absorbs representation error in values like 0.25 * 10.
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

std::optional<double> reduction_pct(double before, double after) {
  if (before == 0.0) return std::nullopt;
  return round_half_up((before - after) / before * 100.0, 1);
}

MitigationStats mitigation_stats(std::span<const RepairRecord> records) {
  MitigationStats s;
  double dmg_b = 0, dmg_a = 0, des_b = 0, des_a = 0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (!r.repair_attempted || r.finally_stable.value_or(false)) continue;
    if (!r.damage_after || !r.destroyed_after) continue;
    dmg_b += r.damage_before;
    dmg_a += *r.damage_after;
    des_b += r.destroyed_before;
    des_a += *r.destroyed_after;
    ++n;
  }
  if (n == 0) return s;
  const double dn = static_cast<double>(n);
  s.avg_damage_before = dmg_b / dn;
  s.avg_damage_after = dmg_a / dn;
  s.avg_destroyed_before = des_b / dn;
  s.avg_destroyed_after = des_a / dn;
  s.damage_reduction_pct = reduction_pct(*s.avg_damage_before, *s.avg_damage_after);
  s.destroyed_reduction_pct = reduction_pct(*s.avg_destroyed_before, *s.avg_destroyed_after);
  return s;
}

std::string RepairReport::repair_rate_text() const {
  if (!repair_rate_tenths) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%lld%%", static_cast<long long>(*repair_rate_tenths / 10),
                static_cast<long long>(*repair_rate_tenths % 10));
  return buf;
}

std::string RepairReport::growth_text() const {
  if (!growth_hundredths) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(*growth_hundredths / 100),
                static_cast<long long>(*growth_hundredths % 100));
  return buf;
}

RepairReport aggregate(std::vector<RepairRecord> records, Metric metric) {
  std::stable_sort(records.begin(), records.end(),
                   [](const RepairRecord& a, const RepairRecord& b) { return a.level_id < b.level_id; });
  RepairReport r;
  r.metric = metric;
  std::int64_t no_gap = 0;
  for (const auto& rec : records) {
    ++r.levels;
    if (!rec.evaluated) {
      ++r.skipped;
      continue;
    }
    if (rec.initially_stable) {
      ++r.initial_stable;
      continue;
    }
    ++r.initial_unstable;
    if (rec.finally_stable.value_or(false)) ++r.stabilized;
    if (rec.repair_attempted && !rec.mask_nonempty) ++no_gap;
  }
  r.final_stable = r.initial_stable + r.stabilized;
  if (r.initial_unstable > 0) {
    r.repair_rate = static_cast<double>(r.stabilized) / static_cast<double>(r.initial_unstable);
    r.repair_rate_tenths = scaled_ratio(r.stabilized, r.initial_unstable, 1000);
    r.no_gap_found_fraction = static_cast<double>(no_gap) / static_cast<double>(r.initial_unstable);
  }
  if (r.initial_stable > 0) {
    r.growth_factor = static_cast<double>(r.final_stable) / static_cast<double>(r.initial_stable);
    r.growth_hundredths = scaled_ratio(r.final_stable, r.initial_stable, 100);
  } else if (r.stabilized == 0) {
    r.growth_factor = 1.0;
    r.growth_hundredths = 100;
  }
  r.mitigation = mitigation_stats(records);
  return r;
}

json to_json(const RepairRecord& r) {
  return {{"level_id", r.level_id},
          {"metric", std::string(to_string(r.metric))},
          {"detector", std::string(to_string(r.detector))},
          {"evaluated", r.evaluated},
          {"initially_stable", r.initially_stable},
          {"repair_attempted", r.repair_attempted},
          {"mask_nonempty", r.mask_nonempty},
          {"mask_cells", r.mask_cells},
          {"dropped_mask_cells", r.dropped_mask_cells},
          {"blocks_added", r.blocks_added},
          {"finally_stable", opt(r.finally_stable)},
          {"repaired_level_path", r.repaired_level_path},
          {"damage_before", r.damage_before},
          {"damage_after", opt(r.damage_after)},
          {"destroyed_before", r.destroyed_before},
          {"destroyed_after", opt(r.destroyed_after)},
          {"error", r.error}};
}

RepairRecord record_from_json(const json& j) {
  RepairRecord r;
  r.level_id = j.at("level_id").get<std::string>();
  if (auto m = metric_from_name(j.at("metric").get<std::string>())) r.metric = *m;
  if (auto d = detector_from_name(j.at("detector").get<std::string>())) r.detector = *d;
  r.evaluated = j.value("evaluated", true);
  r.initially_stable = j.at("initially_stable").get<bool>();
  r.repair_attempted = j.value("repair_attempted", !r.initially_stable);
  r.mask_nonempty = j.value("mask_nonempty", false);
  r.mask_cells = j.value("mask_cells", std::size_t{0});
  r.dropped_mask_cells = j.value("dropped_mask_cells", std::size_t{0});
  r.blocks_added = j.value("blocks_added", 0);
  r.finally_stable = get_opt<bool>(j, "finally_stable");
  r.repaired_level_path = j.value("repaired_level_path", std::string{});
  r.damage_before = j.value("damage_before", 0.0);
  r.damage_after = get_opt<double>(j, "damage_after");
  r.destroyed_before = j.value("destroyed_before", 0);
  r.destroyed_after = get_opt<int>(j, "destroyed_after");
  r.error = j.value("error", std::string{});
  return r;
}

json to_json(const RepairReport& r) {
  const auto& m = r.mitigation;
  return {{"metric", std::string(to_string(r.metric))},
          {"levels", r.levels},
          {"skipped", r.skipped},
          {"initial_unstable", r.initial_unstable},
          {"stabilized", r.stabilized},
          {"repair_rate", opt(r.repair_rate)},
          {"repair_rate_pct", r.repair_rate_tenths ? json(r.repair_rate_text()) : json(nullptr)},
          {"initial_stable", r.initial_stable},
          {"final_stable", r.final_stable},
          {"growth_factor", opt(r.growth_factor)},
          {"growth_factor_rounded", r.growth_hundredths ? json(r.growth_text()) : json(nullptr)},
          {"no_gap_found_fraction", opt(r.no_gap_found_fraction)},
          {"failed_avg_damage_before", opt(m.avg_damage_before)},
          {"failed_avg_damage_after", opt(m.avg_damage_after)},
          {"failed_damage_reduction_pct", opt(m.damage_reduction_pct)},
          {"failed_avg_destroyed_before", opt(m.avg_destroyed_before)},
          {"failed_avg_destroyed_after", opt(m.avg_destroyed_after)},
          {"failed_destroyed_reduction_pct", opt(m.destroyed_reduction_pct)}};
}

std::vector<RepairRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  std::vector<RepairRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(record_from_json(json::parse(line)));
  }
  return out;
}

BatchResult repair_batch(std::span<const Level> levels, const RepairOptions& options,
                         const std::filesystem::path& out_dir) {
  BatchResult result;
  result.outcomes.resize(levels.size());
  parallel_for(levels.size(), worker_count(options.threads),
               [&](std::size_t i) { result.outcomes[i] = repair_level(levels[i], options); });

  std::vector<RepairRecord> records;
  records.reserve(levels.size());
  for (const auto& o : result.outcomes) records.push_back(o.record);
  std::stable_sort(records.begin(), records.end(),
                   [](const RepairRecord& a, const RepairRecord& b) { return a.level_id < b.level_id; });
  result.report = aggregate(records, options.metric);

  if (!out_dir.empty()) {
    try {
      std::filesystem::create_directories(out_dir);
    } catch (const std::filesystem::filesystem_error& e) {
      throw Error(Errc::io_error, e.what());
    }
    for (const auto& o : result.outcomes) {
      if (!o.record.evaluated) continue;
      save_level(out_dir / o.record.repaired_level_path, o.repaired);
    }
    std::string lines;
    for (const auto& r : records) lines += to_json(r).dump() + "\n";
    write_text(out_dir / "records.jsonl", lines);
    write_text(out_dir / "report.json", to_json(result.report).dump(2) + "\n");
  }
  return result;
}

}  // namespace stackrepair
