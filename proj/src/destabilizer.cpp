#include "stackrepair/destabilizer.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "stackrepair/error.hpp"
#include "stackrepair/json_io.hpp"
#include "stackrepair/parallel.hpp"
#include "stackrepair/rng.hpp"

namespace stackrepair {

using nlohmann::json;

std::vector<Level> filter_stable(std::span<const Level> levels, Metric metric, const SimConfig& sim,
                                 std::vector<std::string>* skipped, int threads) {
  // 0 = unstable, 1 = stable, 2 = rejected by the simulator
  std::vector<int> verdict(levels.size(), 0);
  parallel_for(levels.size(), worker_count(threads), [&](std::size_t i) {
    try {
      verdict[i] = is_stable(levels[i], metric, sim) ? 1 : 0;
    } catch (const Error& e) {
      if (e.code() != Errc::invalid_level) throw;
      verdict[i] = 2;
    }
  });
  std::vector<Level> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (verdict[i] == 1) out.push_back(levels[i]);
    if (verdict[i] == 2) {
      std::cerr << "warning: skipping level '" << levels[i].id << "': rejected by the simulator\n";
      if (skipped) skipped->push_back(levels[i].id);
    }
  }
  return out;
}

Level remove_blocks(const Level& level, std::span<const std::size_t> indices) {
  Level out = level;
  out.blocks.clear();
  std::size_t next = 0;
  for (std::size_t i = 0; i < level.blocks.size(); ++i) {
    if (next < indices.size() && indices[next] == i) {
      ++next;
      continue;
    }
    out.blocks.push_back(level.blocks[i]);
  }
  return out;
}

Level restore_blocks(const Level& modified, std::span<const Block> removed, std::span<const std::size_t> indices) {
  Level out = modified;
  out.blocks.clear();
  const std::size_t total = modified.blocks.size() + removed.size();
  std::size_t kept = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (next < indices.size() && indices[next] == i) {
      out.blocks.push_back(removed[next++]);
    } else {
      out.blocks.push_back(modified.blocks[kept++]);
    }
  }
  return out;
}

std::optional<TrainingPair> destabilize(const Level& level, std::uint64_t seed, const DestabilizeOptions& options) {
  if (!is_stable(level, options.metric, options.sim)) {
    throw Error(Errc::not_stable_input, "level '" + level.id + "' is not stable under the " +
                                           std::string(to_string(options.metric)) + " metric");
  }
  const std::size_t n = level.blocks.size();
  if (n == 0) return std::nullopt;
  const int max_k = std::min<int>(options.max_k, static_cast<int>(n));
  if (options.min_k > max_k) return std::nullopt;

  Rng rng(seed);
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    const int k = rng.between(options.min_k, max_k);
    auto indices = rng.sample(n, static_cast<std::size_t>(k));
    std::sort(indices.begin(), indices.end());
    Level modified = remove_blocks(level, indices);
    if (is_stable(modified, options.metric, options.sim)) continue;

    TrainingPair pair;
    pair.source_id = level.id;
    pair.removed_indices = indices;
    for (auto i : indices) pair.removed.push_back(level.blocks[i]);
    const GridSpec spec = fit_grid(modified, options.grid);
    pair.image = encode(modified, spec);
    pair.mask = footprint_mask(pair.removed, pair.image);
    pair.modified = std::move(modified);
    pair.metric_used = options.metric;
    pair.seed = seed;
    pair.attempts = attempt;
    return pair;
  }
  return std::nullopt;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_ids(std::vector<std::string> ids,
                                                                        std::uint64_t seed) {
  Rng rng(stream_seed(seed, ~std::uint64_t{0}));
  rng.shuffle(ids);
  const std::size_t n_train = ids.size() * 8 / 10;
  std::vector<std::string> train(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::string> val(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  return {std::move(train), std::move(val)};
}

namespace {

json record_to_json(const ManifestRecord& r, int max_attempts) {
  json removed = json::array();
  for (std::size_t i = 0; i < r.removed.size(); ++i) {
    json b = to_json(r.removed[i]);
    b["index"] = r.removed_indices[i];
    removed.push_back(std::move(b));
  }
  return {{"id", r.id},
          {"source_id", r.source_id},
          {"image", r.image},
          {"mask", r.mask},
          {"k", r.k},
          {"removed", removed},
          {"seed", r.seed},
          {"attempts", r.attempts},
          {"max_attempts", max_attempts},
          {"metric", std::string(to_string(r.metric))},
          {"grid", to_json(r.grid)}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

}  // namespace

DatasetManifest build_dataset(std::span<const Level> levels, std::uint64_t seed, const std::filesystem::path& out_dir,
                              const DestabilizeOptions& options) {
  DatasetManifest manifest;
  manifest.levels_in = levels.size();
  try {
    std::filesystem::create_directories(out_dir / "images");
    std::filesystem::create_directories(out_dir / "masks");
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(Errc::io_error, e.what());
  }

  // Stability is decided per input position so that seeds follow input order.
  std::vector<std::optional<TrainingPair>> pairs(levels.size());
  std::vector<int> state(levels.size(), 0);  // 0 unstable, 1 stable, 2 rejected
  parallel_for(levels.size(), worker_count(options.threads), [&](std::size_t i) {
    try {
      pairs[i] = destabilize(levels[i], stream_seed(seed, i), options);
      state[i] = 1;
    } catch (const Error& e) {
      if (e.code() == Errc::not_stable_input) return;
      if (e.code() != Errc::invalid_level) throw;
      state[i] = 2;
    }
  });

  std::set<std::string> used;
  std::string lines;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (state[i] == 2) {
      std::cerr << "warning: skipping level '" << levels[i].id << "': rejected by the simulator\n";
      manifest.skipped.push_back(levels[i].id);
      continue;
    }
    if (state[i] == 1) ++manifest.levels_stable;
    if (!pairs[i]) continue;
    const TrainingPair& p = *pairs[i];
    std::string id = p.source_id.empty() ? "level" : p.source_id;
    if (used.count(id)) id += "_" + std::to_string(i);
    used.insert(id);

    ManifestRecord r;
    r.id = id;
    r.source_id = p.source_id;
    r.image = "images/" + id + ".pgm";
    r.mask = "masks/" + id + ".pgm";
    r.k = static_cast<int>(p.removed.size());
    r.removed = p.removed;
    r.removed_indices = p.removed_indices;
    r.seed = p.seed;
    r.attempts = p.attempts;
    r.metric = p.metric_used;
    r.grid = p.image.spec();
    write_grid(out_dir / r.image, p.image);
    write_grid(out_dir / r.mask, p.mask);
    lines += record_to_json(r, options.max_attempts).dump() + "\n";
    manifest.records.push_back(std::move(r));
  }
  write_text(out_dir / "manifest.jsonl", lines);

  std::vector<std::string> ids;
  for (const auto& r : manifest.records) ids.push_back(r.id);
  std::tie(manifest.train, manifest.val) = split_ids(ids, seed);
  const json split = {{"seed", seed}, {"train", manifest.train}, {"val", manifest.val}};
  write_text(out_dir / "split.json", split.dump(2) + "\n");
  return manifest;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  std::vector<ManifestRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    ManifestRecord r;
    r.id = j.at("id").get<std::string>();
    r.source_id = j.at("source_id").get<std::string>();
    r.image = j.at("image").get<std::string>();
    r.mask = j.at("mask").get<std::string>();
    r.k = j.at("k").get<int>();
    for (const auto& b : j.at("removed")) {
      r.removed.push_back(block_from_json(b));
      r.removed_indices.push_back(b.at("index").get<std::size_t>());
    }
    r.seed = j.at("seed").get<std::uint64_t>();
    r.attempts = j.at("attempts").get<int>();
    const auto metric = metric_from_name(j.at("metric").get<std::string>());
    if (metric) r.metric = *metric;
    r.grid = grid_from_json(j.at("grid"));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace stackrepair
