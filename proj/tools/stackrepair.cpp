// Command-line front end: validate, simulate, destabilize, detect, repair,
// report, render and synth.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "stackrepair/destabilizer.hpp"
#include "stackrepair/error.hpp"
#include "stackrepair/gap_detector.hpp"
#include "stackrepair/json_io.hpp"
#include "stackrepair/physics.hpp"
#include "stackrepair/render.hpp"
#include "stackrepair/repair.hpp"
#include "stackrepair/synthetic.hpp"

namespace fs = std::filesystem;
using namespace stackrepair;
using nlohmann::json;

namespace {

std::vector<Level> load_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::io_error, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".xml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Level> levels;
  levels.reserve(files.size());
  for (const auto& f : files) levels.push_back(load_level(f));
  return levels;
}

const std::map<std::string, Metric> kMetrics{
    {"velocity", Metric::velocity}, {"destruction", Metric::destruction}, {"damage", Metric::damage}};
const std::map<std::string, DetectorKind> kDetectors{{"geometric", DetectorKind::geometric},
                                                     {"oracle", DetectorKind::oracle},
                                                     {"external", DetectorKind::external_mask}};
const std::map<std::string, Material> kMaterials{
    {"wood", Material::wood}, {"ice", Material::ice}, {"stone", Material::stone}};

int cmd_validate(const std::vector<std::string>& files) {
  int bad = 0;
  for (const auto& f : files) {
    try {
      const Level level = load_level(f);
      check_loadable(level);
      std::cout << f << ": ok (" << level.blocks.size() << " blocks, " << level.pigs.size() << " pigs)\n";
    } catch (const Error& e) {
      ++bad;
      std::cout << f << ": " << to_string(e.code()) << ": " << e.what() << "\n";
    }
  }
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability evaluation and gap repair for Science Birds levels"};
  app.require_subcommand(1);

  std::vector<std::string> validate_files;
  auto* validate = app.add_subcommand("validate", "Parse levels and check load-time constraints");
  validate->add_option("files", validate_files, "Level XML files")->required()->check(CLI::ExistingFile);

  std::string sim_file;
  std::string sim_metric = "velocity";
  bool sim_json = false;
  auto* sim = app.add_subcommand("simulate", "Run the settle simulation and print the verdict");
  sim->add_option("file", sim_file, "Level XML file")->required()->check(CLI::ExistingFile);
  sim->add_option("--metric", sim_metric, "Metric for the exit code")
      ->check(CLI::IsMember(kMetrics));
  sim->add_flag("--json", sim_json, "Print per-block outcomes as JSON");

  std::string ds_in, ds_out;
  std::uint64_t ds_seed = 0;
  DestabilizeOptions ds_opts;
  std::string ds_metric = "velocity";
  auto* destab = app.add_subcommand("destabilize", "Build a gap-detection dataset from stable levels");
  destab->add_option("--in", ds_in, "Directory of level XML files")->required();
  destab->add_option("--out", ds_out, "Dataset output directory")->required();
  destab->add_option("--seed", ds_seed, "Run seed")->required();
  destab->add_option("--metric", ds_metric, "Stability metric")
      ->check(CLI::IsMember(kMetrics));
  destab->add_option("--max-attempts", ds_opts.max_attempts, "Removal trials per level")->capture_default_str();
  destab->add_option("--min-k", ds_opts.min_k, "Fewest blocks removed")->capture_default_str();
  destab->add_option("--max-k", ds_opts.max_k, "Most blocks removed")->capture_default_str();
  destab->add_option("--threads", ds_opts.threads, "Worker threads (0 = all cores)");

  std::string det_file, det_mask, det_out;
  std::string det_kind = "geometric";
  std::string det_metric = "velocity";
  GeometricOptions det_geo;
  auto* detect = app.add_subcommand("detect", "Produce a gap mask for an unstable level");
  detect->add_option("file", det_file, "Level XML file")->required()->check(CLI::ExistingFile);
  detect->add_option("--detector", det_kind, "geometric, oracle or external")
      ->check(CLI::IsMember(kDetectors));
  detect->add_option("--mask", det_mask, "Mask PGM for the external detector");
  detect->add_option("--metric", det_metric, "Metric for the oracle")
      ->check(CLI::IsMember(kMetrics));
  detect->add_option("--threshold", det_geo.confidence_threshold, "Geometric confidence threshold");
  detect->add_option("--out", det_out, "Where to write the mask PGM (default <level>.mask.pgm)");

  std::string rep_in, rep_out, rep_masks;
  RepairOptions rep_opts;
  std::string rep_metric = "velocity", rep_detector = "geometric", rep_material = "wood";
  auto* repair = app.add_subcommand("repair", "Evaluate, repair and re-evaluate a directory of levels");
  repair->add_option("--in", rep_in, "Directory of level XML files")->required();
  repair->add_option("--out", rep_out, "Output directory")->required();
  repair->add_option("--metric", rep_metric, "Stability metric")
      ->check(CLI::IsMember(kMetrics));
  repair->add_option("--detector", rep_detector, "geometric, oracle or external")
      ->check(CLI::IsMember(kDetectors));
  repair->add_option("--mask-dir", rep_masks, "Masks <id>.pgm for the external detector");
  repair->add_option("--material", rep_material, "Material of inserted blocks")
      ->check(CLI::IsMember(kMaterials));
  repair->add_option("--threads", rep_opts.threads, "Worker threads (0 = all cores)");

  std::string report_file;
  auto* report = app.add_subcommand("report", "Recompute report.json from records.jsonl");
  report->add_option("records", report_file, "records.jsonl")->required()->check(CLI::ExistingFile);

  std::string ren_file, ren_mask, ren_out, ren_after;
  RenderStyle ren_style;
  auto* render = app.add_subcommand("render", "Draw a level as PNG");
  render->add_option("file", ren_file, "Level XML file")->required()->check(CLI::ExistingFile);
  render->add_option("--mask", ren_mask, "Gap mask PGM to overlay")->check(CLI::ExistingFile);
  render->add_option("--out", ren_out, "Output PNG (default <level>.png)");
  render->add_option("--side-by-side", ren_after, "Second level drawn to the right (e.g. the repaired one)")
      ->check(CLI::ExistingFile);
  render->add_option("--scale", ren_style.pixels_per_unit, "Pixels per world unit")->capture_default_str();

  std::string syn_out;
  std::size_t syn_count = 20;
  std::uint64_t syn_seed = 1;
  auto* synth = app.add_subcommand("synth", "Write a corpus of stable procedural towers and tables");
  synth->add_option("--out", syn_out, "Output directory")->required();
  synth->add_option("--count", syn_count, "Number of levels")->capture_default_str();
  synth->add_option("--seed", syn_seed, "Generator seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(validate_files);

    if (*sim) {
      const SimOutcome out = simulate(load_level(sim_file));
      if (sim_json) {
        std::cout << to_json(out).dump(2) << "\n";
      } else {
        std::cout << "velocity: " << (out.stable_velocity ? "stable" : "unstable") << "\n"
                  << "destruction: " << (out.stable_destruction ? "stable" : "unstable") << "\n"
                  << "damage: " << (out.stable_damage ? "stable" : "unstable") << "\n"
                  << "total_damage: " << out.total_damage << "\n"
                  << "destroyed: " << out.destroyed_count << "\n";
      }
      return classify(out, kMetrics.at(sim_metric)) ? 0 : 2;
    }

    if (*destab) {
      ds_opts.metric = kMetrics.at(ds_metric);
      const auto levels = load_dir(ds_in);
      const auto m = build_dataset(levels, ds_seed, ds_out, ds_opts);
      std::cout << json{{"levels", m.levels_in},
                        {"stable", m.levels_stable},
                        {"pairs", m.records.size()},
                        {"train", m.train.size()},
                        {"val", m.val.size()},
                        {"skipped", m.skipped}}
                       .dump(2)
                << "\n";
      return 0;
    }

    if (*detect) {
      const Level level = load_level(det_file);
      const GridSpec spec = fit_grid(level);
      const OccupancyGrid occ = encode(level, spec);
      DetectionResult res;
      switch (kDetectors.at(det_kind)) {
        case DetectorKind::geometric: res = detect_geometric(occ, level, det_geo); break;
        case DetectorKind::oracle: res = detect_oracle(level, kMetrics.at(det_metric)); break;
        case DetectorKind::external_mask:
          if (det_mask.empty()) throw CLI::ValidationError("--mask", "required for the external detector");
          res = load_external_mask(det_mask, occ);
          break;
      }
      fs::path out = det_out.empty() ? fs::path(det_file).replace_extension(".mask.pgm") : fs::path(det_out);
      write_grid(out, res.mask);
      json summary{{"level_id", level.id},
                   {"detector", std::string(to_string(res.detector))},
                   {"mask", out.string()},
                   {"mask_cells", res.mask.count()},
                   {"components", res.confidence.size()},
                   {"confidence", res.confidence},
                   {"grid", to_json(spec)}};
      if (res.detector == DetectorKind::external_mask) {
        summary["input_cells"] = res.input_cells;
        summary["dropped_cells"] = res.dropped_cells;
        summary["drop_rate"] = res.drop_rate();
      }
      if (res.oracle_block) summary["oracle_block"] = to_json(*res.oracle_block);
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (*repair) {
      rep_opts.metric = kMetrics.at(rep_metric);
      rep_opts.detector = kDetectors.at(rep_detector);
      rep_opts.material = kMaterials.at(rep_material);
      if (rep_opts.detector == DetectorKind::external_mask && rep_masks.empty()) {
        throw CLI::ValidationError("--mask-dir", "required for the external detector");
      }
      rep_opts.mask_dir = rep_masks;
      const auto levels = load_dir(rep_in);
      const auto result = repair_batch(levels, rep_opts, rep_out);
      std::cout << to_json(result.report).dump(2) << "\n";
      return 0;
    }

    if (*report) {
      const auto records = read_records(report_file);
      const Metric metric = records.empty() ? Metric::velocity : records.front().metric;
      std::cout << to_json(aggregate(records, metric)).dump(2) << "\n";
      return 0;
    }

    if (*render) {
      const Level level = load_level(ren_file);
      const GridSpec spec = fit_grid(level);
      std::optional<GapMask> mask;
      if (!ren_mask.empty()) mask = read_grid<GapTag>(ren_mask, spec);
      Image img = render_level(level, spec, ren_style, mask ? &*mask : nullptr);
      if (!ren_after.empty()) img = side_by_side(img, render_level(load_level(ren_after), spec, ren_style));
      const fs::path out = ren_out.empty() ? fs::path(ren_file).replace_extension(".png") : fs::path(ren_out);
      write_png(out, img);
      std::cout << out.string() << " (" << img.width << "x" << img.height << ")\n";
      return 0;
    }

    if (*synth) {
      fs::create_directories(syn_out);
      for (const auto& level : stable_corpus(syn_count, syn_seed)) {
        save_level(fs::path(syn_out) / (level.id + ".xml"), level);
      }
      std::cout << "wrote " << syn_count << " levels to " << syn_out << "\n";
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
