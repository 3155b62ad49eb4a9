#include "ghostsweep/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <regex>
#include <tuple>

#include <fmt/format.h>
#include <omp.h>

#include "ghostsweep/evaluation.hpp"
#include "ghostsweep/log.hpp"
#include "ghostsweep/pipeline.hpp"

namespace fs = std::filesystem;

namespace ghostsweep {
namespace {

std::regex wildcard_regex(const std::string& pattern) {
  std::string re;
  for (char c : pattern) {
    switch (c) {
      case '*': re += ".*"; break;
      case '?': re += '.'; break;
      case '.': case '+': case '(': case ')': case '[': case ']': case '{': case '}': case '^': case '$':
      case '|': case '\\':
        re += '\\';
        re += c;
        break;
      default: re += c;
    }
  }
  return std::regex(re);
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw Error(what + " not found: " + p.string());
}

/// Refuses to clobber existing outputs unless overwriting was requested.
void prepare_outputs(const fs::path& dir, const std::vector<fs::path>& outputs, bool overwrite) {
  if (dir.empty()) throw Error("no output directory given");
  if (fs::exists(dir) && !fs::is_directory(dir)) throw Error("output path is not a directory: " + dir.string());
  if (!overwrite) {
    for (const fs::path& p : outputs) {
      if (fs::exists(p)) throw Error("refusing to overwrite " + p.string() + " (pass --overwrite)");
    }
  }
  fs::create_directories(dir);
}

std::ofstream open_text(const fs::path& p) {
  std::ofstream f(p, std::ios::trunc);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

void dump_mask(const DynamicMask& mask, const GridConfig& cfg, const fs::path& path) {
  std::vector<std::uint64_t> words(cfg.cell_count(), 0);
  for (const CellWord& cw : mask.cells) words[cw.cell] = cw.word;
  std::ofstream f = open_text(path);
  dump_words_csv(words, {}, cfg, f);
}

nlohmann::json stats_json(const ScanStats& s, const fs::path& file) {
  return {{"scan", s.sequence_id},
          {"file", file.filename().string()},
          {"scan_points", s.scan_points},
          {"footprint_cells", s.footprint_cells},
          {"raw_bits", s.raw_bits},
          {"restored_bits", s.restored_bits},
          {"confirmed_bits", s.confirmed_bits},
          {"csel_cells", s.csel_cells},
          {"fine_flags", s.fine_flags},
          {"flagged_points_total", s.flagged_points_total},
          {"max_slope", std::isfinite(s.max_slope) ? nlohmann::json(s.max_slope) : nlohmann::json(nullptr)},
          {"elapsed_ms", s.elapsed_ms},
          {"restore",
           {{"cached_dynamic", s.restore.cached_dynamic},
            {"cached_protected", s.restore.cached_protected},
            {"height_protected", s.restore.height_protected},
            {"range_protected", s.restore.range_protected},
            {"rvrc_blocked", s.restore.rvrc_blocked},
            {"rvrc_clear", s.restore.rvrc_clear}}}};
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  std::ofstream f = open_text(p);
  f << j.dump(2) << '\n';
}

int run_guarded(std::ostream& err, const char* name, const auto& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << name << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

std::vector<fs::path> list_scans(const fs::path& spec) {
  std::vector<fs::path> files;
  const std::string name = spec.filename().string();
  if (fs::is_directory(spec)) {
    for (const auto& e : fs::directory_iterator(spec)) {
      if (e.is_regular_file() && e.path().extension() == ".pcd") files.push_back(e.path());
    }
  } else if (name.find_first_of("*?") != std::string::npos) {
    const fs::path dir = spec.has_parent_path() ? spec.parent_path() : fs::path(".");
    if (!fs::is_directory(dir)) throw Error("scan directory not found: " + dir.string());
    const std::regex re = wildcard_regex(name);
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && std::regex_match(e.path().filename().string(), re)) files.push_back(e.path());
    }
  } else if (fs::is_regular_file(spec)) {
    files.push_back(spec);
  } else {
    throw Error("scans not found: " + spec.string());
  }
  if (files.empty()) throw Error("no scan files match " + spec.string());
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_clean(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_guarded(err, "clean", [&] {
    // Validate every input before any work starts.
    require_file(cfg.map, "map file");
    const std::vector<fs::path> scan_files = list_scans(cfg.scans);
    std::vector<Eigen::Isometry3d> poses;
    if (cfg.pose_source == PoseSource::PoseFile && !cfg.poses) throw Error("pose source is pose_file but no --poses given");
    if (cfg.poses) {
      require_file(*cfg.poses, "pose file");
      poses = read_pose_file(*cfg.poses);
      if (poses.size() < scan_files.size()) {
        throw Error(fmt::format("pose file {} has {} poses for {} scans", cfg.poses->string(), poses.size(),
                                scan_files.size()));
      }
    }
    if (cfg.threads < 0) throw Error("--threads must be >= 0");
    const PcdHeader map_header = read_pcd_header(cfg.map);
    std::optional<std::string> label_field = cfg.eval_labels;
    if (!label_field && map_header.find("label")) label_field = "label";
    if (label_field && !map_header.find(*label_field)) {
      throw Error(cfg.map.string() + ": label field '" + *label_field + "' not present");
    }

    const fs::path static_path = cfg.out / "static.pcd";
    const fs::path dynamic_path = cfg.out / "dynamic.pcd";
    const fs::path log_path = cfg.out / "run_log.jsonl";
    const fs::path report_path = cfg.out / "report.json";
    const fs::path debug_dir = cfg.out / "debug";
    std::vector<fs::path> outputs{static_path, dynamic_path, log_path, report_path};
    if (cfg.dump_grids) outputs.push_back(debug_dir);
    prepare_outputs(cfg.out, outputs, cfg.overwrite);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    ReadOptions read_opts;
    read_opts.label_field = label_field;
    read_opts.dynamic_labels = DynamicLabelSet::parse(cfg.dynamic_labels);
    if (map_header.find("index")) read_opts.index_field = "index";
    const LabeledCloud map = read_cloud(cfg.map, read_opts);
    if (map.empty()) throw Error(cfg.map.string() + ": map has no finite points");

    Pipeline pipeline(map, cfg.grid, cfg.pipeline);
    const GridConfig& grid = pipeline.config();
    if (cfg.dump_grids) {
      fs::create_directories(debug_dir);
      std::ofstream words = open_text(debug_dir / "map_words.csv");
      dump_words_csv(pipeline.map_matrix().words(), pipeline.map_matrix().point_counts(), grid, words);
      std::ofstream ground = open_text(debug_dir / "ground.csv");
      dump_ground_csv(pipeline.ground(), grid, ground);
    }

    std::ofstream run_log = open_text(log_path);
    for (std::size_t n = 0; n < scan_files.size(); ++n) {
      const auto seq = static_cast<std::int64_t>(n);
      ScanFrame scan;
      if (cfg.poses) {
        scan = read_scan(scan_files[n], poses[n], cfg.scans_global, seq);
      } else {
        ScanReadOptions so;
        so.already_global = cfg.scans_global;
        so.sequence_id = seq;
        scan = read_scan(scan_files[n], so);
      }
      const ScanDetection det = pipeline.process(scan);
      run_log << stats_json(det.stats, scan_files[n]).dump() << '\n';
      if (cfg.dump_grids) {
        dump_mask(det.raw, grid, debug_dir / fmt::format("scan_{:06d}_raw.csv", n));
        dump_mask(det.protected_bits, grid, debug_dir / fmt::format("scan_{:06d}_protected.csv", n));
        dump_mask(det.confirmed, grid, debug_dir / fmt::format("scan_{:06d}_dynamic.csv", n));
      }
      log().info("scan {}/{} {}: {} raw, {} confirmed, {} flagged so far", n + 1, scan_files.size(),
                 scan_files[n].filename().string(), det.stats.raw_bits, det.stats.confirmed_bits,
                 det.stats.flagged_points_total);
    }

    const Partition part = pipeline.finalize();
    if (part.static_cloud.size() + part.dynamic_cloud.size() != map.size()) {
      throw Error("partition does not cover the map");
    }
    WriteOptions wo;
    wo.format = cfg.format;
    wo.allow_empty = true;
    wo.write_labels = map.has_labels();
    write_points(part.static_cloud.points, static_path, wo);
    write_points(part.dynamic_cloud.points, dynamic_path, wo);

    const TimingStats runtime = timing(pipeline.scan_seconds());
    nlohmann::json summary{{"summary",
                            {{"map_points", map.size()},
                             {"dropped_points", map.dropped},
                             {"scans", scan_files.size()},
                             {"static_points", part.static_cloud.size()},
                             {"dynamic_points", part.dynamic_cloud.size()},
                             {"runtime_s", {{"mean", runtime.mean}, {"std", runtime.stddev}}},
                             {"grid",
                              {{"n1", grid.n1},
                               {"n2", grid.n2},
                               {"res_g", grid.res_g},
                               {"res_h", grid.res_h},
                               {"n_bit", grid.n_bit},
                               {"origin", {grid.origin_x, grid.origin_y}}}},
                             {"cache", cfg.pipeline.use_cache}}}};
    run_log << summary.dump() << '\n';
    if (!run_log) throw Error("cannot write " + log_path.string());

    out << fmt::format("{} map points: {} static, {} dynamic over {} scans ({} s/scan)\n", map.size(),
                       part.static_cloud.size(), part.dynamic_cloud.size(), scan_files.size(), runtime.format());
    if (map.has_labels()) {
      EvalReport report = score(pipeline.retained_indices(), map);
      report.runtime = runtime;
      write_json(report_path, to_json(report));
      out << format_table(report, "ghostsweep");
    }
    return 0;
  });
}

int cmd_eval(const EvalConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_guarded(err, "eval", [&] {
    require_file(cfg.static_pcd, "static cloud");
    require_file(cfg.gt_map, "ground-truth map");
    if (!(cfg.tolerance >= 0.0)) throw Error("tolerance must be >= 0");
    const fs::path report_path =
        cfg.report ? *cfg.report : cfg.static_pcd.parent_path() / "eval_report.json";
    if (!cfg.overwrite && fs::exists(report_path)) {
      throw Error("refusing to overwrite " + report_path.string() + " (pass --overwrite)");
    }

    const PcdHeader gt_header = read_pcd_header(cfg.gt_map);
    if (!gt_header.find(cfg.label_field)) {
      throw Error(cfg.gt_map.string() + ": label field '" + cfg.label_field + "' not present");
    }
    ReadOptions gt_opts;
    gt_opts.label_field = cfg.label_field;
    gt_opts.dynamic_labels = DynamicLabelSet::parse(cfg.dynamic_labels);
    if (gt_header.find("index")) gt_opts.index_field = "index";
    const LabeledCloud gt = read_cloud(cfg.gt_map, gt_opts);

    ReadOptions st_opts;
    const PcdHeader st_header = read_pcd_header(cfg.static_pcd);
    if (cfg.match == MatchMode::Index) {
      if (!st_header.find("index")) throw Error(cfg.static_pcd.string() + ": no index field for index matching");
      st_opts.index_field = "index";
    }
    const LabeledCloud result = read_cloud(cfg.static_pcd, st_opts);

    std::vector<PointIndex> retained;
    retained.reserve(result.size());
    std::size_t unmatched = 0;
    if (cfg.match == MatchMode::Index) {
      std::vector<PointIndex> known;
      known.reserve(gt.size());
      for (const Point& p : gt.points) known.push_back(p.index);
      std::sort(known.begin(), known.end());
      for (const Point& p : result.points) {
        if (std::binary_search(known.begin(), known.end(), p.index)) {
          retained.push_back(p.index);
        } else {
          ++unmatched;
        }
      }
    } else {
      // Hash GT points on a lattice of pitch max(tolerance, tiny) and search the 27 neighbours.
      const double pitch = std::max(cfg.tolerance, 1e-6);
      using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
      auto key = [&](double x, double y, double z) {
        return Key{static_cast<std::int64_t>(std::floor(x / pitch)), static_cast<std::int64_t>(std::floor(y / pitch)),
                   static_cast<std::int64_t>(std::floor(z / pitch))};
      };
      std::map<Key, std::vector<std::size_t>> buckets;
      for (std::size_t n = 0; n < gt.size(); ++n) buckets[key(gt.points[n].x, gt.points[n].y, gt.points[n].z)].push_back(n);
      std::vector<std::uint8_t> used(gt.size(), 0);
      for (const Point& p : result.points) {
        const auto [kx, ky, kz] = key(p.x, p.y, p.z);
        std::optional<std::size_t> hit;
        for (std::int64_t dx = -1; dx <= 1 && !hit; ++dx) {
          for (std::int64_t dy = -1; dy <= 1 && !hit; ++dy) {
            for (std::int64_t dz = -1; dz <= 1 && !hit; ++dz) {
              const auto it = buckets.find({kx + dx, ky + dy, kz + dz});
              if (it == buckets.end()) continue;
              for (std::size_t n : it->second) {
                const Point& g = gt.points[n];
                if (!used[n] && std::abs(g.x - p.x) <= cfg.tolerance && std::abs(g.y - p.y) <= cfg.tolerance &&
                    std::abs(g.z - p.z) <= cfg.tolerance) {
                  hit = n;
                  break;
                }
              }
            }
          }
        }
        if (hit) {
          used[*hit] = 1;
          retained.push_back(gt.points[*hit].index);
        } else {
          ++unmatched;
        }
      }
    }
    if (unmatched > 0) {
      throw Error(fmt::format("{} of {} static points have no match in {}", unmatched, result.size(),
                              cfg.gt_map.string()));
    }

    const EvalReport report = score(retained, gt);
    out << format_table(report, "ghostsweep");
    if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
    write_json(report_path, to_json(report));
    return 0;
  });
}

int cmd_synth(const SynthConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_guarded(err, "synth", [&] {
    cfg.spec.validate();
    const fs::path map_path = cfg.out / "map.pcd";
    const fs::path scan_dir = cfg.out / "scans";
    const fs::path pose_path = cfg.out / "poses.txt";
    const fs::path scene_path = cfg.out / "scene.json";
    prepare_outputs(cfg.out, {map_path, scan_dir, pose_path, scene_path}, cfg.overwrite);

    const SynthScene scene = synth_scene(cfg.spec, cfg.seed);
    if (fs::exists(scan_dir)) fs::remove_all(scan_dir);
    fs::create_directories(scan_dir);

    WriteOptions wo;
    wo.format = cfg.format;
    wo.write_labels = true;
    write_points(scene.map.points, map_path, wo);
    std::ofstream poses = open_text(pose_path);
    for (std::size_t n = 0; n < scene.local_scans.size(); ++n) {
      WriteOptions so = wo;
      so.viewpoint = scene.poses[n];
      so.allow_empty = true;
      write_points(scene.local_scans[n].points, scan_dir / fmt::format("{:06d}.pcd", n), so);
      const Eigen::Matrix<double, 3, 4> m = scene.poses[n].matrix().topRows<3>();
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) poses << fmt::format("{}{:.17g}", r + c == 0 ? "" : " ", m(r, c));
      }
      poses << '\n';
    }
    if (!poses) throw Error("cannot write " + pose_path.string());

    std::size_t dynamic = 0;
    for (const Point& p : scene.map.points) dynamic += p.label == Label::Dynamic ? 1 : 0;
    write_json(scene_path, {{"seed", cfg.seed},
                            {"spec", to_json(cfg.spec)},
                            {"map_points", scene.map.size()},
                            {"dynamic_points", dynamic},
                            {"box_visible_scans", scene.box_visible_scans}});
    out << fmt::format("wrote {} scans and a {}-point map ({} dynamic) to {}\n", scene.local_scans.size(),
                       scene.map.size(), dynamic, cfg.out.string());
    return 0;
  });
}

}  // namespace ghostsweep
