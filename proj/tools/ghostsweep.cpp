#include <fstream>
#include <iostream>
#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ghostsweep/commands.hpp"
#include "ghostsweep/log.hpp"

using namespace ghostsweep;

namespace {

template <typename T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

const std::map<std::string, PcdFormat> kFormats{{"binary", PcdFormat::Binary}, {"ascii", PcdFormat::Ascii}};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Replaces "--config FILE" by the file's "key = value" lines as flags placed before the other
// arguments; options keep their last value, so the command line wins over the file.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::vector<std::string> rest;
  std::optional<std::string> file;
  for (std::size_t n = 1; n < args.size(); ++n) {
    if (args[n] == "--config" && n + 1 < args.size()) {
      file = args[++n];
    } else if (args[n].rfind("--config=", 0) == 0) {
      file = args[n].substr(9);
    } else {
      rest.push_back(args[n]);
    }
  }
  if (!file) return args;
  std::ifstream in(*file);
  if (!in) throw Error("config file not found: " + *file);
  std::vector<std::string> from_file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(*file + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (value == "true") {
      from_file.push_back("--" + key);
    } else if (value != "false") {
      from_file.push_back("--" + key);
      from_file.push_back(value);
    }
  }
  // File values go right after the subcommand name so they belong to it.
  std::vector<std::string> out{args[0]};
  auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return a.rfind("-", 0) != 0; });
  out.insert(out.end(), rest.begin(), sub == rest.end() ? sub : sub + 1);
  out.insert(out.end(), from_file.begin(), from_file.end());
  if (sub != rest.end()) out.insert(out.end(), sub + 1, rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  log();
  CLI::App app{"Remove dynamic points from a LiDAR point cloud map using binary-encoded occupancy matrices"};
  app.require_subcommand(1);

  RunConfig run;
  std::string pose_source = "viewpoint";
  bool no_cache = false;
  auto* clean = app.add_subcommand("clean", "Remove dynamic points from a map given its scans");
  clean->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_file;
  clean->add_option("--config", config_file, "Flat key = value file of long option names; command-line flags take precedence");
  clean->add_option("--map", run.map, "Global map PCD")->required();
  clean->add_option("--scans", run.scans, "Scan directory, file or wildcard pattern (sorted by name)")->required();
  clean->add_option("--poses", run.poses, "Pose file, one row-major 3x4 matrix per scan");
  clean->add_option("--pose-source", pose_source, "Where scan poses come from")
      ->check(CLI::IsMember({"viewpoint", "pose_file"}));
  clean->add_flag("--scans-global", run.scans_global, "Scan points are already in the map frame");
  optional_flag(clean, "--res-g", run.grid.res_g, "Cell size in x/y [m] (default 1.0)");
  optional_flag(clean, "--res-h", run.grid.res_h, "Vertical bin height [m] (default 0.5)");
  optional_flag(clean, "--nbit", run.grid.n_bit, "Vertical bins per cell, 1..64 (default 64)");
  optional_flag(clean, "--ground-ratio", run.grid.ground_ratio, "Ground points number ratio (default 0.7)");
  optional_flag(clean, "--fine-factor", run.grid.fine_factor, "Sub-bins per ground bin (default 8)");
  optional_flag(clean, "--mad-radius", run.grid.mad_window_radius, "Ground window radius in cells (default ceil(5/res_g))");
  optional_flag(clean, "--min-range", run.grid.min_range, "Closest trusted range [m] (default 0.5)");
  optional_flag(clean, "--max-range", run.grid.max_range, "Farthest trusted range [m] (default 80)");
  clean->add_flag("--no-cache", no_cache, "Decide every scan independently");
  clean->add_flag("!--no-ground-module", run.pipeline.ground_module, "Skip fine ground segmentation");
  clean->add_flag("!--no-restoration", run.pipeline.static_restoration, "Skip static restoration");
  clean->add_option("--eval-labels", run.eval_labels, "Map field with ground-truth labels (default: 'label' if present)");
  clean->add_option("--dynamic-labels", run.dynamic_labels, "Label values counted as dynamic, e.g. 251-259");
  clean->add_option("--out", run.out, "Output directory")->required();
  clean->add_flag("--overwrite", run.overwrite, "Replace existing outputs");
  clean->add_flag("--dump-grids", run.dump_grids, "Write per-cell CSV dumps to OUT/debug");
  clean->add_option("--format", run.format, "Output PCD encoding")->transform(CLI::CheckedTransformer(kFormats));
  clean->add_option("--threads", run.threads, "Worker threads (0 = OpenMP default)");

  EvalConfig ev;
  std::string match = "index";
  auto* eval = app.add_subcommand("eval", "Score a cleaned map against a labeled map");
  eval->add_option("--static", ev.static_pcd, "Cleaned (static) PCD")->required();
  eval->add_option("--gt", ev.gt_map, "Labeled map PCD")->required();
  eval->add_option("--eval-labels", ev.label_field, "Label field of the labeled map");
  eval->add_option("--dynamic-labels", ev.dynamic_labels, "Label values counted as dynamic");
  eval->add_option("--match", match, "Match points by index field or by coordinates")
      ->check(CLI::IsMember({"index", "coords"}));
  eval->add_option("--tolerance", ev.tolerance, "Per-axis tolerance for coordinate matching [m]");
  eval->add_option("--report", ev.report, "JSON report path");
  eval->add_flag("--overwrite", ev.overwrite, "Replace an existing report");

  SynthConfig sy;
  bool occluded = false;
  std::optional<std::string> spec_file;
  std::optional<double> box_speed;
  std::optional<int> scans;
  std::optional<double> noise;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene with ground-truth labels");
  synth->add_option("--out", sy.out, "Output directory")->required();
  synth->add_option("--seed", sy.seed, "Random seed");
  synth->add_option("--spec", spec_file, "JSON scene spec; missing keys keep defaults");
  synth->add_flag("--occluded", occluded, "Add a blocker that hides the moving box for half the drive");
  optional_flag(synth, "--box-speed", box_speed, "Box travel per scan [m]; 0 makes it static");
  optional_flag(synth, "--scans", scans, "Number of scans");
  optional_flag(synth, "--noise", noise, "Range noise sigma [m]");
  synth->add_flag("--overwrite", sy.overwrite, "Replace existing outputs");
  synth->add_option("--format", sy.format, "PCD encoding")->transform(CLI::CheckedTransformer(kFormats));

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  std::vector<char*> cargs;
  for (std::string& a : args) cargs.push_back(a.data());
  CLI11_PARSE(app, static_cast<int>(cargs.size()), cargs.data());

  if (*clean) {
    run.pose_source = pose_source == "pose_file" ? PoseSource::PoseFile : PoseSource::Viewpoint;
    run.pipeline.use_cache = !no_cache;
    return cmd_clean(run, std::cout, std::cerr);
  }
  if (*eval) {
    ev.match = match == "coords" ? MatchMode::Coordinates : MatchMode::Index;
    return cmd_eval(ev, std::cout, std::cerr);
  }
  try {
    if (spec_file) {
      std::ifstream f(*spec_file);
      if (!f) throw Error("spec file not found: " + *spec_file);
      sy.spec = synth_spec_from_json(nlohmann::json::parse(f));
    } else if (occluded) {
      sy.spec = SynthSpec::occluded();
    }
    if (spec_file && occluded) sy.spec.walls.push_back(SynthSpec::occluded().walls.back());
  } catch (const std::exception& e) {
    std::cerr << "synth: " << e.what() << '\n';
    return 1;
  }
  if (box_speed) sy.spec.box_speed = *box_speed;
  if (scans) sy.spec.scans = *scans;
  if (noise) sy.spec.noise_sigma = *noise;
  return cmd_synth(sy, std::cout, std::cerr);
}
