#include <sstream>

#include <doctest.h>

#include "fixtures.hpp"
#include "ghostsweep/commands.hpp"
#include "ghostsweep/pcd_io.hpp"

using namespace ghostsweep;
using fixtures::TempDir;
namespace fs = std::filesystem;

namespace {

int synth_into(const fs::path& out, std::uint64_t seed = 7, SynthSpec spec = SynthSpec::defaults()) {
  SynthConfig cfg;
  cfg.spec = spec;
  cfg.seed = seed;
  cfg.out = out;
  std::ostringstream o, e;
  return cmd_synth(cfg, o, e);
}

RunConfig clean_config(const fs::path& scene, const fs::path& out) {
  RunConfig run;
  run.map = scene / "map.pcd";
  run.scans = scene / "scans";
  run.out = out;
  return run;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("same seed gives the same scene") {
  const SynthScene a = synth_scene(SynthSpec::defaults(), 3);
  const SynthScene b = synth_scene(SynthSpec::defaults(), 3);
  REQUIRE(a.map.size() == b.map.size());
  bool same = true;
  for (std::size_t n = 0; n < a.map.size(); ++n) {
    same &= a.map.points[n].x == b.map.points[n].x && a.map.points[n].z == b.map.points[n].z &&
            a.map.points[n].label == b.map.points[n].label;
  }
  CHECK(same);
}

TEST_CASE("default scene has a small dynamic fraction") {
  const SynthScene s = synth_scene(SynthSpec::defaults(), 1);
  std::size_t dynamic = 0;
  for (const auto& p : s.map.points) dynamic += p.label == Label::Dynamic;
  const double fraction = static_cast<double>(dynamic) / static_cast<double>(s.map.size());
  CHECK(fraction >= 0.01);
  CHECK(fraction <= 0.10);
  CHECK(s.local_scans.size() == 20);
  CHECK(s.poses.size() == 20);
}

TEST_CASE("a box that does not move is static") {
  SynthSpec spec = SynthSpec::defaults();
  spec.box_speed = 0.0;
  const SynthScene s = synth_scene(spec, 1);
  for (const auto& p : s.map.points) CHECK(p.label == Label::Static);
}

TEST_CASE("degenerate specs are rejected") {
  SynthSpec spec = SynthSpec::defaults();
  spec.scans = 0;
  CHECK_THROWS_AS(synth_scene(spec, 1), Error);
  spec = SynthSpec::defaults();
  spec.channels = 0;
  CHECK_THROWS_AS(synth_scene(spec, 1), Error);
  spec = SynthSpec::defaults();
  spec.noise_sigma = -1.0;
  CHECK_THROWS_AS(synth_scene(spec, 1), Error);
}

TEST_CASE("spec survives a JSON round trip") {
  const SynthSpec spec = SynthSpec::occluded();
  const SynthSpec back = synth_spec_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
  const SynthSpec partial = synth_spec_from_json(nlohmann::json{{"scans", 12}});
  CHECK(partial.scans == 12);
  CHECK(partial.azimuth_steps == SynthSpec::defaults().azimuth_steps);
}

}

TEST_SUITE("cli") {

TEST_CASE("synth output feeds clean unchanged and the partition holds") {
  TempDir dir("cli");
  REQUIRE(synth_into(dir / "scene") == 0);
  CHECK(fs::exists(dir / "scene" / "poses.txt"));
  CHECK(fs::exists(dir / "scene" / "scene.json"));

  RunConfig run = clean_config(dir / "scene", dir / "out");
  run.dump_grids = true;
  std::ostringstream out, err;
  REQUIRE_MESSAGE(cmd_clean(run, out, err) == 0, err.str());
  for (const char* f : {"static.pcd", "dynamic.pcd", "run_log.jsonl", "report.json"}) CHECK(fs::exists(dir / "out" / f));
  CHECK(fs::exists(dir / "out" / "debug" / "map_words.csv"));
  CHECK(out.str().find("HA ↑") != std::string::npos);

  const LabeledCloud map = read_cloud(dir / "scene" / "map.pcd");
  ReadOptions idx;
  idx.index_field = "index";
  const LabeledCloud st = read_cloud(dir / "out" / "static.pcd", idx);
  const LabeledCloud dy = read_cloud(dir / "out" / "dynamic.pcd", idx);
  CHECK(st.size() + dy.size() == map.size());

  std::ifstream log(dir / "out" / "run_log.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    if (!j.contains("summary")) {
      for (const char* key : {"raw_bits", "restored_bits", "fine_flags", "flagged_points_total", "elapsed_ms"}) {
        CHECK(j.contains(key));
      }
    }
    ++lines;
  }
  CHECK(lines == 21);

  // A second run without --overwrite refuses.
  std::ostringstream out2, err2;
  CHECK(cmd_clean(run, out2, err2) != 0);
  CHECK(err2.str().find("overwrite") != std::string::npos);
  run.overwrite = true;
  CHECK(cmd_clean(run, out2, err2) == 0);

  // Evaluating the perfect static set gives SA 100.
  LabeledCloud perfect;
  for (const auto& p : read_cloud(dir / "scene" / "map.pcd", ReadOptions{"label", {}, {}}).points) {
    if (p.label == Label::Static) perfect.points.push_back(p);
  }
  write_cloud(perfect, dir / "perfect.pcd");
  EvalConfig ev;
  ev.static_pcd = dir / "perfect.pcd";
  ev.gt_map = dir / "scene" / "map.pcd";
  std::ostringstream eo, ee;
  REQUIRE_MESSAGE(cmd_eval(ev, eo, ee) == 0, ee.str());
  const auto report = nlohmann::json::parse(fixtures::read_bytes(dir / "eval_report.json"));
  CHECK(report["sa"] == 100.0);
  CHECK(report["da"] == 100.0);

  ev.match = MatchMode::Coordinates;
  ev.overwrite = true;
  CHECK(cmd_eval(ev, eo, ee) == 0);
  ev.label_field = "semantic";
  std::ostringstream eo2, ee2;
  CHECK(cmd_eval(ev, eo2, ee2) != 0);
  CHECK(ee2.str().find("semantic") != std::string::npos);
}

TEST_CASE("missing inputs fail with the offending path") {
  TempDir dir("cli");
  REQUIRE(synth_into(dir / "scene") == 0);
  RunConfig run = clean_config(dir / "scene", dir / "out");
  run.poses = dir / "nowhere.txt";
  run.pose_source = PoseSource::PoseFile;
  std::ostringstream out, err;
  CHECK(cmd_clean(run, out, err) != 0);
  CHECK(err.str().find("nowhere.txt") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "static.pcd"));

  run = clean_config(dir / "scene", dir / "out");
  run.map = dir / "none.pcd";
  std::ostringstream out2, err2;
  CHECK(cmd_clean(run, out2, err2) != 0);
  CHECK(err2.str().find("none.pcd") != std::string::npos);
}

TEST_CASE("pose file rows drive the scans") {
  TempDir dir("cli");
  REQUIRE(synth_into(dir / "scene") == 0);
  RunConfig a = clean_config(dir / "scene", dir / "a");
  RunConfig b = clean_config(dir / "scene", dir / "b");
  b.poses = dir / "scene" / "poses.txt";
  b.pose_source = PoseSource::PoseFile;
  std::ostringstream o, e;
  REQUIRE(cmd_clean(a, o, e) == 0);
  REQUIRE_MESSAGE(cmd_clean(b, o, e) == 0, e.str());
  // VIEWPOINT and poses.txt carry the same poses at different precision; the partitions agree.
  CHECK(read_cloud(dir / "a" / "static.pcd").size() == read_cloud(dir / "b" / "static.pcd").size());
}

TEST_CASE("invalid synth spec exits non-zero and same seed gives identical bytes") {
  TempDir dir("cli");
  SynthSpec bad = SynthSpec::defaults();
  bad.scans = 0;
  CHECK(synth_into(dir / "bad", 1, bad) != 0);
  REQUIRE(synth_into(dir / "x", 9) == 0);
  REQUIRE(synth_into(dir / "y", 9) == 0);
  CHECK(fixtures::read_bytes(dir / "x" / "map.pcd") == fixtures::read_bytes(dir / "y" / "map.pcd"));
  CHECK(fixtures::read_bytes(dir / "x" / "scans" / "000007.pcd") ==
        fixtures::read_bytes(dir / "y" / "scans" / "000007.pcd"));
}

TEST_CASE("scan lists") {
  TempDir dir("cli");
  fs::create_directories(dir / "s");
  for (const char* n : {"b.pcd", "a.pcd", "c.txt"}) fixtures::write_text(dir / "s" / n, "");
  const auto all = list_scans(dir / "s");
  REQUIRE(all.size() == 2);
  CHECK(all[0].filename() == "a.pcd");
  CHECK(list_scans(dir / "s" / "b*").size() == 1);
  CHECK_THROWS_AS(list_scans(dir / "s" / "z*"), Error);
}

}
