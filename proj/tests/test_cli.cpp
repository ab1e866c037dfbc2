#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <filesystem>
#include <string>

#include "clip_fixture.hpp"
#include "jegauge/analysis.hpp"
#include "jegauge/csv.hpp"
#include "jegauge/image.hpp"
#include "jegauge/matching.hpp"
#include "jegauge/refmaps.hpp"
#include "jegauge/tensor.hpp"

namespace fs = std::filesystem;
using namespace jegauge;
using clipfix::q;

namespace {

std::string g_exe;

int jg(const std::string& args, const fs::path& log) { return clipfix::run(g_exe, args, log); }

}  // namespace

TEST_CASE("pipeline: gradcam -> flow -> semref -> score -> report") {
  const auto dir = fixtures::scratch_dir("cli_pipeline");
  const auto clip = clipfix::write_clip(dir / "clip");
  REQUIRE(clipfix::prepare_maps(g_exe, clip) == 0);

  // flow writes one map per consecutive pair, indexed by the earlier frame.
  CHECK(fs::exists(dir / "clip/motion/mag_0000.gct"));
  CHECK(fs::exists(dir / "clip/motion/mag_0008.gct"));
  CHECK_FALSE(fs::exists(dir / "clip/motion/mag_0009.gct"));
  const auto cam = map_from_tensor(read_tensor(dir / "clip/cam/cam_0003.gct"));
  CHECK(cam.width == 64);
  CHECK(cam.height == 48);
  for (const float v : cam.values) REQUIRE((v >= 0.0f && v <= 1.0f));

  const auto log = dir / "log.txt";
  fs::create_directories(dir / "reports");
  REQUIRE(jg(clipfix::score_args(clip, dir / "reports/a.json", 1) + " --variant base", log) == 0);
  std::ifstream is(dir / "reports/a.json");
  const auto report = report_from_json(nlohmann::json::parse(is));
  CHECK(report.clip_id == "fixture_clip");
  CHECK(report.frames.size() == 9);  // last frame has no motion map
  CHECK(report.variant == "base");

  REQUIRE(jg("report --in " + q(dir / "reports") + " --group-by variant --out " + q(dir / "summary.csv"), log) == 0);
  const auto summary = parse_csv(clipfix::slurp(dir / "summary.csv"));
  CHECK(summary.header == std::vector<std::string>{"group", "metric", "role", "part", "mean", "std", "n"});
  CHECK(summary.rows.size() == 8);  // 2 metrics x 2 roles x 2 parts
  CHECK(summary.rows[0][0] == "base");
}

TEST_CASE("score output is independent of --jobs") {
  const auto dir = fixtures::scratch_dir("cli_jobs");
  const auto clip = clipfix::write_clip(dir / "clip");
  REQUIRE(clipfix::prepare_maps(g_exe, clip) == 0);
  const auto log = dir / "log.txt";
  REQUIRE(jg(clipfix::score_args(clip, dir / "j1.json", 1), log) == 0);
  REQUIRE(jg(clipfix::score_args(clip, dir / "j4.json", 4), log) == 0);
  REQUIRE(jg(clipfix::score_args(clip, dir / "j3.json", 3), log) == 0);
  CHECK(clipfix::slurp(dir / "j1.json") == clipfix::slurp(dir / "j4.json"));
  CHECK(clipfix::slurp(dir / "j1.json") == clipfix::slurp(dir / "j3.json"));
}

TEST_CASE("exit codes") {
  const auto dir = fixtures::scratch_dir("cli_exit");
  const auto clip = clipfix::write_clip(dir / "clip", 3);
  const auto log = dir / "log.txt";

  CHECK(jg("", log) == 2);
  CHECK(jg("bogus", log) == 2);
  CHECK(jg("--help", log) == 0);
  CHECK(jg("icc --ratings x.csv", log) == 2);  // --form is required
  CHECK(jg("icc --ratings x.csv --form median", log) == 2);

  // I/O: missing inputs.
  CHECK(jg("gradcam --activations " + q(dir / "missing.gct") + " --gradients " + q(dir / "missing.gct") + " --out " +
               q(dir / "o.gct"),
           log) == 3);
  CHECK(jg("acc --preds " + q(dir / "missing.csv"), log) == 3);
  CHECK(jg("flow --frames " + q(dir / "nowhere") + " --out-mag " + q(dir / "m_%04d.gct"), log) == 3);

  // Validation: malformed content.
  write_text(dir / "bad.gct", "GCT2garbage");
  CHECK(jg("gradcam --activations " + q(dir / "bad.gct") + " --gradients " + q(dir / "bad.gct") + " --out " +
               q(dir / "o.gct"),
           log) == 2);
  CHECK(jg("gradcam --activations " + q(clip.activations(0)) + " --out " + q(dir / "o.gct"), log) == 2);
  CHECK(jg("gradcam --activations " + q(clip.activations(0)) + " --gradients " + q(clip.gradients(0)) +
               " --size 10by10 --out " + q(dir / "o.gct"),
           log) == 2);
  CHECK(jg("flow --frames " + q(clip.frame_dir()) + " --out-mag " + q(dir / "m.gct"), log) == 2);
  write_text(dir / "preds.csv", "clip_id,logit_low,logit_mid,logit_high,label\na,1,2,3,medium\n");
  CHECK(jg("acc --preds " + q(dir / "preds.csv"), log) == 2);
  write_text(dir / "ann.json", "{\"clip_id\": 3}");
  CHECK(jg("semref --ann " + q(dir / "ann.json") + " --size 8x8 --out " + q(dir / "r_%04d.gct"), log) == 2);

  // Incompatible: reports scored with different alpha.
  REQUIRE(clipfix::prepare_maps(g_exe, clip) == 0);
  fs::create_directories(dir / "mixed");
  REQUIRE(jg(clipfix::score_args(clip, dir / "mixed/a.json", 1), log) == 0);
  std::string other = clipfix::score_args(clip, dir / "mixed/b.json", 1);
  other.replace(other.find("--alpha 0.5"), 11, "--alpha 0.7");
  REQUIRE(jg(other, log) == 0);
  CHECK(jg("report --in " + q(dir / "mixed") + " --out " + q(dir / "s.csv"), log) == 4);
}

TEST_CASE("gradcam with CAM weights matches constant-gradient Grad-CAM") {
  const auto dir = fixtures::scratch_dir("cli_cam");
  write_tensor(Tensor({2, 2, 2}, std::vector<float>{1, 0, 0, 0, 0, 2, 0, 0}), dir / "a.gct");
  write_tensor(Tensor({2, 2, 2}, std::vector<float>{0.5f, 0.5f, 0.5f, 0.5f, -1, -1, -1, -1}), dir / "g.gct");
  const auto log = dir / "log.txt";
  REQUIRE(jg("gradcam --activations " + q(dir / "a.gct") + " --gradients " + q(dir / "g.gct") + " --out " +
                 q(dir / "gc.gct") + " --render " + q(dir / "gc.ppm"),
             log) == 0);
  REQUIRE(jg("gradcam --activations " + q(dir / "a.gct") + " --cam-weights 0.5,-1 --out " + q(dir / "cam.gct"), log) == 0);
  CHECK(clipfix::slurp(dir / "gc.gct") == clipfix::slurp(dir / "cam.gct"));
  const auto m = map_from_tensor(read_tensor(dir / "gc.gct"));
  CHECK(m.values == std::vector<float>{1, 0, 0, 0});  // [[0.5,0],[0,0]] normalized
  CHECK(clipfix::slurp(dir / "gc.ppm").rfind("P6\n2 2\n255\n", 0) == 0);
}

TEST_CASE("augment: hflip twice restores frames and annotation") {
  const auto dir = fixtures::scratch_dir("cli_hflip");
  const auto clip = clipfix::write_clip(dir / "clip", 3);
  const auto log = dir / "log.txt";
  REQUIRE(jg("augment --frames " + q(clip.frame_dir()) + " --ann " + q(clip.annotation()) + " --op hflip --out " +
                 q(dir / "once") + " --jobs 2",
             log) == 0);
  REQUIRE(jg("augment --frames " + q(dir / "once") + " --ann " + q(dir / "once/clip.json") + " --op hflip --out " +
                 q(dir / "twice"),
             log) == 0);
  for (const char* f : {"frame_0000.pgm", "frame_0001.pgm", "frame_0002.pgm"}) {
    CHECK(clipfix::slurp(clip.frame_dir() / f) == clipfix::slurp(dir / "twice" / f));
    CHECK(clipfix::slurp(clip.frame_dir() / f) != clipfix::slurp(dir / "once" / f));
  }
  CHECK(read_annotation(dir / "twice/clip.json") == read_annotation(clip.annotation()));
}

TEST_CASE("augment: deterministic across --jobs and identity settings") {
  const auto dir = fixtures::scratch_dir("cli_augment");
  const auto clip = clipfix::write_clip(dir / "clip", 4);
  const auto log = dir / "log.txt";
  const std::string base = "augment --frames " + q(clip.frame_dir()) + " --ann " + q(clip.annotation());
  for (const std::string op : {"noise --sigma 12 --seed 5", "rotate --seed 9", "cutout --parts face", "blur --radius 2",
                               "solid --color 0,255,0"}) {
    const auto name = op.substr(0, op.find(' '));
    REQUIRE(jg(base + " --op " + op + " --jobs 1 --out " + q(dir / (name + "1")), log) == 0);
    REQUIRE(jg(base + " --op " + op + " --jobs 4 --out " + q(dir / (name + "4")), log) == 0);
    for (int i = 0; i < 4; ++i) {
      const auto f = "frame_000" + std::to_string(i) + ".pgm";
      CHECK(clipfix::slurp(dir / (name + "1") / f) == clipfix::slurp(dir / (name + "4") / f));
    }
    CHECK(clipfix::slurp(dir / (name + "1") / "clip.json") == clipfix::slurp(dir / (name + "4") / "clip.json"));
  }
  REQUIRE(jg(base + " --op noise --sigma 0 --out " + q(dir / "n0"), log) == 0);
  REQUIRE(jg(base + " --op rotate --degrees 0 --out " + q(dir / "r0"), log) == 0);
  for (int i = 0; i < 4; ++i) {
    const auto f = "frame_000" + std::to_string(i) + ".pgm";
    CHECK(clipfix::slurp(dir / "n0" / f) == clipfix::slurp(clip.frame_dir() / f));
    CHECK(clipfix::slurp(dir / "r0" / f) == clipfix::slurp(clip.frame_dir() / f));
  }
  CHECK(jg(base + " --op rotate --degrees 270 --out " + q(dir / "bad"), log) == 2);
  CHECK(jg(base + " --op image --out " + q(dir / "bad"), log) == 2);
  CHECK(jg(base + " --op swirl --out " + q(dir / "bad"), log) == 2);
}

TEST_CASE("balance, mix, icc and acc") {
  const auto dir = fixtures::scratch_dir("cli_tables");
  const auto log = dir / "log.txt";
  write_text(dir / "labels.csv", "clip_id,label\na,low\nb,low\nc,low\nd,mid\ne,high\nf,high\n");
  REQUIRE(jg("balance --labels " + q(dir / "labels.csv") + " --out " + q(dir / "plan.csv"), log) == 0);
  CHECK(clipfix::slurp(dir / "plan.csv") == "clip_id,copies\nd,2\ne,1\n");
  CHECK(clipfix::slurp(log).find("duplicates: 3") != std::string::npos);

  write_text(dir / "b.csv", "clip_id,label\nx,low\ny,mid\nz,high\nw,mid\n");
  REQUIRE(jg("mix --a " + q(dir / "labels.csv") + " --b " + q(dir / "b.csv") + " --total 6 --seed 1 --out " +
                 q(dir / "mix1.csv"),
             log) == 0);
  REQUIRE(jg("mix --a " + q(dir / "labels.csv") + " --b " + q(dir / "b.csv") + " --total 6 --seed 1 --out " +
                 q(dir / "mix2.csv"),
             log) == 0);
  CHECK(clipfix::slurp(dir / "mix1.csv") == clipfix::slurp(dir / "mix2.csv"));
  CHECK(parse_csv(clipfix::slurp(dir / "mix1.csv")).rows.size() == 6);
  CHECK(jg("mix --a " + q(dir / "labels.csv") + " --b " + q(dir / "b.csv") + " --total 60 --seed 1 --out " +
               q(dir / "mix3.csv"),
           log) == 2);

  write_text(dir / "ratings.csv", "item_id,r1,r2\n1,1,1\n2,0,0\n3,-1,-1\n");
  REQUIRE(jg("icc --ratings " + q(dir / "ratings.csv") + " --form single --classes " + q(dir / "classes.csv"), log) == 0);
  CHECK(clipfix::slurp(log) == "icc(3,1) = 1.000000\n");
  CHECK(clipfix::slurp(dir / "classes.csv") ==
        "item_id,mean_rating,label\n1,1.000000,high\n2,0.000000,mid\n3,-1.000000,low\n");
  write_text(dir / "flat.csv", "item_id,r1,r2\n1,1,2\n2,1,2\n");
  CHECK(jg("icc --ratings " + q(dir / "flat.csv") + " --form average", log) == 2);

  write_text(dir / "preds.csv", "clip_id,logit_low,logit_mid,logit_high,label\na,0,0,0,low\nb,0,0,0,high\n");
  REQUIRE(jg("acc --preds " + q(dir / "preds.csv"), log) == 0);
  CHECK(clipfix::slurp(log) == "n = 2\ntop1 = 0.500000\nce_loss = 1.098612\n");
}

TEST_CASE("semref with segment masks and a weight table matches the library") {
  const auto dir = fixtures::scratch_dir("cli_semref");
  const auto clip = clipfix::write_clip(dir / "clip", 2);
  const auto log = dir / "log.txt";
  auto weights = PartWeightTable::defaults();
  weights.segment_weights[kTorso] = 0.5f;
  write_text(dir / "w.json", weight_table_to_json(weights).dump());
  std::vector<std::uint8_t> ids(static_cast<std::size_t>(clip.width * clip.height), kBackground);
  for (std::size_t p = 0; p < ids.size(); p += 3) ids[p] = kTorso;
  const SegmentMaskSet seg(clip.height, clip.width, ids);
  fs::create_directories(dir / "clip/seg");
  for (int i = 0; i < 2; ++i) write_tensor(seg.to_tensor(), clip.pattern("seg/seg_%04d.gct", i));

  REQUIRE(jg("semref --ann " + q(clip.annotation()) + " --seg " + q(dir / "clip/seg/seg_%04d.gct") + " --weights " +
                 q(dir / "w.json") + " --sigma 3 --out " + q(dir / "ref/ref_%04d.gct"),
             log) == 0);
  const auto ann = read_annotation(clip.annotation());
  for (int i = 0; i < 2; ++i) {
    const auto heat = keypoint_heatmap(ann.frames[i].keypoints, weights, 3.0, clip.width, clip.height);
    const auto expected = combine_semantic(heat, seg, weights);
    char name[32];
    std::snprintf(name, sizeof name, "ref/ref_%04d.gct", i);
    CHECK(map_from_tensor(read_tensor(dir / name)) == expected);
  }

  CHECK(jg("semref --ann " + q(clip.annotation()) + " --seg " + q(dir / "clip/seg/missing_%04d.gct") + " --out " +
               q(dir / "x_%04d.gct"),
           log) == 3);
  CHECK(jg("semref --ann " + q(clip.annotation()) + " --out " + q(dir / "ref_%s.gct"), log) == 2);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path to jegauge> [doctest options]\n");
    return 2;
  }
  g_exe = argv[1];
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv + 1);
  return ctx.run();
}
