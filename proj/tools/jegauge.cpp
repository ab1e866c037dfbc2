#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "jegauge/analysis.hpp"
#include "jegauge/annotation.hpp"
#include "jegauge/augment.hpp"
#include "jegauge/csv.hpp"
#include "jegauge/error.hpp"
#include "jegauge/gradcam.hpp"
#include "jegauge/image.hpp"
#include "jegauge/matching.hpp"
#include "jegauge/pnm.hpp"
#include "jegauge/refmaps.hpp"
#include "jegauge/tensor.hpp"

namespace fs = std::filesystem;
using namespace jegauge;

namespace {

struct Extent {
  int width = 0;
  int height = 0;
};

Extent parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const int w = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const std::string rest = text.substr(x + 1);
    const int h = std::stoi(rest, &used);
    if (used != rest.size() || w < 1 || h < 1) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Validation, "--size must look like WxH with positive extents, got '" + text + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<float> parse_floats(const std::string& text, const std::string& what) {
  std::vector<float> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stof(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::Validation, what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

std::set<Role> parse_roles(const std::string& text) {
  std::set<Role> out;
  for (const auto& item : split_list(text)) {
    const auto r = parse_role(item);
    if (!r) throw Error(ErrorKind::Validation, "--roles: unknown role '" + item + "'");
    out.insert(*r);
  }
  return out;
}

std::set<Part> parse_parts(const std::string& text) {
  std::set<Part> out;
  for (const auto& item : split_list(text)) {
    const auto p = parse_part(item);
    if (!p) throw Error(ErrorKind::Validation, "--parts: unknown part '" + item + "'");
    out.insert(*p);
  }
  return out;
}

/// Output/input name patterns carry exactly one printf integer field such as
/// `%04d`; anything else is rejected before any file is touched.
void check_pattern(const std::string& pattern, const std::string& flag) {
  int fields = 0;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '%') continue;
    if (i + 1 < pattern.size() && pattern[i + 1] == '%') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (j < pattern.size() && pattern[j] == '0') ++j;
    while (j < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[j]))) ++j;
    if (j >= pattern.size() || pattern[j] != 'd') {
      throw Error(ErrorKind::Validation, flag + ": only %d-style fields are allowed in '" + pattern + "'");
    }
    ++fields;
    i = j;
  }
  if (fields != 1) throw Error(ErrorKind::Validation, flag + ": pattern needs exactly one %d field, got '" + pattern + "'");
}

fs::path expand(const std::string& pattern, int index) {
  std::vector<char> buf(pattern.size() + 32);
  const int n = std::snprintf(buf.data(), buf.size(), pattern.c_str(), index);
  return fs::path(std::string(buf.data(), static_cast<std::size_t>(n)));
}

void ensure_parent(const fs::path& path) {
  const auto parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + parent.string() + "': " + ec.message());
}

/// Files in `dir` with one of `extensions`, keyed by the trailing integer of
/// their stem (`frame_0007.pgm` -> 7). Files without a trailing number are
/// ignored; two files claiming the same index are an error.
std::map<int, fs::path> indexed_files(const fs::path& dir, const std::set<std::string>& extensions) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorKind::Io, "not a directory: '" + dir.string() + "'");
  std::map<int, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto& p = entry.path();
    if (!extensions.count(p.extension().string())) continue;
    const std::string stem = p.stem().string();
    std::size_t start = stem.size();
    while (start > 0 && std::isdigit(static_cast<unsigned char>(stem[start - 1]))) --start;
    if (start == stem.size()) continue;
    const int index = std::stoi(stem.substr(start));
    const auto [it, inserted] = out.emplace(index, p);
    if (!inserted) {
      throw Error(ErrorKind::Validation, "files '" + it->second.filename().string() + "' and '" +
                                             p.filename().string() + "' share frame index " + std::to_string(index));
    }
  }
  if (ec) throw Error(ErrorKind::Io, "cannot list '" + dir.string() + "': " + ec.message());
  return out;
}

const std::set<std::string> kFrameExt{".pgm", ".ppm", ".pnm"};
const std::set<std::string> kTensorExt{".gct"};

void write_json(const nlohmann::json& doc, const fs::path& path) {
  ensure_parent(path);
  write_text(path, doc.dump(2) + "\n");
}

/// Runs `work(i)` for i in [0, n) on up to `jobs` threads. Every item runs to
/// completion; the error of the lowest failing item is rethrown so failures do
/// not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn work) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, jobs));
  if (threads == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void check_jobs(int jobs) {
  if (jobs < 1) throw Error(ErrorKind::Validation, "--jobs must be at least 1");
}

// ---------------------------------------------------------------- gradcam

struct GradcamArgs {
  std::string activations, gradients, cam_weights, size, out, render;
};

void run_gradcam(const GradcamArgs& a) {
  if (a.gradients.empty() == a.cam_weights.empty()) {
    throw Error(ErrorKind::Validation, "give exactly one of --gradients or --cam-weights");
  }
  const auto acts = ChannelStack::from_tensor(read_tensor(a.activations));
  Map2D raw;
  if (!a.gradients.empty()) {
    raw = compute_gradcam(acts, ChannelStack::from_tensor(read_tensor(a.gradients)));
  } else {
    raw = compute_cam(acts, parse_floats(a.cam_weights, "--cam-weights"));
  }
  Extent ext{raw.width, raw.height};
  if (!a.size.empty()) ext = parse_size(a.size);
  const auto cam = normalize_map(upsample_bilinear(raw, ext.width, ext.height));
  ensure_parent(a.out);
  write_tensor(map_to_tensor(cam), a.out);
  if (!a.render.empty()) {
    ensure_parent(a.render);
    write_frame_pnm(render_colormap(cam), a.render);
  }
}

// ---------------------------------------------------------------- flow

struct FlowArgs {
  std::string frames, out_mag, out_flow;
  double smoothness = 0.1;
  int iterations = 100;
  int jobs = 1;
};

void run_flow(const FlowArgs& a) {
  check_pattern(a.out_mag, "--out-mag");
  if (!a.out_flow.empty()) check_pattern(a.out_flow, "--out-flow");
  check_jobs(a.jobs);
  const auto files = indexed_files(a.frames, kFrameExt);
  if (files.size() < 2) throw Error(ErrorKind::Validation, "--frames needs at least two frames, found " + std::to_string(files.size()));
  const std::vector<std::pair<int, fs::path>> ordered(files.begin(), files.end());
  const HornSchunckParams params{a.smoothness, a.iterations};

  // Pair (t, t+1) is written under index t.
  parallel_for(ordered.size() - 1, a.jobs, [&](std::size_t i) {
    const auto f0 = to_gray(read_frame_pnm(ordered[i].second));
    const auto f1 = to_gray(read_frame_pnm(ordered[i + 1].second));
    const auto flow = horn_schunck_flow(f0, f1, params);
    const int index = ordered[i].first;
    const auto mag_path = expand(a.out_mag, index);
    ensure_parent(mag_path);
    write_tensor(map_to_tensor(flow_magnitude(flow)), mag_path);
    if (!a.out_flow.empty()) {
      const auto flow_path = expand(a.out_flow, index);
      ensure_parent(flow_path);
      write_tensor(flow.to_tensor(), flow_path);
    }
  });
}

// ---------------------------------------------------------------- semref

struct SemrefArgs {
  std::string ann, seg, weights, size, out;
  std::optional<double> sigma;
};

void run_semref(const SemrefArgs& a) {
  check_pattern(a.out, "--out");
  if (!a.seg.empty()) check_pattern(a.seg, "--seg");
  const auto ann = read_annotation(a.ann);
  const auto weights = a.weights.empty() ? PartWeightTable::defaults() : read_weight_table(a.weights);

  std::optional<Extent> ext;
  if (!a.size.empty()) {
    ext = parse_size(a.size);
  } else if (ann.width && ann.height) {
    ext = Extent{*ann.width, *ann.height};
  } else if (a.seg.empty()) {
    throw Error(ErrorKind::Validation, "frame size unknown: pass --size, --seg, or width/height in the annotation");
  }

  for (const auto& entry : ann.frames) {
    SegmentMaskSet seg;
    if (!a.seg.empty()) {
      seg = SegmentMaskSet::from_tensor(read_tensor(expand(a.seg, entry.index)));
      if (ext && (seg.width != ext->width || seg.height != ext->height)) {
        throw Error(ErrorKind::Dimension, "segment mask for frame " + std::to_string(entry.index) + " is " +
                                              std::to_string(seg.width) + "x" + std::to_string(seg.height) +
                                              ", expected " + std::to_string(ext->width) + "x" +
                                              std::to_string(ext->height));
      }
    } else {
      seg = SegmentMaskSet::background(ext->height, ext->width);
    }
    const double sigma = a.sigma ? *a.sigma : default_sigma(seg.width);
    const auto heat = keypoint_heatmap(entry.keypoints, weights, sigma, seg.width, seg.height);
    const auto path = expand(a.out, entry.index);
    ensure_parent(path);
    write_tensor(map_to_tensor(combine_semantic(heat, seg, weights)), path);
  }
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string cam, motion, semantic, ann, out, variant, roles, parts;
  double alpha = 0.5;
  int bins = 20;
  int jobs = 1;
};

void run_score(const ScoreArgs& a) {
  check_jobs(a.jobs);
  ScoringConfig cfg;
  cfg.alpha = a.alpha;
  cfg.bins = a.bins;
  if (!a.roles.empty()) cfg.roles = parse_roles(a.roles);
  if (!a.parts.empty()) cfg.parts = parse_parts(a.parts);
  cfg.validate();

  const auto ann = read_annotation(a.ann);
  const auto cams = indexed_files(a.cam, kTensorExt);
  const auto motions = indexed_files(a.motion, kTensorExt);
  const auto semantics = indexed_files(a.semantic, kTensorExt);

  // Frames are scored when the annotation and all three maps cover them; the
  // final frame of a clip has no motion map and is skipped this way.
  std::vector<const FrameEntry*> selected;
  for (const auto& entry : ann.frames) {
    if (cams.count(entry.index) && motions.count(entry.index) && semantics.count(entry.index)) selected.push_back(&entry);
  }
  if (selected.empty()) throw Error(ErrorKind::Validation, "no annotated frame has Grad-CAM, motion and semantic maps");

  std::vector<FrameInput> inputs(selected.size());
  parallel_for(selected.size(), a.jobs, [&](std::size_t i) {
    const auto& entry = *selected[i];
    auto& in = inputs[i];
    in.index = entry.index;
    in.cam = map_from_tensor(read_tensor(cams.at(entry.index)));
    in.motion = map_from_tensor(read_tensor(motions.at(entry.index)));
    in.semantic = map_from_tensor(read_tensor(semantics.at(entry.index)));
    check_boxes_inside(entry, in.cam.width, in.cam.height);
    in.boxes = entry.boxes;
  });

  auto report = score_clip(ann.clip_id, inputs, cfg, a.jobs);
  report.variant = a.variant;
  write_json(report_to_json(report), a.out);
}

// ---------------------------------------------------------------- augment

struct AugmentArgs {
  std::string frames, ann, out, out_ann, op, parts = "face,body", color = "0,0,0", bg_image, seg;
  int radius = 5;
  double sigma = 10.0;
  std::uint64_t seed = 0;
  std::optional<double> degrees;
  double max_degrees = 15.0;
  int jobs = 1;
};

std::uint64_t mix_seed(std::uint64_t seed, int index) {
  // splitmix64 finalizer: decorrelates per-frame streams from one clip seed.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double random_angle(std::uint64_t seed, double max_degrees) {
  std::mt19937_64 engine(seed);
  const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;  // [0, 1)
  return (2.0 * u - 1.0) * max_degrees;
}

void run_augment(const AugmentArgs& a) {
  static const std::set<std::string> ops{"cutout", "solid", "image", "blur", "noise", "rotate", "hflip"};
  if (!ops.count(a.op)) throw Error(ErrorKind::Validation, "--op: unknown operation '" + a.op + "'");
  check_jobs(a.jobs);
  if (!a.seg.empty()) check_pattern(a.seg, "--seg");

  auto ann = read_annotation(a.ann);
  const auto files = indexed_files(a.frames, kFrameExt);
  if (files.empty()) throw Error(ErrorKind::Validation, "no frames found in '" + a.frames + "'");
  const std::vector<std::pair<int, fs::path>> ordered(files.begin(), files.end());
  std::map<int, FrameEntry*> entries;
  for (auto& e : ann.frames) entries[e.index] = &e;

  std::optional<BackgroundOp> background;
  if (a.op == "solid") {
    const auto rgb = parse_floats(a.color, "--color");
    if (rgb.size() != 3 || std::any_of(rgb.begin(), rgb.end(), [](float v) { return v < 0 || v > 255 || v != static_cast<int>(v); })) {
      throw Error(ErrorKind::Validation, "--color needs three integers in [0, 255]");
    }
    background = BgSolid{static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]), static_cast<std::uint8_t>(rgb[2])};
  } else if (a.op == "image") {
    if (a.bg_image.empty()) throw Error(ErrorKind::Validation, "--op image needs --bg-image");
    background = BgImage{read_frame_pnm(a.bg_image)};
  } else if (a.op == "blur") {
    background = BgBlur{a.radius};
  }
  const std::set<Part> parts = a.op == "cutout" ? parse_parts(a.parts) : std::set<Part>{};
  const double angle = a.op != "rotate" ? 0.0 : (a.degrees ? *a.degrees : random_angle(a.seed, a.max_degrees));
  if (a.op == "rotate" && !a.degrees && !(a.max_degrees >= 0.0 && a.max_degrees <= 180.0)) {
    throw Error(ErrorKind::Validation, "--max-degrees must lie in [0, 180]");
  }

  const fs::path out_dir(a.out);
  std::vector<std::optional<FrameEntry>> updated(ordered.size());
  std::vector<Extent> extents(ordered.size());
  parallel_for(ordered.size(), a.jobs, [&](std::size_t i) {
    const int index = ordered[i].first;
    const Frame f = read_frame_pnm(ordered[i].second);
    extents[i] = {f.width, f.height};
    const auto it = entries.find(index);
    const FrameEntry* entry = it == entries.end() ? nullptr : it->second;
    const std::vector<RegionBox> no_boxes;
    const auto& boxes = entry ? entry->boxes : no_boxes;

    Frame out;
    if (a.op == "cutout") {
      out = apply_cutout(f, boxes, parts);
    } else if (background) {
      const auto fg = a.seg.empty() ? foreground_from_boxes(boxes, f.width, f.height)
                                    : foreground_from_mask(SegmentMaskSet::from_tensor(read_tensor(expand(a.seg, index))));
      out = apply_background(f, fg, *background);
    } else if (a.op == "noise") {
      out = add_gaussian_noise(f, a.sigma, mix_seed(a.seed, index));
    } else if (a.op == "rotate") {
      out = rotate(f, angle);
      if (entry) updated[i] = rotate(*entry, angle, f.width, f.height);
    } else {
      out = hflip(f);
      if (entry) updated[i] = hflip(*entry, f.width);
    }
    const auto path = out_dir / ordered[i].second.filename();
    ensure_parent(path);
    write_frame_pnm(out, path);
  });

  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (updated[i]) *entries.at(ordered[i].first) = *updated[i];
  }
  if (!ann.width && !ann.height) {
    ann.width = extents.front().width;
    ann.height = extents.front().height;
  }
  const fs::path ann_out = a.out_ann.empty() ? out_dir / fs::path(a.ann).filename() : fs::path(a.out_ann);
  ensure_parent(ann_out);
  write_annotation(ann, ann_out);
}

// ---------------------------------------------------------------- dataset plans and analysis

void run_balance(const std::string& labels, const std::string& out) {
  const auto records = parse_labels(read_csv(labels));
  const auto plan = plan_balance(records);
  ensure_parent(out);
  write_text(out, balance_plan_csv(plan));
  for (const auto l : {Label::Low, Label::Mid, Label::High}) {
    const auto o = plan.original.count(l) ? plan.original.at(l) : 0;
    const auto d = plan.duplicates.count(l) ? plan.duplicates.at(l) : 0;
    std::cout << to_string(l) << ": " << o << " + " << d << " = " << o + d << "\n";
  }
  std::cout << "duplicates: " << plan.total_duplicates() << "\n";
}

void run_mix(const std::string& a, const std::string& b, std::size_t total, std::uint64_t seed, const std::string& out) {
  const auto plan = plan_mix(parse_labels(read_csv(a)), parse_labels(read_csv(b)), total, seed);
  ensure_parent(out);
  write_text(out, mix_plan_csv(plan));
  for (const auto l : {Label::Low, Label::Mid, Label::High}) {
    std::cout << to_string(l) << ": a=" << plan.from_a.at(l) << " b=" << plan.from_b.at(l) << "\n";
  }
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

void run_icc(const std::string& ratings, const std::string& form, const std::string& classes, double t_low, double t_high) {
  const auto table = read_csv(ratings);
  const auto r = parse_ratings(table);
  const auto f = form == "single" ? IccForm::Single : IccForm::Average;
  std::cout << "icc(3," << (f == IccForm::Single ? "1" : "k") << ") = " << fixed(icc_consistency(r, f)) << "\n";
  if (classes.empty()) return;
  const RatingThresholds t{t_low, t_high};
  std::string csv = "item_id,mean_rating,label\n";
  for (int i = 0; i < r.items; ++i) {
    double sum = 0.0;
    for (int j = 0; j < r.raters; ++j) sum += r.at(i, j);
    const double mean = sum / r.raters;
    csv += table.rows[static_cast<std::size_t>(i)][0] + "," + fixed(mean) + "," + std::string(to_string(class_from_rating(mean, t))) + "\n";
  }
  ensure_parent(classes);
  write_text(classes, csv);
}

void run_acc(const std::string& preds_path) {
  const auto preds = parse_predictions(read_csv(preds_path));
  std::cout << "n = " << preds.size() << "\n";
  std::cout << "top1 = " << fixed(top1_accuracy(preds)) << "\n";
  std::cout << "ce_loss = " << fixed(mean_ce_loss(preds)) << "\n";
}

void run_report(const std::string& in, const std::string& group_by, const std::string& out) {
  std::error_code ec;
  if (!fs::is_directory(in, ec)) throw Error(ErrorKind::Io, "not a directory: '" + in + "'");
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(in, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw Error(ErrorKind::Validation, "no report JSON files in '" + in + "'");

  std::vector<ClipScoreReport> reports;
  for (const auto& p : paths) {
    std::ifstream is(p);
    if (!is) throw Error(ErrorKind::Io, "cannot open '" + p.string() + "'");
    nlohmann::json doc;
    try {
      is >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, p.filename().string() + ": " + e.what());
    }
    try {
      reports.push_back(report_from_json(doc));
    } catch (const Error& e) {
      throw Error(e.kind(), p.filename().string() + ": " + e.detail());
    }
  }
  const GroupKey key = group_by == "variant" ? GroupKey::Variant : group_by == "clip" ? GroupKey::Clip : GroupKey::All;
  ensure_parent(out);
  write_text(out, summary_to_csv(aggregate_reports(reports, key)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grad-CAM / reference-map agreement toolkit"};
  app.require_subcommand(1);

  GradcamArgs gc;
  auto* gradcam = app.add_subcommand("gradcam", "Grad-CAM (or CAM) saliency map from activation tensors");
  gradcam->add_option("--activations", gc.activations, "activation tensor [K,h,w]")->required();
  gradcam->add_option("--gradients", gc.gradients, "class-score gradient tensor [K,h,w]");
  gradcam->add_option("--cam-weights", gc.cam_weights, "comma-separated class weights for plain CAM");
  gradcam->add_option("--size", gc.size, "output extent WxH (default: activation extent)");
  gradcam->add_option("--out", gc.out, "saliency tensor [H,W]")->required();
  gradcam->add_option("--render", gc.render, "optional jet-colormap PPM");

  FlowArgs fl;
  auto* flow = app.add_subcommand("flow", "Horn-Schunck motion maps for consecutive frames");
  flow->add_option("--frames", fl.frames, "directory of PGM/PPM frames")->required();
  flow->add_option("--smoothness", fl.smoothness, "smoothness weight")->capture_default_str();
  flow->add_option("--iters", fl.iterations, "iterations")->capture_default_str();
  flow->add_option("--out-mag", fl.out_mag, "motion-map path pattern, e.g. mag_%04d.gct")->required();
  flow->add_option("--out-flow", fl.out_flow, "optional raw flow path pattern ([2,H,W])");
  flow->add_option("--jobs", fl.jobs, "worker threads")->capture_default_str();

  SemrefArgs sr;
  auto* semref = app.add_subcommand("semref", "semantic reference maps from keypoints and segment masks");
  semref->add_option("--ann", sr.ann, "clip annotation JSON")->required();
  semref->add_option("--seg", sr.seg, "segment mask path pattern, e.g. seg_%04d.gct");
  semref->add_option("--weights", sr.weights, "part weight table JSON");
  semref->add_option("--sigma", sr.sigma, "keypoint Gaussian sigma in pixels (default 6 * W / 224)");
  semref->add_option("--size", sr.size, "frame extent WxH when no masks are given");
  semref->add_option("--out", sr.out, "output path pattern, e.g. ref_%04d.gct")->required();

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "per-region agreement between Grad-CAM and reference maps");
  score->add_option("--cam", sc.cam, "directory of saliency tensors")->required();
  score->add_option("--motion", sc.motion, "directory of motion-map tensors")->required();
  score->add_option("--semantic", sc.semantic, "directory of semantic reference tensors")->required();
  score->add_option("--ann", sc.ann, "clip annotation JSON")->required();
  score->add_option("--alpha", sc.alpha, "weight of the motion branch")->capture_default_str();
  score->add_option("--bins", sc.bins, "histogram bins")->capture_default_str();
  score->add_option("--roles", sc.roles, "comma-separated roles (default: all)");
  score->add_option("--parts", sc.parts, "comma-separated parts (default: all)");
  score->add_option("--variant", sc.variant, "label recorded in the report, used by report --group-by variant");
  score->add_option("--jobs", sc.jobs, "worker threads")->capture_default_str();
  score->add_option("--out", sc.out, "report JSON")->required();

  AugmentArgs au;
  auto* augment = app.add_subcommand("augment", "apply one augmentation to a clip");
  augment->add_option("--frames", au.frames, "directory of PGM/PPM frames")->required();
  augment->add_option("--ann", au.ann, "clip annotation JSON")->required();
  augment->add_option("--op", au.op, "cutout | solid | image | blur | noise | rotate | hflip")->required();
  augment->add_option("--out", au.out, "output frame directory")->required();
  augment->add_option("--out-ann", au.out_ann, "updated annotation (default: <out>/<ann file name>)");
  augment->add_option("--parts", au.parts, "cutout: parts to erase")->capture_default_str();
  augment->add_option("--color", au.color, "solid: background R,G,B")->capture_default_str();
  augment->add_option("--bg-image", au.bg_image, "image: replacement background");
  augment->add_option("--radius", au.radius, "blur: box radius")->capture_default_str();
  augment->add_option("--seg", au.seg, "background ops: segment mask pattern (default: person boxes)");
  augment->add_option("--sigma", au.sigma, "noise: standard deviation")->capture_default_str();
  augment->add_option("--seed", au.seed, "noise/rotate: random seed")->capture_default_str();
  augment->add_option("--degrees", au.degrees, "rotate: fixed angle, counter-clockwise");
  augment->add_option("--max-degrees", au.max_degrees, "rotate: random angle bound when --degrees is absent")->capture_default_str();
  augment->add_option("--jobs", au.jobs, "worker threads")->capture_default_str();

  std::string bal_labels, bal_out;
  auto* balance = app.add_subcommand("balance", "duplication plan that equalizes label counts");
  balance->add_option("--labels", bal_labels, "labels CSV (clip_id,label)")->required();
  balance->add_option("--out", bal_out, "plan CSV (clip_id,copies)")->required();

  std::string mix_a, mix_b, mix_out;
  std::size_t mix_total = 0;
  std::uint64_t mix_seed_value = 0;
  auto* mix = app.add_subcommand("mix", "label-balanced selection from two sources");
  mix->add_option("--a", mix_a, "labels CSV of source a")->required();
  mix->add_option("--b", mix_b, "labels CSV of source b")->required();
  mix->add_option("--total", mix_total, "clips to select")->required();
  mix->add_option("--seed", mix_seed_value, "random seed")->required();
  mix->add_option("--out", mix_out, "plan CSV (clip_id,source)")->required();

  std::string icc_ratings, icc_form, icc_classes;
  double t_low = RatingThresholds{}.low, t_high = RatingThresholds{}.high;
  auto* icc = app.add_subcommand("icc", "inter-rater consistency");
  icc->add_option("--ratings", icc_ratings, "ratings CSV (item_id,rater1,rater2[,...])")->required();
  icc->add_option("--form", icc_form, "single | average")->required()->check(CLI::IsMember({"single", "average"}));
  icc->add_option("--classes", icc_classes, "optional CSV of per-item mean rating and class");
  icc->add_option("--t-low", t_low, "ratings below this are low")->capture_default_str();
  icc->add_option("--t-high", t_high, "ratings above this are high")->capture_default_str();

  std::string acc_preds;
  auto* acc = app.add_subcommand("acc", "top-1 accuracy and cross-entropy loss");
  acc->add_option("--preds", acc_preds, "predictions CSV (clip_id,logit_low,logit_mid,logit_high,label)")->required();

  std::string rep_in, rep_group = "variant", rep_out;
  auto* report = app.add_subcommand("report", "summary table across clip reports");
  report->add_option("--in", rep_in, "directory of report JSON files")->required();
  report->add_option("--group-by", rep_group, "variant | clip | all")
      ->check(CLI::IsMember({"variant", "clip", "all"}))
      ->capture_default_str();
  report->add_option("--out", rep_out, "summary CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gradcam) run_gradcam(gc);
    else if (*flow) run_flow(fl);
    else if (*semref) run_semref(sr);
    else if (*score) run_score(sc);
    else if (*augment) run_augment(au);
    else if (*balance) run_balance(bal_labels, bal_out);
    else if (*mix) run_mix(mix_a, mix_b, mix_total, mix_seed_value, mix_out);
    else if (*icc) run_icc(icc_ratings, icc_form, icc_classes, t_low, t_high);
    else if (*acc) run_acc(acc_preds);
    else if (*report) run_report(rep_in, rep_group, rep_out);
  } catch (const Error& e) {
    std::cerr << "jegauge: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "jegauge: io: " << e.what() << "\n";
    return 3;
  } catch (const std::bad_alloc&) {
    std::cerr << "jegauge: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "jegauge: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
