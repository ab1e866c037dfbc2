#include "jegauge/annotation.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <utility>

#include "jegauge/error.hpp"

namespace jegauge {

using nlohmann::json;

std::string_view to_string(Role r) { return r == Role::Parent ? "parent" : "child"; }
std::string_view to_string(Part p) { return p == Part::Face ? "face" : "body"; }

std::string_view to_string(Label l) {
  switch (l) {
    case Label::Low: return "low";
    case Label::Mid: return "mid";
    case Label::High: return "high";
  }
  return "mid";
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "parent") return Role::Parent;
  if (s == "child") return Role::Child;
  return std::nullopt;
}

std::optional<Part> parse_part(std::string_view s) {
  if (s == "face") return Part::Face;
  if (s == "body") return Part::Body;
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "low") return Label::Low;
  if (s == "mid") return Label::Mid;
  if (s == "high") return Label::High;
  return std::nullopt;
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::Validation, field + ": " + why);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) invalid(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) invalid(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string child_path(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

std::string get_string(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) invalid(child_path(path, key), "expected string");
  return v.get<std::string>();
}

long long get_int(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number_integer()) invalid(child_path(path, key), "expected integer");
  return v.get<long long>();
}

const json& get_array(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_array()) invalid(child_path(path, key), "expected array");
  return v;
}

RegionBox parse_box(const json& b, const std::string& path) {
  RegionBox box;
  const auto role = parse_role(get_string(b, "role", path));
  if (!role) invalid(path + ".role", "expected \"parent\" or \"child\"");
  const auto part = parse_part(get_string(b, "part", path));
  if (!part) invalid(path + ".part", "expected \"face\" or \"body\"");
  box.role = *role;
  box.part = *part;
  const auto x = get_int(b, "x", path);
  const auto y = get_int(b, "y", path);
  const auto w = get_int(b, "w", path);
  const auto h = get_int(b, "h", path);
  if (w <= 0) invalid(path + ".w", "must be > 0");
  if (h <= 0) invalid(path + ".h", "must be > 0");
  if (x < 0 || y < 0) throw Error(ErrorKind::Bounds, path + ": top-left corner outside frame");
  if (x > 1'000'000 || y > 1'000'000 || w > 1'000'000 || h > 1'000'000) invalid(path, "coordinates out of range");
  box.x = static_cast<int>(x);
  box.y = static_cast<int>(y);
  box.w = static_cast<int>(w);
  box.h = static_cast<int>(h);
  return box;
}

KeypointSet parse_keypoints(const json& k, const std::string& path) {
  KeypointSet set;
  const auto role = parse_role(get_string(k, "role", path));
  if (!role) invalid(path + ".role", "expected \"parent\" or \"child\"");
  set.role = *role;
  const auto& points = get_array(k, "points", path);
  if (points.size() != kCocoKeypoints) invalid(path + ".points", "expected 17");
  for (std::size_t j = 0; j < kCocoKeypoints; ++j) {
    const auto pp = path + ".points[" + std::to_string(j) + "]";
    const auto& p = points[j];
    if (!p.is_array() || p.size() != 3) invalid(pp, "expected [x, y, confidence]");
    for (const auto& c : p) {
      if (!c.is_number()) invalid(pp, "expected numbers");
    }
    const double x = p[0].get<double>();
    const double y = p[1].get<double>();
    const double conf = p[2].get<double>();
    if (!std::isfinite(x) || !std::isfinite(y)) invalid(pp, "non-finite coordinate");
    if (!(conf >= 0.0 && conf <= 1.0)) invalid(pp, "confidence outside [0, 1]");
    set.points[j] = {static_cast<float>(x), static_cast<float>(y), static_cast<float>(conf)};
  }
  return set;
}

}  // namespace

void check_boxes_inside(const FrameEntry& entry, int width, int height) {
  for (std::size_t i = 0; i < entry.boxes.size(); ++i) {
    const auto& b = entry.boxes[i];
    if (b.x < 0 || b.y < 0 || static_cast<long long>(b.x) + b.w > width ||
        static_cast<long long>(b.y) + b.h > height) {
      throw Error(ErrorKind::Bounds, "frame " + std::to_string(entry.index) + " box " + std::to_string(i) + " (" +
                                         std::string(to_string(b.role)) + "/" + std::string(to_string(b.part)) +
                                         ") lies outside the " + std::to_string(width) + "x" +
                                         std::to_string(height) + " frame");
    }
  }
}

ClipAnnotation parse_annotation(const json& doc) {
  if (!doc.is_object()) invalid("$", "expected object");
  ClipAnnotation ann;
  ann.clip_id = get_string(doc, "clip_id", "");
  if (ann.clip_id.empty()) invalid("clip_id", "must be non-empty");

  const auto& fps = require(doc, "fps", "");
  if (!fps.is_number()) invalid("fps", "expected number");
  ann.fps = fps.get<double>();
  if (!(ann.fps > 0.0) || !std::isfinite(ann.fps)) invalid("fps", "must be > 0");

  const auto label = parse_label(get_string(doc, "label", ""));
  if (!label) invalid("label", "expected \"low\", \"mid\" or \"high\"");
  ann.label = *label;

  if (doc.contains("width") || doc.contains("height")) {
    const auto w = get_int(doc, "width", "");
    const auto h = get_int(doc, "height", "");
    if (w < 1) invalid("width", "must be >= 1");
    if (h < 1) invalid("height", "must be >= 1");
    ann.width = static_cast<int>(w);
    ann.height = static_cast<int>(h);
  }

  const auto& frames = get_array(doc, "frames", "");
  long long prev_index = -1;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto path = "frames[" + std::to_string(f) + "]";
    const auto& fr = frames[f];
    FrameEntry entry;
    const auto index = get_int(fr, "index", path);
    if (index < 0) invalid(path + ".index", "must be >= 0");
    if (index <= prev_index) invalid(path + ".index", "frame indices must be strictly increasing");
    if (index > 100'000'000) invalid(path + ".index", "out of range");
    prev_index = index;
    entry.index = static_cast<int>(index);

    const auto& boxes = get_array(fr, "boxes", path);
    std::set<std::pair<Role, Part>> seen;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const auto bp = path + ".boxes[" + std::to_string(i) + "]";
      auto box = parse_box(boxes[i], bp);
      if (!seen.insert({box.role, box.part}).second) invalid(bp, "duplicate (role, part) in frame");
      entry.boxes.push_back(box);
    }
    const auto& kps = get_array(fr, "keypoints", path);
    for (std::size_t i = 0; i < kps.size(); ++i) {
      entry.keypoints.push_back(parse_keypoints(kps[i], path + ".keypoints[" + std::to_string(i) + "]"));
    }
    if (ann.width) check_boxes_inside(entry, *ann.width, *ann.height);
    ann.frames.push_back(std::move(entry));
  }
  return ann;
}

ClipAnnotation read_annotation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation, path.string() + ": malformed JSON: " + e.what());
  }
  return parse_annotation(doc);
}

json annotation_to_json(const ClipAnnotation& ann) {
  json doc;
  doc["clip_id"] = ann.clip_id;
  doc["fps"] = ann.fps;
  doc["label"] = to_string(ann.label);
  if (ann.width) {
    doc["width"] = *ann.width;
    doc["height"] = *ann.height;
  }
  doc["frames"] = json::array();
  for (const auto& fr : ann.frames) {
    json jf;
    jf["index"] = fr.index;
    jf["boxes"] = json::array();
    for (const auto& b : fr.boxes) {
      jf["boxes"].push_back(
          {{"role", to_string(b.role)}, {"part", to_string(b.part)}, {"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
    }
    jf["keypoints"] = json::array();
    for (const auto& k : fr.keypoints) {
      json pts = json::array();
      for (const auto& p : k.points) pts.push_back({p.x, p.y, p.confidence});
      jf["keypoints"].push_back({{"role", to_string(k.role)}, {"points", pts}});
    }
    doc["frames"].push_back(std::move(jf));
  }
  return doc;
}

void write_annotation(const ClipAnnotation& ann, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << annotation_to_json(ann).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace jegauge
