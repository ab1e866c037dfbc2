#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace jegauge {

enum class Role { Parent, Child };
enum class Part { Face, Body };
enum class Label { Low, Mid, High };

std::string_view to_string(Role r);
std::string_view to_string(Part p);
std::string_view to_string(Label l);
std::optional<Role> parse_role(std::string_view s);
std::optional<Part> parse_part(std::string_view s);
/// Canonical tokens only: "low", "mid", "high".
std::optional<Label> parse_label(std::string_view s);

struct RegionBox {
  Role role = Role::Parent;
  Part part = Part::Face;
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  friend bool operator==(const RegionBox&, const RegionBox&) = default;
};

inline constexpr std::size_t kCocoKeypoints = 17;

struct Keypoint {
  float x = 0.0f;
  float y = 0.0f;
  float confidence = 0.0f;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

/// 17 keypoints in COCO order: nose, left/right eye, left/right ear,
/// left/right shoulder, elbow, wrist, hip, knee, ankle.
struct KeypointSet {
  Role role = Role::Parent;
  std::array<Keypoint, kCocoKeypoints> points{};

  friend bool operator==(const KeypointSet&, const KeypointSet&) = default;
};

struct FrameEntry {
  int index = 0;
  std::vector<RegionBox> boxes;
  std::vector<KeypointSet> keypoints;

  friend bool operator==(const FrameEntry&, const FrameEntry&) = default;
};

struct ClipAnnotation {
  std::string clip_id;
  double fps = 0.0;
  Label label = Label::Mid;
  std::vector<FrameEntry> frames;
  // Optional frame extents; when present every box is bounds-checked on read.
  std::optional<int> width;
  std::optional<int> height;

  friend bool operator==(const ClipAnnotation&, const ClipAnnotation&) = default;
};

/// Validates and converts an annotation document. Violations raise a
/// validation error naming the offending field path; boxes outside the
/// declared frame raise a bounds error. Nothing is silently repaired.
ClipAnnotation parse_annotation(const nlohmann::json& doc);
ClipAnnotation read_annotation(const std::filesystem::path& path);

nlohmann::json annotation_to_json(const ClipAnnotation& ann);
void write_annotation(const ClipAnnotation& ann, const std::filesystem::path& path);

/// Throws a bounds error if any box of `entry` leaves a width x height frame.
void check_boxes_inside(const FrameEntry& entry, int width, int height);

}  // namespace jegauge
