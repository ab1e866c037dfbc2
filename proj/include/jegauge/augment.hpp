#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "jegauge/annotation.hpp"
#include "jegauge/image.hpp"
#include "jegauge/refmaps.hpp"

namespace jegauge {

/// Blacks out every box whose part is in `parts` (any role).
Frame apply_cutout(const Frame& f, std::span<const RegionBox> boxes, const std::set<Part>& parts);

struct BgSolid {
  std::uint8_t r = 0, g = 0, b = 0;
};
struct BgImage {
  Frame image;
};
struct BgBlur {
  int radius = 1;
};
using BackgroundOp = std::variant<BgSolid, BgImage, BgBlur>;

/// Foreground is every pixel with a non-background segment id.
std::vector<bool> foreground_from_mask(const SegmentMaskSet& seg);
/// Fallback when no mask exists: union of all person boxes.
std::vector<bool> foreground_from_boxes(std::span<const RegionBox> boxes, int width, int height);

/// Replaces background pixels per `op`; foreground pixels are untouched.
/// BgImage is bilinearly resized to the frame first; BgBlur samples a
/// (2r+1)^2 box mean of the original frame, truncated at the frame border.
Frame apply_background(const Frame& f, const std::vector<bool>& foreground, const BackgroundOp& op);

Frame box_blur(const Frame& f, int radius);
Frame resize_bilinear(const Frame& f, int width, int height);

/// Standard-normal source: std::mt19937_64 feeding a Box-Muller transform.
/// Both are fully specified so sequences are identical on every platform.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform_open();
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// clamp(round(x + n), 0, 255) per pixel-channel, n ~ N(0, sigma^2).
Frame add_gaussian_noise(const Frame& f, double sigma, std::uint64_t seed);

/// Counter-clockwise rotation (as displayed) about the frame center with
/// bilinear sampling; pixels mapped from outside the source are black.
Frame rotate(const Frame& f, double degrees);
/// Moves annotations with the pixels: boxes become the clipped bounding box
/// of their rotated outline (dropped when fully outside), keypoints rotate and
/// lose their confidence when they leave the frame.
FrameEntry rotate(const FrameEntry& entry, double degrees, int width, int height);

/// Mirrors the frame and, when given, its annotation entry: boxes map
/// x -> W - x - w, keypoints x -> W - 1 - x with left/right identities swapped.
Frame hflip(const Frame& f);
FrameEntry hflip(const FrameEntry& entry, int width);

/// COCO index of the mirrored keypoint (nose maps to itself).
std::size_t mirrored_keypoint(std::size_t j);

struct LabelRecord {
  std::string clip_id;
  Label label = Label::Mid;
};

struct BalancePlan {
  std::map<Label, std::size_t> original;
  std::map<Label, std::size_t> duplicates;
  /// (clip_id, extra copies) for every clip that receives copies, grouped by
  /// label (low, mid, high) and sorted by clip id within a label.
  std::vector<std::pair<std::string, std::size_t>> assignments;

  std::size_t total_duplicates() const;
};

/// Oversamples every label up to the largest label count, spreading each
/// label's duplicates round-robin over its clips in clip-id order.
BalancePlan plan_balance(std::span<const LabelRecord> records);

enum class Source { A, B };

struct MixPlan {
  std::uint64_t seed = 0;
  std::map<Label, std::size_t> from_a;
  std::map<Label, std::size_t> from_b;
  /// Selected clips: source A first, then B; each sorted by label then id.
  std::vector<std::pair<std::string, Source>> selections;
};

/// Draws `total` clips with an equal share per label (remainder to the first
/// labels) and, within a label, an even split between sources (extra to A),
/// sampling without replacement with a seeded Fisher-Yates shuffle.
MixPlan plan_mix(std::span<const LabelRecord> a, std::span<const LabelRecord> b, std::size_t total,
                 std::uint64_t seed);

/// Unbiased integer in [0, bound) from a 64-bit engine.
std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t bound);

}  // namespace jegauge
