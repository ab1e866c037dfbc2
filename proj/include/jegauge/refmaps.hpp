#pragma once

#include <array>
#include <filesystem>
#include <span>

#include "jegauge/annotation.hpp"
#include "jegauge/image.hpp"
#include "jegauge/tensor.hpp"

namespace jegauge {

/// Dense displacement field in pixels per frame.
struct FlowField {
  Map2D u;
  Map2D v;

  /// Rank-3 [2, H, W] float32, u first.
  Tensor to_tensor() const;
  static FlowField from_tensor(const Tensor& t);
};

struct HornSchunckParams {
  double smoothness = 0.1;
  int iterations = 100;
};

/// Horn-Schunck flow between two gray frames. Intensities are used on their
/// native 0..255 scale. Gradients are central differences averaged over both
/// frames; each iteration is one raster-order Gauss-Seidel sweep of the
/// classic update
///   u = u_avg - Ix (Ix u_avg + Iy v_avg + It) / (s + Ix^2 + Iy^2)
/// with u_avg the mean of the in-bounds 4-neighbors and s scaled by the
/// neighbor count / 4 at the border.
FlowField horn_schunck_flow(const Frame& f0, const Frame& f1, const HornSchunckParams& params = {});

/// Discrete energy minimized by horn_schunck_flow: squared brightness
/// constancy residual plus (s / 4) times the squared differences over every
/// 4-neighbor edge. Non-increasing across sweeps.
double horn_schunck_energy(const Frame& f0, const Frame& f1, const FlowField& flow, double smoothness);

/// Per-pixel flow magnitude, min-max normalized (orientation discarded).
MotionMap flow_magnitude(const FlowField& flow);

enum SegmentId : std::uint8_t {
  kBackground = 0,
  kHead = 1,
  kTorso = 2,
  kArms = 3,
  kHands = 4,
  kLegs = 5,
};
inline constexpr std::size_t kSegmentCount = 6;

/// Per-pixel body-segment ids on the fixed six-id taxonomy.
struct SegmentMaskSet {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  SegmentMaskSet() = default;
  SegmentMaskSet(int h, int w, std::vector<std::uint8_t> l);
  static SegmentMaskSet background(int h, int w);
  /// Rank-2 uint8 [H, W]; ids above 5 are rejected.
  static SegmentMaskSet from_tensor(const Tensor& t);
  Tensor to_tensor() const;

  std::uint8_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

struct PartWeightTable {
  std::array<float, kCocoKeypoints> keypoint_weights{};
  std::array<float, kSegmentCount> segment_weights{};

  /// Head and arm keypoints 1.0, hips 0.6, knees/ankles 0.3; segments head
  /// 0.9, torso 0.8, arms 0.8, hands 0.9, legs 0.3, background 0.
  static PartWeightTable defaults();

  friend bool operator==(const PartWeightTable&, const PartWeightTable&) = default;
};

PartWeightTable parse_weight_table(const nlohmann::json& doc);
PartWeightTable read_weight_table(const std::filesystem::path& path);
nlohmann::json weight_table_to_json(const PartWeightTable& w);

/// Default Gaussian sigma: 6 px at 224 px width, scaled with frame width.
double default_sigma(int width);

/// Max over all keypoints of weight * confidence * exp(-d^2 / (2 sigma^2)).
Map2D keypoint_heatmap(std::span<const KeypointSet> sets, const PartWeightTable& weights, double sigma, int width,
                       int height);

/// max(heat, segment weight) on person pixels, heat alone on background.
SemanticReferenceMap combine_semantic(const Map2D& heat, const SegmentMaskSet& seg, const PartWeightTable& weights);

}  // namespace jegauge
