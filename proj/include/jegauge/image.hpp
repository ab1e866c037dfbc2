#pragma once

#include <cstdint>
#include <vector>

#include "jegauge/tensor.hpp"

namespace jegauge {

/// Single-channel float map, row-major. Used for raw CAMs, saliency maps,
/// motion maps and semantic reference maps alike; the normalized kinds keep
/// their values in [0, 1].
struct Map2D {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  Map2D() = default;
  Map2D(int h, int w, float fill = 0.0f);
  Map2D(int h, int w, std::vector<float> v);

  float& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  float at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const noexcept { return values.size(); }
  bool same_extent(const Map2D& o) const noexcept { return height == o.height && width == o.width; }

  friend bool operator==(const Map2D&, const Map2D&) = default;
};

using SaliencyMap = Map2D;
using MotionMap = Map2D;
using SemanticReferenceMap = Map2D;

/// 8-bit image with 1 or 3 interleaved channels.
struct Frame {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int h, int w, int c, std::uint8_t fill = 0);
  Frame(int h, int w, int c, std::vector<std::uint8_t> p);

  std::uint8_t& at(int y, int x, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int y, int x, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Rec. 601 luma, rounded; single-channel frames are returned unchanged.
Frame to_gray(const Frame& f);

/// Maps a rank-2 float32 tensor [H, W] to a Map2D and back.
Map2D map_from_tensor(const Tensor& t);
Tensor map_to_tensor(const Map2D& m);

}  // namespace jegauge
