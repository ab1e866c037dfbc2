#pragma once

#include <span>
#include <vector>

#include "jegauge/image.hpp"
#include "jegauge/tensor.hpp"

namespace jegauge {

/// K feature maps of one convolution layer, each height x width, stored as a
/// contiguous [K, h, w] block. Gradient stacks use the same layout.
struct ChannelStack {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  ChannelStack() = default;
  ChannelStack(int k, int h, int w, std::vector<float> v);

  /// Accepts a rank-3 [K, h, w] float32 tensor.
  static ChannelStack from_tensor(const Tensor& t);

  std::span<const float> channel(int k) const {
    const auto n = static_cast<std::size_t>(height) * width;
    return std::span<const float>(values).subspan(k * n, n);
  }
};

using ActivationStack = ChannelStack;
using GradientStack = ChannelStack;

/// ReLU(sum_k w[k] * A_k). `weights` is the final fully-connected row for the
/// class of interest.
Map2D compute_cam(const ActivationStack& a, std::span<const float> weights);

/// ReLU(sum_k alpha_k * A_k) with alpha_k the spatial mean of dY^c/dA_k.
Map2D compute_gradcam(const ActivationStack& a, const GradientStack& g);

/// Per-channel global-average-pooled gradients.
std::vector<double> pooled_gradients(const GradientStack& g);

/// Min-max scaling into [0, 1]; a constant map becomes all zeros.
SaliencyMap normalize_map(const Map2D& raw);

/// Bilinear resampling with half-pixel centers and edge clamping.
Map2D upsample_bilinear(const Map2D& m, int width, int height);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Classic jet ramp, each channel clamp(1.5 - |4v - c|) for c = 3, 2, 1,
/// scaled to 0..255 and rounded half-up.
Rgb jet(double v);

/// Renders a [0, 1] map as a 3-channel jet image. Throws a range error for
/// values outside [0, 1].
Frame render_colormap(const SaliencyMap& m);

}  // namespace jegauge
