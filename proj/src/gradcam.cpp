#include "jegauge/gradcam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jegauge/error.hpp"

namespace jegauge {

ChannelStack::ChannelStack(int k, int h, int w, std::vector<float> v)
    : channels(k), height(h), width(w), values(std::move(v)) {
  if (k < 1 || h < 1 || w < 1) throw Error(ErrorKind::Dimension, "channel stack extents must be >= 1");
  if (values.size() != static_cast<std::size_t>(k) * h * w) {
    throw Error(ErrorKind::Dimension, "channel stack data length mismatch");
  }
}

ChannelStack ChannelStack::from_tensor(const Tensor& t) {
  if (t.rank() != 3) throw Error(ErrorKind::Dimension, "expected a rank-3 [K, h, w] tensor");
  const auto d = t.f32();
  return ChannelStack(static_cast<int>(t.shape()[0]), static_cast<int>(t.shape()[1]),
                      static_cast<int>(t.shape()[2]), std::vector<float>(d.begin(), d.end()));
}

namespace {

void require_finite(std::span<const float> v, const char* what) {
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::Numeric, std::string("non-finite value in ") + what);
  }
}

Map2D weighted_relu(const ActivationStack& a, std::span<const double> alpha) {
  const auto n = static_cast<std::size_t>(a.height) * a.width;
  std::vector<double> acc(n, 0.0);
  for (int k = 0; k < a.channels; ++k) {
    const auto ch = a.channel(k);
    for (std::size_t p = 0; p < n; ++p) acc[p] += alpha[k] * ch[p];
  }
  Map2D out(a.height, a.width);
  for (std::size_t p = 0; p < n; ++p) out.values[p] = static_cast<float>(std::max(0.0, acc[p]));
  return out;
}

}  // namespace

Map2D compute_cam(const ActivationStack& a, std::span<const float> weights) {
  if (weights.size() != static_cast<std::size_t>(a.channels)) {
    throw Error(ErrorKind::Dimension, "class weights have length " + std::to_string(weights.size()) +
                                          " but the activation stack has " + std::to_string(a.channels) +
                                          " channels");
  }
  require_finite(a.values, "activations");
  require_finite(weights, "class weights");
  std::vector<double> alpha(weights.begin(), weights.end());
  return weighted_relu(a, alpha);
}

std::vector<double> pooled_gradients(const GradientStack& g) {
  const auto n = static_cast<double>(g.height) * g.width;
  std::vector<double> alpha(g.channels, 0.0);
  for (int k = 0; k < g.channels; ++k) {
    double s = 0.0;
    for (float v : g.channel(k)) s += v;
    alpha[k] = s / n;
  }
  return alpha;
}

Map2D compute_gradcam(const ActivationStack& a, const GradientStack& g) {
  if (a.channels != g.channels || a.height != g.height || a.width != g.width) {
    throw Error(ErrorKind::Dimension, "activation and gradient stacks differ in shape");
  }
  require_finite(a.values, "activations");
  require_finite(g.values, "gradients");
  return weighted_relu(a, pooled_gradients(g));
}

SaliencyMap normalize_map(const Map2D& raw) {
  const auto [lo, hi] = std::minmax_element(raw.values.begin(), raw.values.end());
  SaliencyMap out(raw.height, raw.width);
  if (raw.values.empty() || *lo == *hi) return out;
  const double mn = *lo;
  const double range = static_cast<double>(*hi) - mn;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.values[i] = static_cast<float>(std::clamp((raw.values[i] - mn) / range, 0.0, 1.0));
  }
  return out;
}

Map2D upsample_bilinear(const Map2D& m, int width, int height) {
  if (m.values.empty() || m.height < 1 || m.width < 1) throw Error(ErrorKind::Dimension, "empty input map");
  if (width < 1 || height < 1) throw Error(ErrorKind::Dimension, "target extents must be >= 1");
  Map2D out(height, width);
  const double sx = static_cast<double>(m.width) / width;
  const double sy = static_cast<double>(m.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(m.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, m.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(m.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, m.width - 1);
      const double tx = fx - x0;
      const double top = m.at(y0, x0) + tx * (m.at(y0, x1) - m.at(y0, x0));
      const double bot = m.at(y1, x0) + tx * (m.at(y1, x1) - m.at(y1, x0));
      out.at(y, x) = static_cast<float>(top + ty * (bot - top));
    }
  }
  return out;
}

Rgb jet(double v) {
  auto channel = [v](double center) {
    const double c = std::clamp(1.5 - std::abs(4.0 * v - center), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
  };
  return {channel(3.0), channel(2.0), channel(1.0)};
}

Frame render_colormap(const SaliencyMap& m) {
  Frame out(m.height, m.width, 3);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const float v = m.at(y, x);
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw Error(ErrorKind::Range, "saliency value outside [0, 1] at (" + std::to_string(x) + ", " +
                                          std::to_string(y) + ")");
      }
      const auto c = jet(v);
      out.at(y, x, 0) = c.r;
      out.at(y, x, 1) = c.g;
      out.at(y, x, 2) = c.b;
    }
  }
  return out;
}

}  // namespace jegauge
