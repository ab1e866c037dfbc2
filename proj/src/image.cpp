#include "jegauge/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jegauge/error.hpp"

namespace jegauge {

Map2D::Map2D(int h, int w, float fill) : height(h), width(w) {
  if (h < 1 || w < 1) throw Error(ErrorKind::Dimension, "map extents must be >= 1");
  values.assign(static_cast<std::size_t>(h) * w, fill);
}

Map2D::Map2D(int h, int w, std::vector<float> v) : height(h), width(w), values(std::move(v)) {
  if (h < 1 || w < 1) throw Error(ErrorKind::Dimension, "map extents must be >= 1");
  if (values.size() != static_cast<std::size_t>(h) * w) {
    throw Error(ErrorKind::Dimension, "map data length does not match " + std::to_string(h) + "x" + std::to_string(w));
  }
}

Frame::Frame(int h, int w, int c, std::uint8_t fill) : height(h), width(w), channels(c) {
  if (h < 1 || w < 1) throw Error(ErrorKind::Dimension, "frame extents must be >= 1");
  if (c != 1 && c != 3) throw Error(ErrorKind::Dimension, "frame channels must be 1 or 3");
  pixels.assign(static_cast<std::size_t>(h) * w * c, fill);
}

Frame::Frame(int h, int w, int c, std::vector<std::uint8_t> p) : height(h), width(w), channels(c), pixels(std::move(p)) {
  if (h < 1 || w < 1) throw Error(ErrorKind::Dimension, "frame extents must be >= 1");
  if (c != 1 && c != 3) throw Error(ErrorKind::Dimension, "frame channels must be 1 or 3");
  if (pixels.size() != static_cast<std::size_t>(h) * w * c) throw Error(ErrorKind::Dimension, "frame pixel count mismatch");
}

Frame to_gray(const Frame& f) {
  if (f.channels == 1) return f;
  Frame g(f.height, f.width, 1);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const double l = 0.299 * f.at(y, x, 0) + 0.587 * f.at(y, x, 1) + 0.114 * f.at(y, x, 2);
      g.at(y, x) = static_cast<std::uint8_t>(std::min(255.0, std::floor(l + 0.5)));
    }
  }
  return g;
}

Map2D map_from_tensor(const Tensor& t) {
  if (t.rank() != 2) throw Error(ErrorKind::Dimension, "expected a rank-2 [H, W] tensor");
  const auto d = t.f32();
  return Map2D(static_cast<int>(t.shape()[0]), static_cast<int>(t.shape()[1]), std::vector<float>(d.begin(), d.end()));
}

Tensor map_to_tensor(const Map2D& m) {
  return Tensor({static_cast<std::uint32_t>(m.height), static_cast<std::uint32_t>(m.width)}, m.values);
}

}  // namespace jegauge
