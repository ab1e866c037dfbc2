#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "jegauge/image.hpp"

namespace fixtures {

/// Gray frame with a Gaussian blob (amplitude 200 over a floor of 20).
inline jegauge::Frame gaussian_blob(int width, int height, double cx, double cy, double sigma) {
  jegauge::Frame f(height, width, 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      f.at(y, x) = static_cast<std::uint8_t>(std::lround(20.0 + 200.0 * std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma))));
    }
  }
  return f;
}

inline jegauge::Map2D random_unit_map(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  jegauge::Map2D m(h, w);
  for (auto& v : m.values) v = u(rng);
  return m;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("jegauge_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fixtures
