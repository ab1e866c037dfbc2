#include "jegauge/refmaps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "jegauge/error.hpp"
#include "jegauge/gradcam.hpp"

namespace jegauge {

Tensor FlowField::to_tensor() const {
  std::vector<float> data(u.values);
  data.insert(data.end(), v.values.begin(), v.values.end());
  return Tensor({2, static_cast<std::uint32_t>(u.height), static_cast<std::uint32_t>(u.width)}, std::move(data));
}

FlowField FlowField::from_tensor(const Tensor& t) {
  if (t.rank() != 3 || t.shape()[0] != 2) throw Error(ErrorKind::Dimension, "flow tensor must be [2, H, W]");
  const int h = static_cast<int>(t.shape()[1]);
  const int w = static_cast<int>(t.shape()[2]);
  const auto d = t.f32();
  const auto n = static_cast<std::size_t>(h) * w;
  for (float x : d) {
    if (!std::isfinite(x)) throw Error(ErrorKind::Numeric, "non-finite flow component");
  }
  return {Map2D(h, w, std::vector<float>(d.begin(), d.begin() + n)),
          Map2D(h, w, std::vector<float>(d.begin() + n, d.end()))};
}

namespace {

struct Derivatives {
  std::vector<double> ix, iy, it;
};

Derivatives image_derivatives(const Frame& f0, const Frame& f1) {
  const int w = f0.width;
  const int h = f0.height;
  const auto n = static_cast<std::size_t>(w) * h;
  Derivatives d{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  auto px = [](const Frame& f, int x, int y) {
    return static_cast<double>(f.at(std::clamp(y, 0, f.height - 1), std::clamp(x, 0, f.width - 1)));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto p = static_cast<std::size_t>(y) * w + x;
      d.ix[p] = 0.25 * (px(f0, x + 1, y) - px(f0, x - 1, y) + px(f1, x + 1, y) - px(f1, x - 1, y));
      d.iy[p] = 0.25 * (px(f0, x, y + 1) - px(f0, x, y - 1) + px(f1, x, y + 1) - px(f1, x, y - 1));
      d.it[p] = px(f1, x, y) - px(f0, x, y);
    }
  }
  return d;
}

void check_pair(const Frame& f0, const Frame& f1) {
  if (f0.channels != 1 || f1.channels != 1) throw Error(ErrorKind::Dimension, "optical flow expects gray frames");
  if (f0.height != f1.height || f0.width != f1.width) throw Error(ErrorKind::Dimension, "frame extents differ");
}

}  // namespace

FlowField horn_schunck_flow(const Frame& f0, const Frame& f1, const HornSchunckParams& params) {
  check_pair(f0, f1);
  if (params.iterations < 1) throw Error(ErrorKind::InvalidInput, "iterations must be >= 1");
  if (!(params.smoothness > 0.0)) throw Error(ErrorKind::InvalidInput, "smoothness must be > 0");

  const int w = f0.width;
  const int h = f0.height;
  const auto d = image_derivatives(f0, f1);
  std::vector<double> u(d.ix.size(), 0.0);
  std::vector<double> v(d.ix.size(), 0.0);

  for (int it = 0; it < params.iterations; ++it) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double su = 0.0;
        double sv = 0.0;
        int nb = 0;
        auto visit = [&](int xx, int yy) {
          if (xx < 0 || yy < 0 || xx >= w || yy >= h) return;
          const auto q = static_cast<std::size_t>(yy) * w + xx;
          su += u[q];
          sv += v[q];
          ++nb;
        };
        visit(x + 1, y);
        visit(x - 1, y);
        visit(x, y + 1);
        visit(x, y - 1);
        const auto p = static_cast<std::size_t>(y) * w + x;
        if (nb == 0) {
          // 1x1 frame: no smoothness neighbors, pure data term.
          const double g2 = d.ix[p] * d.ix[p] + d.iy[p] * d.iy[p];
          const double t = g2 > 0.0 ? d.it[p] / g2 : 0.0;
          u[p] = -d.ix[p] * t;
          v[p] = -d.iy[p] * t;
          continue;
        }
        const double ub = su / nb;
        const double vb = sv / nb;
        const double beta = params.smoothness * nb / 4.0;
        const double t = (d.ix[p] * ub + d.iy[p] * vb + d.it[p]) / (beta + d.ix[p] * d.ix[p] + d.iy[p] * d.iy[p]);
        u[p] = ub - d.ix[p] * t;
        v[p] = vb - d.iy[p] * t;
      }
    }
  }

  FlowField out{Map2D(h, w), Map2D(h, w)};
  for (std::size_t p = 0; p < u.size(); ++p) {
    out.u.values[p] = static_cast<float>(u[p]);
    out.v.values[p] = static_cast<float>(v[p]);
  }
  return out;
}

double horn_schunck_energy(const Frame& f0, const Frame& f1, const FlowField& flow, double smoothness) {
  check_pair(f0, f1);
  if (!flow.u.same_extent(flow.v) || flow.u.height != f0.height || flow.u.width != f0.width) {
    throw Error(ErrorKind::Dimension, "flow extents do not match the frames");
  }
  const auto d = image_derivatives(f0, f1);
  const int w = f0.width;
  const int h = f0.height;
  double data = 0.0;
  double smooth = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto p = static_cast<std::size_t>(y) * w + x;
      const double u = flow.u.values[p];
      const double v = flow.v.values[p];
      const double r = d.ix[p] * u + d.iy[p] * v + d.it[p];
      data += r * r;
      if (x + 1 < w) {
        const double du = flow.u.values[p + 1] - u;
        const double dv = flow.v.values[p + 1] - v;
        smooth += du * du + dv * dv;
      }
      if (y + 1 < h) {
        const double du = flow.u.values[p + w] - u;
        const double dv = flow.v.values[p + w] - v;
        smooth += du * du + dv * dv;
      }
    }
  }
  return data + smoothness / 4.0 * smooth;
}

MotionMap flow_magnitude(const FlowField& flow) {
  if (!flow.u.same_extent(flow.v)) throw Error(ErrorKind::Dimension, "flow components differ in extent");
  Map2D mag(flow.u.height, flow.u.width);
  for (std::size_t p = 0; p < mag.size(); ++p) {
    mag.values[p] = static_cast<float>(std::hypot(static_cast<double>(flow.u.values[p]), flow.v.values[p]));
  }
  return normalize_map(mag);
}

SegmentMaskSet::SegmentMaskSet(int h, int w, std::vector<std::uint8_t> l) : height(h), width(w), labels(std::move(l)) {
  if (h < 1 || w < 1) throw Error(ErrorKind::Dimension, "mask extents must be >= 1");
  if (labels.size() != static_cast<std::size_t>(h) * w) throw Error(ErrorKind::Dimension, "mask data length mismatch");
  for (auto id : labels) {
    if (id >= kSegmentCount) {
      throw Error(ErrorKind::Validation, "segment id " + std::to_string(id) + " outside the taxonomy 0..5");
    }
  }
}

SegmentMaskSet SegmentMaskSet::background(int h, int w) {
  return SegmentMaskSet(h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w, kBackground));
}

SegmentMaskSet SegmentMaskSet::from_tensor(const Tensor& t) {
  if (t.rank() != 2) throw Error(ErrorKind::Dimension, "segment mask must be [H, W]");
  const auto d = t.u8();
  return SegmentMaskSet(static_cast<int>(t.shape()[0]), static_cast<int>(t.shape()[1]),
                        std::vector<std::uint8_t>(d.begin(), d.end()));
}

Tensor SegmentMaskSet::to_tensor() const {
  return Tensor({static_cast<std::uint32_t>(height), static_cast<std::uint32_t>(width)}, labels);
}

PartWeightTable PartWeightTable::defaults() {
  PartWeightTable t;
  // nose, eyes, ears, shoulders, elbows, wrists
  for (std::size_t j = 0; j <= 10; ++j) t.keypoint_weights[j] = 1.0f;
  t.keypoint_weights[11] = t.keypoint_weights[12] = 0.6f;
  for (std::size_t j = 13; j < kCocoKeypoints; ++j) t.keypoint_weights[j] = 0.3f;
  t.segment_weights = {0.0f, 0.9f, 0.8f, 0.8f, 0.9f, 0.3f};
  return t;
}

PartWeightTable parse_weight_table(const nlohmann::json& doc) {
  auto read = [&doc](const char* key, auto& dst) {
    if (!doc.is_object() || !doc.contains(key)) throw Error(ErrorKind::Validation, std::string(key) + ": missing");
    const auto& arr = doc.at(key);
    if (!arr.is_array() || arr.size() != dst.size()) {
      throw Error(ErrorKind::Validation, std::string(key) + ": expected " + std::to_string(dst.size()));
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (!arr[i].is_number()) throw Error(ErrorKind::Validation, std::string(key) + ": expected numbers");
      const double v = arr[i].get<double>();
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::Validation, std::string(key) + ": weights must lie in [0, 1]");
      dst[i] = static_cast<float>(v);
    }
  };
  PartWeightTable t;
  read("keypoint_weights", t.keypoint_weights);
  read("segment_weights", t.segment_weights);
  return t;
}

PartWeightTable read_weight_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return parse_weight_table(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Validation, path.string() + ": malformed JSON: " + e.what());
  }
}

nlohmann::json weight_table_to_json(const PartWeightTable& w) {
  return {{"keypoint_weights", w.keypoint_weights}, {"segment_weights", w.segment_weights}};
}

double default_sigma(int width) { return 6.0 * width / 224.0; }

Map2D keypoint_heatmap(std::span<const KeypointSet> sets, const PartWeightTable& weights, double sigma, int width,
                       int height) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidInput, "sigma must be > 0");
  Map2D heat(height, width);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (const auto& set : sets) {
    for (std::size_t j = 0; j < kCocoKeypoints; ++j) {
      const auto& kp = set.points[j];
      const double amp = static_cast<double>(weights.keypoint_weights[j]) * kp.confidence;
      if (amp <= 0.0) continue;
      for (int y = 0; y < height; ++y) {
        const double dy = y - static_cast<double>(kp.y);
        for (int x = 0; x < width; ++x) {
          const double dx = x - static_cast<double>(kp.x);
          const auto val = static_cast<float>(std::min(1.0, amp * std::exp(-(dx * dx + dy * dy) * inv)));
          float& cell = heat.at(y, x);
          cell = std::max(cell, val);
        }
      }
    }
  }
  return heat;
}

SemanticReferenceMap combine_semantic(const Map2D& heat, const SegmentMaskSet& seg, const PartWeightTable& weights) {
  if (heat.height != seg.height || heat.width != seg.width) {
    throw Error(ErrorKind::Dimension, "heatmap and segment mask extents differ");
  }
  SemanticReferenceMap out(heat.height, heat.width);
  for (std::size_t p = 0; p < heat.size(); ++p) {
    const auto id = seg.labels[p];
    const float h = std::clamp(heat.values[p], 0.0f, 1.0f);
    out.values[p] = id == kBackground ? h : std::max(h, weights.segment_weights[id]);
  }
  return out;
}

}  // namespace jegauge
