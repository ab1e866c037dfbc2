#include "jegauge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "jegauge/error.hpp"

namespace jegauge {

namespace {

std::uint8_t round_pixel(double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); }

}  // namespace

Frame apply_cutout(const Frame& f, std::span<const RegionBox> boxes, const std::set<Part>& parts) {
  Frame out = f;
  for (const auto& b : boxes) {
    if (!parts.count(b.part)) continue;
    check_boxes_inside(FrameEntry{0, {b}, {}}, f.width, f.height);
    for (int y = b.y; y < b.y + b.h; ++y) {
      for (int x = b.x; x < b.x + b.w; ++x) {
        for (int c = 0; c < f.channels; ++c) out.at(y, x, c) = 0;
      }
    }
  }
  return out;
}

std::vector<bool> foreground_from_mask(const SegmentMaskSet& seg) {
  std::vector<bool> fg(seg.labels.size());
  for (std::size_t p = 0; p < fg.size(); ++p) fg[p] = seg.labels[p] != kBackground;
  return fg;
}

std::vector<bool> foreground_from_boxes(std::span<const RegionBox> boxes, int width, int height) {
  std::vector<bool> fg(static_cast<std::size_t>(width) * height, false);
  for (const auto& b : boxes) {
    check_boxes_inside(FrameEntry{0, {b}, {}}, width, height);
    for (int y = b.y; y < b.y + b.h; ++y) {
      for (int x = b.x; x < b.x + b.w; ++x) fg[static_cast<std::size_t>(y) * width + x] = true;
    }
  }
  return fg;
}

Frame box_blur(const Frame& f, int radius) {
  if (radius < 1) throw Error(ErrorKind::InvalidInput, "blur radius must be >= 1");
  Frame out(f.height, f.width, f.channels);
  for (int y = 0; y < f.height; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(f.height - 1, y + radius);
    for (int x = 0; x < f.width; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(f.width - 1, x + radius);
      const int n = (y1 - y0 + 1) * (x1 - x0 + 1);
      for (int c = 0; c < f.channels; ++c) {
        int sum = 0;
        for (int yy = y0; yy <= y1; ++yy) {
          for (int xx = x0; xx <= x1; ++xx) sum += f.at(yy, xx, c);
        }
        out.at(y, x, c) = round_pixel(static_cast<double>(sum) / n);
      }
    }
  }
  return out;
}

Frame resize_bilinear(const Frame& f, int width, int height) {
  if (width < 1 || height < 1) throw Error(ErrorKind::Dimension, "resize target extents must be >= 1");
  if (width == f.width && height == f.height) return f;
  Frame out(height, width, f.channels);
  const double sx = static_cast<double>(f.width) / width;
  const double sy = static_cast<double>(f.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(f.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, f.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(f.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, f.width - 1);
      const double tx = fx - x0;
      for (int c = 0; c < f.channels; ++c) {
        const double top = f.at(y0, x0, c) + tx * (f.at(y0, x1, c) - f.at(y0, x0, c));
        const double bot = f.at(y1, x0, c) + tx * (f.at(y1, x1, c) - f.at(y1, x0, c));
        out.at(y, x, c) = round_pixel(top + ty * (bot - top));
      }
    }
  }
  return out;
}

Frame apply_background(const Frame& f, const std::vector<bool>& foreground, const BackgroundOp& op) {
  const auto n = static_cast<std::size_t>(f.width) * f.height;
  if (foreground.size() != n) throw Error(ErrorKind::Dimension, "foreground mask does not match frame extents");

  Frame replacement;
  if (const auto* solid = std::get_if<BgSolid>(&op)) {
    replacement = Frame(f.height, f.width, f.channels);
    const std::uint8_t rgb[3] = {solid->r, solid->g, solid->b};
    const std::uint8_t gray = round_pixel(0.299 * solid->r + 0.587 * solid->g + 0.114 * solid->b);
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        for (int c = 0; c < f.channels; ++c) replacement.at(y, x, c) = f.channels == 3 ? rgb[c] : gray;
      }
    }
  } else if (const auto* image = std::get_if<BgImage>(&op)) {
    if (image->image.pixels.empty()) throw Error(ErrorKind::Resource, "background replacement image is missing");
    Frame src = image->image;
    if (src.channels != f.channels) {
      if (f.channels == 1) {
        src = to_gray(src);
      } else {
        Frame rgb(src.height, src.width, 3);
        for (std::size_t p = 0; p < src.pixels.size(); ++p) {
          rgb.pixels[3 * p] = rgb.pixels[3 * p + 1] = rgb.pixels[3 * p + 2] = src.pixels[p];
        }
        src = std::move(rgb);
      }
    }
    replacement = resize_bilinear(src, f.width, f.height);
  } else {
    replacement = box_blur(f, std::get<BgBlur>(op).radius);
  }

  Frame out = f;
  for (std::size_t p = 0; p < n; ++p) {
    if (foreground[p]) continue;
    for (int c = 0; c < f.channels; ++c) out.pixels[p * f.channels + c] = replacement.pixels[p * f.channels + c];
  }
  return out;
}

double GaussianSource::uniform_open() {
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianSource::next() {
  if (spare_) {
    const double s = *spare_;
    spare_.reset();
    return s;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Frame add_gaussian_noise(const Frame& f, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidInput, "noise sigma must be >= 0");
  if (sigma == 0.0) return f;
  GaussianSource gen(seed);
  Frame out = f;
  for (auto& px : out.pixels) px = round_pixel(px + sigma * gen.next());
  return out;
}

namespace {

void check_degrees(double degrees) {
  if (!(degrees > -180.0 && degrees <= 180.0)) throw Error(ErrorKind::InvalidInput, "degrees must lie in (-180, 180]");
}

// Exact values at quarter turns keep those rotations pure permutations.
std::pair<double, double> rotation_terms(double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  auto snap = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : (std::abs(std::abs(v) - 1.0) < 1e-12 ? std::copysign(1.0, v) : v); };
  return {snap(std::cos(rad)), snap(std::sin(rad))};
}

}  // namespace

Frame rotate(const Frame& f, double degrees) {
  check_degrees(degrees);
  if (degrees == 0.0) return f;
  const auto [cs, sn] = rotation_terms(degrees);

  const double cx = (f.width - 1) / 2.0;
  const double cy = (f.height - 1) / 2.0;
  constexpr double kEdge = 1e-6;
  Frame out(f.height, f.width, f.channels);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      double sxp = cx + cs * dx - sn * dy;
      double syp = cy + sn * dx + cs * dy;
      if (sxp < -kEdge || syp < -kEdge || sxp > f.width - 1 + kEdge || syp > f.height - 1 + kEdge) continue;
      sxp = std::clamp(sxp, 0.0, static_cast<double>(f.width - 1));
      syp = std::clamp(syp, 0.0, static_cast<double>(f.height - 1));
      const int x0 = static_cast<int>(sxp);
      const int y0 = static_cast<int>(syp);
      const int x1 = std::min(x0 + 1, f.width - 1);
      const int y1 = std::min(y0 + 1, f.height - 1);
      const double tx = sxp - x0;
      const double ty = syp - y0;
      for (int c = 0; c < f.channels; ++c) {
        const double top = f.at(y0, x0, c) + tx * (f.at(y0, x1, c) - f.at(y0, x0, c));
        const double bot = f.at(y1, x0, c) + tx * (f.at(y1, x1, c) - f.at(y1, x0, c));
        out.at(y, x, c) = round_pixel(top + ty * (bot - top));
      }
    }
  }
  return out;
}

Frame hflip(const Frame& f) {
  Frame out(f.height, f.width, f.channels);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      for (int c = 0; c < f.channels; ++c) out.at(y, f.width - 1 - x, c) = f.at(y, x, c);
    }
  }
  return out;
}

std::size_t mirrored_keypoint(std::size_t j) {
  if (j == 0) return 0;
  // Pairs (1,2), (3,4), ..., (15,16): odd = left, even = right.
  return j % 2 == 1 ? j + 1 : j - 1;
}

FrameEntry hflip(const FrameEntry& entry, int width) {
  FrameEntry out = entry;
  for (auto& b : out.boxes) b.x = width - b.x - b.w;
  for (std::size_t s = 0; s < entry.keypoints.size(); ++s) {
    for (std::size_t j = 0; j < kCocoKeypoints; ++j) {
      auto kp = entry.keypoints[s].points[j];
      kp.x = static_cast<float>(static_cast<double>(width - 1) - kp.x);
      out.keypoints[s].points[mirrored_keypoint(j)] = kp;
    }
  }
  return out;
}

std::size_t BalancePlan::total_duplicates() const {
  std::size_t t = 0;
  for (const auto& [_, d] : duplicates) t += d;
  return t;
}

namespace {

constexpr Label kLabels[] = {Label::Low, Label::Mid, Label::High};

std::map<Label, std::vector<std::string>> group_sorted(std::span<const LabelRecord> records, const char* source) {
  std::map<Label, std::vector<std::string>> by;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.clip_id).second) {
      throw Error(ErrorKind::InvalidInput, std::string("duplicate clip_id ") + r.clip_id + " in " + source);
    }
    by[r.label].push_back(r.clip_id);
  }
  for (auto& [_, ids] : by) std::sort(ids.begin(), ids.end());
  return by;
}

}  // namespace

BalancePlan plan_balance(std::span<const LabelRecord> records) {
  if (records.empty()) throw Error(ErrorKind::InvalidInput, "no label records");
  auto by = group_sorted(records, "labels");
  std::size_t target = 0;
  for (auto l : kLabels) {
    if (by[l].empty()) throw Error(ErrorKind::InvalidInput, "label " + std::string(to_string(l)) + " has no clips");
    target = std::max(target, by[l].size());
  }
  BalancePlan plan;
  for (auto l : kLabels) {
    const auto& ids = by[l];
    const std::size_t dup = target - ids.size();
    plan.original[l] = ids.size();
    plan.duplicates[l] = dup;
    const std::size_t per = dup / ids.size();
    const std::size_t extra = dup % ids.size();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t copies = per + (i < extra ? 1 : 0);
      if (copies > 0) plan.assignments.emplace_back(ids[i], copies);
    }
  }
  return plan;
}

std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorKind::InvalidInput, "empty sampling range");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % bound;
  }
}

MixPlan plan_mix(std::span<const LabelRecord> a, std::span<const LabelRecord> b, std::size_t total,
                 std::uint64_t seed) {
  auto by_a = group_sorted(a, "source a");
  auto by_b = group_sorted(b, "source b");
  MixPlan plan;
  plan.seed = seed;
  std::size_t li = 0;
  for (auto l : kLabels) {
    const std::size_t quota = total / 3 + (li++ < total % 3 ? 1 : 0);
    plan.from_a[l] = (quota + 1) / 2;
    plan.from_b[l] = quota / 2;
  }

  std::mt19937_64 engine(seed);
  auto draw = [&](std::map<Label, std::vector<std::string>>& by, const std::map<Label, std::size_t>& want,
                  Source src) {
    for (auto l : kLabels) {
      auto& ids = by[l];
      const std::size_t k = want.at(l);
      if (ids.size() < k) {
        throw Error(ErrorKind::Quota, "label " + std::string(to_string(l)) + " needs " + std::to_string(k) +
                                          " clips from source " + (src == Source::A ? "a" : "b") + " but only " +
                                          std::to_string(ids.size()) + " are available");
      }
      // Partial Fisher-Yates: the first k slots become the sample.
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_below(engine, ids.size() - i);
        std::swap(ids[i], ids[j]);
      }
      std::vector<std::string> chosen(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(chosen.begin(), chosen.end());
      for (auto& id : chosen) plan.selections.emplace_back(std::move(id), src);
    }
  };
  draw(by_a, plan.from_a, Source::A);
  draw(by_b, plan.from_b, Source::B);
  return plan;
}

FrameEntry rotate(const FrameEntry& entry, double degrees, int width, int height) {
  check_degrees(degrees);
  if (degrees == 0.0) return entry;
  const auto [cs, sn] = rotation_terms(degrees);
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;
  // Inverse of the sampling map used for pixels: source -> destination.
  auto forward = [&, cs = cs, sn = sn](double x, double y) {
    const double dx = x - cx;
    const double dy = y - cy;
    return std::pair{cx + cs * dx + sn * dy, cy - sn * dx + cs * dy};
  };

  FrameEntry out = entry;
  out.boxes.clear();
  for (const auto& b : entry.boxes) {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    for (const double px : {b.x - 0.5, b.x + b.w - 0.5}) {
      for (const double py : {b.y - 0.5, b.y + b.h - 0.5}) {
        const auto [qx, qy] = forward(px, py);
        x0 = std::min(x0, qx);
        x1 = std::max(x1, qx);
        y0 = std::min(y0, qy);
        y1 = std::max(y1, qy);
      }
    }
    const int left = std::max(0, static_cast<int>(std::floor(x0 + 0.5 + 1e-9)));
    const int top = std::max(0, static_cast<int>(std::floor(y0 + 0.5 + 1e-9)));
    const int right = std::min(width, static_cast<int>(std::ceil(x1 + 0.5 - 1e-9)));
    const int bottom = std::min(height, static_cast<int>(std::ceil(y1 + 0.5 - 1e-9)));
    if (right <= left || bottom <= top) continue;
    out.boxes.push_back({b.role, b.part, left, top, right - left, bottom - top});
  }
  for (auto& set : out.keypoints) {
    for (auto& kp : set.points) {
      const auto [qx, qy] = forward(kp.x, kp.y);
      kp.x = static_cast<float>(qx);
      kp.y = static_cast<float>(qy);
      if (qx < 0 || qy < 0 || qx > width - 1 || qy > height - 1) kp.confidence = 0.0f;
    }
  }
  return out;
}

}  // namespace jegauge
