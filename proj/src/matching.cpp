#include "jegauge/matching.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "jegauge/error.hpp"

namespace jegauge {

using nlohmann::json;

int bin_of(float value, int bins) {
  return std::min(bins - 1, static_cast<int>(std::floor(static_cast<double>(value) * bins)));
}

Histogram2D joint_histogram(const Map2D& a, const Map2D& b, int bins) {
  if (!a.same_extent(b)) throw Error(ErrorKind::Dimension, "histogram inputs differ in extent");
  if (bins < 2) throw Error(ErrorKind::InvalidInput, "bins must be >= 2");
  Histogram2D h;
  h.bins = bins;
  h.counts.assign(static_cast<std::size_t>(bins) * bins, 0);
  for (std::size_t p = 0; p < a.size(); ++p) {
    const float va = a.values[p];
    const float vb = b.values[p];
    if (!(va >= 0.0f && va <= 1.0f && vb >= 0.0f && vb <= 1.0f)) {
      throw Error(ErrorKind::Range, "histogram input outside [0, 1]");
    }
    ++h.counts[static_cast<std::size_t>(bin_of(va, bins)) * bins + bin_of(vb, bins)];
  }
  h.total = a.size();
  h.joint_p.resize(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    h.joint_p[i] = h.total ? static_cast<double>(h.counts[i]) / static_cast<double>(h.total) : 0.0;
  }
  return h;
}

namespace {

std::vector<double> row_marginal(const Histogram2D& h) {
  std::vector<double> m(h.bins, 0.0);
  for (int i = 0; i < h.bins; ++i) {
    std::uint64_t c = 0;
    for (int j = 0; j < h.bins; ++j) c += h.count(i, j);
    m[i] = static_cast<double>(c) / static_cast<double>(h.total);
  }
  return m;
}

std::vector<double> col_marginal(const Histogram2D& h) {
  std::vector<double> m(h.bins, 0.0);
  for (int j = 0; j < h.bins; ++j) {
    std::uint64_t c = 0;
    for (int i = 0; i < h.bins; ++i) c += h.count(i, j);
    m[j] = static_cast<double>(c) / static_cast<double>(h.total);
  }
  return m;
}

}  // namespace

double mutual_information(const Histogram2D& h) {
  if (h.total == 0) throw Error(ErrorKind::UndefinedInput, "mutual information of an empty histogram");
  const auto pa = row_marginal(h);
  const auto pb = col_marginal(h);
  double mi = 0.0;
  for (int i = 0; i < h.bins; ++i) {
    for (int j = 0; j < h.bins; ++j) {
      const double pij = h.p(i, j);
      if (pij > 0.0) mi += pij * std::log(pij / (pa[i] * pb[j]));
    }
  }
  // Rounding can leave a tiny negative residue for independent inputs.
  return std::max(0.0, mi);
}

double marginal_entropy(const Histogram2D& h) {
  if (h.total == 0) throw Error(ErrorKind::UndefinedInput, "entropy of an empty histogram");
  double e = 0.0;
  for (double p : row_marginal(h)) {
    if (p > 0.0) e -= p * std::log(p);
  }
  return e;
}

PixelDistribution image_softmax(const Map2D& img) {
  if (img.values.empty()) throw Error(ErrorKind::Dimension, "softmax of an empty image");
  const auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
  if (!std::isfinite(*lo) || !std::isfinite(*hi)) throw Error(ErrorKind::Numeric, "non-finite pixel value");
  const double mn = *lo;
  const double range = static_cast<double>(*hi) - mn;
  PixelDistribution d{img.height, img.width, std::vector<double>(img.size())};
  double z = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double x = range > 0.0 ? (img.values[i] - mn) / range : 0.0;
    d.probs[i] = std::exp(x - 1.0);
    z += d.probs[i];
  }
  for (auto& p : d.probs) p /= z;
  return d;
}

double cross_entropy(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorKind::Dimension, "distributions differ in length");
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(q[i]);
  }
  return h;
}

double cross_entropy(const PixelDistribution& p, const PixelDistribution& q) {
  return cross_entropy(std::span<const double>(p.probs), std::span<const double>(q.probs));
}

namespace {

void check_box(const RegionBox& box, int height, int width) {
  if (box.w <= 0 || box.h <= 0 || box.x < 0 || box.y < 0 || static_cast<long long>(box.x) + box.w > width ||
      static_cast<long long>(box.y) + box.h > height) {
    throw Error(ErrorKind::Bounds, "box (" + std::to_string(box.x) + ", " + std::to_string(box.y) + ", " +
                                       std::to_string(box.w) + ", " + std::to_string(box.h) + ") outside " +
                                       std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

Map2D crop_region(const Map2D& m, const RegionBox& box) {
  check_box(box, m.height, m.width);
  Map2D out(box.h, box.w);
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) out.at(y, x) = m.at(box.y + y, box.x + x);
  }
  return out;
}

PixelDistribution crop_region(const PixelDistribution& d, const RegionBox& box) {
  check_box(box, d.height, d.width);
  PixelDistribution out{box.h, box.w, std::vector<double>(static_cast<std::size_t>(box.h) * box.w)};
  double z = 0.0;
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      const double p = d.at(box.y + y, box.x + x);
      out.probs[static_cast<std::size_t>(y) * box.w + x] = p;
      z += p;
    }
  }
  if (!(z > 0.0)) throw Error(ErrorKind::UndefinedInput, "cropped region carries no probability mass");
  for (auto& p : out.probs) p /= z;
  return out;
}

void ScoringConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must lie in [0, 1]");
  if (bins < 2) throw Error(ErrorKind::InvalidInput, "bins must be >= 2");
}

std::string_view to_string(Metric m) { return m == Metric::MI ? "mi" : "ce"; }

RegionScore score_frame(const SaliencyMap& cam, const MotionMap& motion, const SemanticReferenceMap& semantic,
                        std::span<const RegionBox> boxes, const ScoringConfig& cfg) {
  cfg.validate();
  if (!cam.same_extent(motion) || !cam.same_extent(semantic)) {
    throw Error(ErrorKind::Dimension, "Grad-CAM, motion and semantic maps must share extents");
  }
  const double a = cfg.alpha;
  const auto cam_d = image_softmax(cam);
  const auto motion_d = image_softmax(motion);
  const auto semantic_d = image_softmax(semantic);

  RegionScore score;
  for (const auto& box : boxes) {
    if (!cfg.roles.count(box.role) || !cfg.parts.count(box.part)) continue;
    const auto cam_c = crop_region(cam, box);
    const auto motion_c = crop_region(motion, box);
    const auto semantic_c = crop_region(semantic, box);

    RegionDetail r;
    r.mi_motion = mutual_information(joint_histogram(cam_c, motion_c, cfg.bins));
    r.mi_semantic = mutual_information(joint_histogram(cam_c, semantic_c, cfg.bins));
    r.mi = a * r.mi_motion + (1.0 - a) * r.mi_semantic;

    const auto cam_p = crop_region(cam_d, box);
    r.ce_motion = cross_entropy(crop_region(motion_d, box), cam_p);
    r.ce_semantic = cross_entropy(crop_region(semantic_d, box), cam_p);
    r.ce = a * r.ce_motion + (1.0 - a) * r.ce_semantic;

    score[{box.role, box.part}] = r;
  }
  return score;
}

ClipScoreReport score_clip(const std::string& clip_id, std::span<const FrameInput> frames, const ScoringConfig& cfg,
                           int jobs) {
  if (frames.empty()) throw Error(ErrorKind::UndefinedInput, "clip has no frames to score");
  cfg.validate();

  std::vector<RegionScore> results(frames.size());
  std::vector<std::exception_ptr> errors(frames.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < frames.size(); i = next++) {
      try {
        const auto& f = frames[i];
        results[i] = score_frame(f.cam, f.motion, f.semantic, f.boxes, cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_workers = static_cast<std::size_t>(std::clamp(jobs, 1, static_cast<int>(frames.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ClipScoreReport report;
  report.clip_id = clip_id;
  report.config = cfg;
  for (std::size_t i = 0; i < frames.size(); ++i) report.frames.push_back({frames[i].index, std::move(results[i])});

  std::set<RegionKey> keys;
  for (const auto& f : report.frames) {
    for (const auto& [k, _] : f.scores) keys.insert(k);
  }
  for (auto metric : {Metric::MI, Metric::CE}) {
    for (const auto& key : keys) {
      AggregateStat s;
      s.frames = static_cast<int>(report.frames.size());
      double sum = 0.0;
      for (const auto& f : report.frames) {
        if (auto it = f.scores.find(key); it != f.scores.end()) {
          sum += it->second.value(metric);
          ++s.present;
        }
      }
      s.mean = sum / s.present;
      double ss = 0.0;
      for (const auto& f : report.frames) {
        if (auto it = f.scores.find(key); it != f.scores.end()) {
          const double d = it->second.value(metric) - s.mean;
          ss += d * d;
        }
      }
      s.std = std::sqrt(ss / s.present);
      report.aggregate[metric][key] = s;
    }
  }
  return report;
}

namespace {

json roles_json(const std::set<Role>& roles) {
  json a = json::array();
  for (auto r : roles) a.push_back(to_string(r));
  return a;
}

json parts_json(const std::set<Part>& parts) {
  json a = json::array();
  for (auto p : parts) a.push_back(to_string(p));
  return a;
}

[[noreturn]] void bad_report(const std::string& what) { throw Error(ErrorKind::Validation, "report: " + what); }

RegionKey parse_key(const std::string& role, const std::string& part) {
  const auto r = parse_role(role);
  const auto p = parse_part(part);
  if (!r || !p) bad_report("unknown role/part " + role + "/" + part);
  return {*r, *p};
}

Metric parse_metric(const std::string& m) {
  if (m == "mi") return Metric::MI;
  if (m == "ce") return Metric::CE;
  bad_report("unknown metric " + m);
}

}  // namespace

json report_to_json(const ClipScoreReport& r) {
  json doc;
  doc["clip_id"] = r.clip_id;
  if (!r.variant.empty()) doc["variant"] = r.variant;
  doc["config"] = {{"alpha", r.config.alpha},
                   {"bins", r.config.bins},
                   {"roles", roles_json(r.config.roles)},
                   {"parts", parts_json(r.config.parts)}};
  doc["frames"] = json::array();
  for (const auto& f : r.frames) {
    json scores = {{"mi", json::object()}, {"ce", json::object()}};
    for (const auto& [key, d] : f.scores) {
      const std::string role(to_string(key.first));
      const std::string part(to_string(key.second));
      scores["mi"][role][part] = d.mi;
      scores["ce"][role][part] = d.ce;
    }
    doc["frames"].push_back({{"index", f.index}, {"scores", scores}});
  }
  json agg = {{"mi", json::object()}, {"ce", json::object()}};
  for (const auto& [metric, by_key] : r.aggregate) {
    for (const auto& [key, s] : by_key) {
      agg[std::string(to_string(metric))][std::string(to_string(key.first))][std::string(to_string(key.second))] = {
          {"mean", s.mean}, {"std", s.std}, {"coverage", s.coverage()}, {"present", s.present}, {"frames", s.frames}};
    }
  }
  doc["aggregate"] = agg;
  return doc;
}

ClipScoreReport report_from_json(const json& doc) {
  ClipScoreReport r;
  try {
    r.clip_id = doc.at("clip_id").get<std::string>();
    r.variant = doc.value("variant", std::string());
    const auto& cfg = doc.at("config");
    r.config.alpha = cfg.at("alpha").get<double>();
    r.config.bins = cfg.at("bins").get<int>();
    if (cfg.contains("roles")) {
      r.config.roles.clear();
      for (const auto& s : cfg["roles"]) r.config.roles.insert(parse_key(s.get<std::string>(), "face").first);
    }
    if (cfg.contains("parts")) {
      r.config.parts.clear();
      for (const auto& s : cfg["parts"]) r.config.parts.insert(parse_key("parent", s.get<std::string>()).second);
    }
    for (const auto& f : doc.at("frames")) {
      FrameScore fs;
      fs.index = f.at("index").get<int>();
      const auto& scores = f.at("scores");
      for (const auto& [role, by_part] : scores.at("mi").items()) {
        for (const auto& [part, v] : by_part.items()) fs.scores[parse_key(role, part)].mi = v.get<double>();
      }
      for (const auto& [role, by_part] : scores.at("ce").items()) {
        for (const auto& [part, v] : by_part.items()) fs.scores[parse_key(role, part)].ce = v.get<double>();
      }
      r.frames.push_back(std::move(fs));
    }
    for (const auto& [metric, by_role] : doc.at("aggregate").items()) {
      for (const auto& [role, by_part] : by_role.items()) {
        for (const auto& [part, s] : by_part.items()) {
          AggregateStat st;
          st.mean = s.at("mean").get<double>();
          st.std = s.at("std").get<double>();
          st.present = s.at("present").get<int>();
          st.frames = s.at("frames").get<int>();
          r.aggregate[parse_metric(metric)][parse_key(role, part)] = st;
        }
      }
    }
  } catch (const json::exception& e) {
    bad_report(e.what());
  }
  r.config.validate();
  return r;
}

}  // namespace jegauge
