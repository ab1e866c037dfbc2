#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "jegauge/annotation.hpp"
#include "jegauge/image.hpp"

namespace jegauge {

struct Histogram2D {
  int bins = 0;
  std::uint64_t total = 0;
  std::vector<std::uint64_t> counts;  // bins x bins, row = first input
  std::vector<double> joint_p;

  std::uint64_t count(int i, int j) const { return counts[static_cast<std::size_t>(i) * bins + j]; }
  double p(int i, int j) const { return joint_p[static_cast<std::size_t>(i) * bins + j]; }
};

/// Bin index for a value in [0, 1]: uniform edges, top edge inclusive.
int bin_of(float value, int bins);

/// Joint intensity histogram of two equally sized [0, 1] maps.
Histogram2D joint_histogram(const Map2D& a, const Map2D& b, int bins);

/// Mutual information in nats over cells with nonzero joint probability.
double mutual_information(const Histogram2D& h);

/// Shannon entropy (nats) of the first input's marginal.
double marginal_entropy(const Histogram2D& h);

/// Flattened per-pixel probabilities that remember their 2-D extent so they
/// can be cropped.
struct PixelDistribution {
  int height = 0;
  int width = 0;
  std::vector<double> probs;

  double at(int y, int x) const { return probs[static_cast<std::size_t>(y) * width + x]; }
};

/// Min-max normalize, flatten row-major, unit-temperature softmax.
PixelDistribution image_softmax(const Map2D& img);

/// H(p, q) = -sum p_i ln q_i, nats.
double cross_entropy(const PixelDistribution& p, const PixelDistribution& q);
double cross_entropy(std::span<const double> p, std::span<const double> q);

Map2D crop_region(const Map2D& m, const RegionBox& box);
/// Crops and renormalizes so the probabilities again sum to one.
PixelDistribution crop_region(const PixelDistribution& d, const RegionBox& box);

struct ScoringConfig {
  double alpha = 0.5;
  int bins = 20;
  std::set<Role> roles{Role::Parent, Role::Child};
  std::set<Part> parts{Part::Face, Part::Body};

  void validate() const;
};

enum class Metric { MI, CE };
std::string_view to_string(Metric m);

/// Scores for one (role, part) region of one frame. `mi`/`ce` are the
/// alpha-blended values; the per-reference branches are kept alongside.
struct RegionDetail {
  double mi = 0.0;
  double ce = 0.0;
  double mi_motion = 0.0;
  double mi_semantic = 0.0;
  double ce_motion = 0.0;
  double ce_semantic = 0.0;

  double value(Metric m) const { return m == Metric::MI ? mi : ce; }
  friend bool operator==(const RegionDetail&, const RegionDetail&) = default;
};

using RegionKey = std::pair<Role, Part>;
using RegionScore = std::map<RegionKey, RegionDetail>;

/// One loop body of the evaluation algorithm: per box, MI on cropped raw
/// maps and CE on softmaxed-then-cropped maps, each blended as
/// alpha * motion + (1 - alpha) * semantic.
RegionScore score_frame(const SaliencyMap& cam, const MotionMap& motion, const SemanticReferenceMap& semantic,
                        std::span<const RegionBox> boxes, const ScoringConfig& cfg);

struct FrameInput {
  int index = 0;
  SaliencyMap cam;
  MotionMap motion;
  SemanticReferenceMap semantic;
  std::vector<RegionBox> boxes;
};

struct FrameScore {
  int index = 0;
  RegionScore scores;
};

struct AggregateStat {
  double mean = 0.0;
  double std = 0.0;  // population
  int present = 0;
  int frames = 0;

  double coverage() const { return frames == 0 ? 0.0 : static_cast<double>(present) / frames; }
};

struct ClipScoreReport {
  std::string clip_id;
  std::string variant;
  ScoringConfig config;
  std::vector<FrameScore> frames;
  std::map<Metric, std::map<RegionKey, AggregateStat>> aggregate;
};

/// Scores every frame (up to `jobs` in parallel) and reduces in input order.
ClipScoreReport score_clip(const std::string& clip_id, std::span<const FrameInput> frames, const ScoringConfig& cfg,
                           int jobs = 1);

nlohmann::json report_to_json(const ClipScoreReport& r);
ClipScoreReport report_from_json(const nlohmann::json& doc);

}  // namespace jegauge
