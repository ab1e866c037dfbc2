#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "jegauge/annotation.hpp"
#include "jegauge/matching.hpp"

namespace jegauge {

/// items x raters, row-major; complete (no missing cells).
struct RatingsMatrix {
  int items = 0;
  int raters = 0;
  std::vector<double> values;

  RatingsMatrix(int n_items, int n_raters, std::vector<double> v);
  double at(int item, int rater) const { return values[static_cast<std::size_t>(item) * raters + rater]; }
};

enum class IccForm { Single, Average };

/// Two-way mixed, consistency ICC: (BMS - EMS) / (BMS + (k - 1) EMS) for a
/// single rater, (BMS - EMS) / BMS for the rater average.
double icc_consistency(const RatingsMatrix& r, IccForm form);

struct RatingThresholds {
  double low = -0.5;
  double high = 0.5;
};

/// Strict inequalities: below `low` is low, above `high` is high.
Label class_from_rating(double mean_rating, RatingThresholds t = {});

struct PredictionRecord {
  std::string clip_id;
  std::array<double, 3> logits{};  // low, mid, high
  Label true_label = Label::Mid;
};

/// argmax with ties going to the lowest index.
std::size_t argmax_label(const std::array<double, 3>& logits);
double top1_accuracy(std::span<const PredictionRecord> preds);
double mean_ce_loss(std::span<const PredictionRecord> preds);

enum class GroupKey { Variant, Clip, All };

struct SummaryRow {
  std::string group;
  Metric metric = Metric::MI;
  Role role = Role::Parent;
  Part part = Part::Face;
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t n = 0;
};

/// Mean and spread of per-clip aggregate means, one row per
/// (group, metric, role, part) in lexicographic order. Reports must agree on
/// alpha and bins.
std::vector<SummaryRow> aggregate_reports(std::span<const ClipScoreReport> reports, GroupKey key);

std::string summary_to_csv(std::span<const SummaryRow> rows);

}  // namespace jegauge
