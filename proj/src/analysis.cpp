#include "jegauge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "jegauge/error.hpp"

namespace jegauge {

RatingsMatrix::RatingsMatrix(int n_items, int n_raters, std::vector<double> v)
    : items(n_items), raters(n_raters), values(std::move(v)) {
  if (items < 2 || raters < 2) throw Error(ErrorKind::Validation, "ratings need at least 2 items and 2 raters");
  if (values.size() != static_cast<std::size_t>(items) * raters) {
    throw Error(ErrorKind::Validation, "ratings matrix has missing cells");
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw Error(ErrorKind::Validation, "non-finite rating");
  }
}

double icc_consistency(const RatingsMatrix& r, IccForm form) {
  const int n = r.items;
  const int k = r.raters;

  // Between-items mean square from the raw row means.
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) row_mean[i] += r.at(i, j);
    grand += row_mean[i];
    row_mean[i] /= k;
  }
  grand /= static_cast<double>(n) * k;
  double ss_rows = 0.0;
  for (int i = 0; i < n; ++i) ss_rows += (row_mean[i] - grand) * (row_mean[i] - grand);
  ss_rows *= k;
  const double bms = ss_rows / (n - 1);
  if (!(bms > 0.0)) throw Error(ErrorKind::UndefinedInput, "ICC undefined: no variance across items");

  // The interaction residual is unchanged by per-item shifts, so it is taken
  // on ratings relative to the first rater; identical raters give exactly 0.
  std::vector<double> d(r.values.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) d[static_cast<std::size_t>(i) * k + j] = r.at(i, j) - r.at(i, 0);
  }
  std::vector<double> dr(n, 0.0);
  std::vector<double> dc(k, 0.0);
  double dg = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const double v = d[static_cast<std::size_t>(i) * k + j];
      dr[i] += v;
      dc[j] += v;
      dg += v;
    }
  }
  for (auto& x : dr) x /= k;
  for (auto& x : dc) x /= n;
  dg /= static_cast<double>(n) * k;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const double e = d[static_cast<std::size_t>(i) * k + j] - dr[i] - dc[j] + dg;
      sse += e * e;
    }
  }
  const double ems = sse / (static_cast<double>(n - 1) * (k - 1));

  if (form == IccForm::Average) return (bms - ems) / bms;
  return (bms - ems) / (bms + (k - 1) * ems);
}

Label class_from_rating(double mean_rating, RatingThresholds t) {
  if (!(t.low < t.high)) throw Error(ErrorKind::InvalidInput, "rating thresholds must satisfy low < high");
  if (mean_rating < t.low) return Label::Low;
  if (mean_rating > t.high) return Label::High;
  return Label::Mid;
}

std::size_t argmax_label(const std::array<double, 3>& logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

namespace {

void check_preds(std::span<const PredictionRecord> preds) {
  if (preds.empty()) throw Error(ErrorKind::UndefinedInput, "no prediction records");
  for (const auto& p : preds) {
    for (double l : p.logits) {
      if (!std::isfinite(l)) throw Error(ErrorKind::Validation, "non-finite logit for " + p.clip_id);
    }
  }
}

}  // namespace

double top1_accuracy(std::span<const PredictionRecord> preds) {
  check_preds(preds);
  std::size_t correct = 0;
  for (const auto& p : preds) correct += argmax_label(p.logits) == static_cast<std::size_t>(p.true_label);
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double mean_ce_loss(std::span<const PredictionRecord> preds) {
  check_preds(preds);
  double total = 0.0;
  for (const auto& p : preds) {
    const double m = *std::max_element(p.logits.begin(), p.logits.end());
    double z = 0.0;
    for (double l : p.logits) z += std::exp(l - m);
    total += (m + std::log(z)) - p.logits[static_cast<std::size_t>(p.true_label)];
  }
  return total / static_cast<double>(preds.size());
}

std::vector<SummaryRow> aggregate_reports(std::span<const ClipScoreReport> reports, GroupKey key) {
  if (reports.empty()) throw Error(ErrorKind::UndefinedInput, "no reports to aggregate");
  const auto& ref = reports.front().config;
  for (const auto& r : reports) {
    if (r.config.alpha != ref.alpha || r.config.bins != ref.bins) {
      throw Error(ErrorKind::Incompatible, "report " + r.clip_id + " was scored with alpha=" +
                                               std::to_string(r.config.alpha) + ", bins=" +
                                               std::to_string(r.config.bins) + " but " + reports.front().clip_id +
                                               " used alpha=" + std::to_string(ref.alpha) +
                                               ", bins=" + std::to_string(ref.bins));
    }
  }

  using RowKey = std::tuple<std::string, std::string, std::string, std::string>;
  struct Bucket {
    Metric metric;
    RegionKey region;
    std::vector<double> means;
  };
  std::map<RowKey, Bucket> buckets;
  for (const auto& r : reports) {
    const std::string group = key == GroupKey::Variant ? r.variant : key == GroupKey::Clip ? r.clip_id : "all";
    for (const auto& [metric, by_region] : r.aggregate) {
      for (const auto& [region, stat] : by_region) {
        if (stat.present == 0) continue;
        RowKey rk{group, std::string(to_string(metric)), std::string(to_string(region.first)),
                  std::string(to_string(region.second))};
        auto& b = buckets.try_emplace(rk, Bucket{metric, region, {}}).first->second;
        b.means.push_back(stat.mean);
      }
    }
  }

  std::vector<SummaryRow> rows;
  for (const auto& [rk, b] : buckets) {
    SummaryRow row;
    row.group = std::get<0>(rk);
    row.metric = b.metric;
    row.role = b.region.first;
    row.part = b.region.second;
    row.n = b.means.size();
    double s = 0.0;
    for (double m : b.means) s += m;
    row.mean = s / static_cast<double>(row.n);
    double ss = 0.0;
    for (double m : b.means) ss += (m - row.mean) * (m - row.mean);
    row.std = std::sqrt(ss / static_cast<double>(row.n));
    rows.push_back(row);
  }
  return rows;
}

std::string summary_to_csv(std::span<const SummaryRow> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "group,metric,role,part,mean,std,n\n";
  for (const auto& r : rows) {
    out << r.group << ',' << to_string(r.metric) << ',' << to_string(r.role) << ',' << to_string(r.part) << ','
        << r.mean << ',' << r.std << ',' << r.n << '\n';
  }
  return out.str();
}

}  // namespace jegauge
