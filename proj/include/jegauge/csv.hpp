#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jegauge/analysis.hpp"
#include "jegauge/augment.hpp"

namespace jegauge {

/// Plain comma-separated table: no quoting, first line is the header,
/// blank lines ignored, surrounding whitespace trimmed per cell.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// `clip_id,label`
std::vector<LabelRecord> parse_labels(const CsvTable& t);
/// `item_id,rater1,rater2[,...]`
RatingsMatrix parse_ratings(const CsvTable& t);
/// `clip_id,logit_low,logit_mid,logit_high,label`
std::vector<PredictionRecord> parse_predictions(const CsvTable& t);

/// `clip_id,copies`
std::string balance_plan_csv(const BalancePlan& plan);
/// `clip_id,source`
std::string mix_plan_csv(const MixPlan& plan);

}  // namespace jegauge
