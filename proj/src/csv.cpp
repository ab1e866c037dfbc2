#include "jegauge/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "jegauge/error.hpp"

namespace jegauge {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_number(const std::string& s, std::size_t line, const char* what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::Validation, "line " + std::to_string(line) + ": " + what + " is not a number: '" + s + "'");
  }
  return v;
}

void expect_columns(const CsvTable& t, std::size_t n, const char* layout) {
  if (t.header.size() != n) throw Error(ErrorKind::Validation, std::string("expected header ") + layout);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != n) {
      throw Error(ErrorKind::Validation, "line " + std::to_string(i + 2) + ": expected " + std::to_string(n) + " columns");
    }
  }
}

Label label_cell(const std::string& s, std::size_t line) {
  const auto l = parse_label(s);
  if (!l) throw Error(ErrorKind::Validation, "line " + std::to_string(line) + ": unknown label '" + s + "'");
  return *l;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw Error(ErrorKind::Validation, "empty CSV");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_csv(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<LabelRecord> parse_labels(const CsvTable& t) {
  expect_columns(t, 2, "clip_id,label");
  std::vector<LabelRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (r[0].empty()) throw Error(ErrorKind::Validation, "line " + std::to_string(i + 2) + ": empty clip_id");
    out.push_back({r[0], label_cell(r[1], i + 2)});
  }
  return out;
}

RatingsMatrix parse_ratings(const CsvTable& t) {
  if (t.header.size() < 3) throw Error(ErrorKind::Validation, "expected header item_id,rater1,rater2[,...]");
  const std::size_t k = t.header.size() - 1;
  expect_columns(t, k + 1, "item_id,rater1,rater2[,...]");
  std::vector<double> values;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 1; j <= k; ++j) {
      if (t.rows[i][j].empty()) throw Error(ErrorKind::Validation, "line " + std::to_string(i + 2) + ": missing rating");
      values.push_back(parse_number(t.rows[i][j], i + 2, "rating"));
    }
  }
  return RatingsMatrix(static_cast<int>(t.rows.size()), static_cast<int>(k), std::move(values));
}

std::vector<PredictionRecord> parse_predictions(const CsvTable& t) {
  expect_columns(t, 5, "clip_id,logit_low,logit_mid,logit_high,label");
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    PredictionRecord p;
    p.clip_id = r[0];
    for (std::size_t j = 0; j < 3; ++j) p.logits[j] = parse_number(r[j + 1], i + 2, "logit");
    p.true_label = label_cell(r[4], i + 2);
    out.push_back(std::move(p));
  }
  return out;
}

std::string balance_plan_csv(const BalancePlan& plan) {
  std::string out = "clip_id,copies\n";
  for (const auto& [id, copies] : plan.assignments) out += id + "," + std::to_string(copies) + "\n";
  return out;
}

std::string mix_plan_csv(const MixPlan& plan) {
  std::string out = "clip_id,source\n";
  for (const auto& [id, src] : plan.selections) out += id + (src == Source::A ? ",a\n" : ",b\n");
  return out;
}

}  // namespace jegauge
