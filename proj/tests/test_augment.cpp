#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "jegauge/augment.hpp"
#include "jegauge/error.hpp"

using namespace jegauge;

namespace {

Frame random_frame(std::mt19937_64& rng, int h, int w, int c) {
  Frame f(h, w, c);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng());
  return f;
}

std::vector<LabelRecord> records(std::size_t low, std::size_t mid, std::size_t high, const std::string& prefix = "") {
  std::vector<LabelRecord> out;
  auto add = [&](std::size_t n, Label l, const char* tag) {
    for (std::size_t i = 0; i < n; ++i) out.push_back({prefix + tag + std::to_string(100000 + i), l});
  };
  add(low, Label::Low, "l");
  add(mid, Label::Mid, "m");
  add(high, Label::High, "h");
  return out;
}

}  // namespace

TEST_CASE("apply_cutout zeroes exactly the selected boxes") {
  std::mt19937_64 rng(1);
  const auto f = random_frame(rng, 20, 30, 3);
  const std::vector<RegionBox> boxes{{Role::Parent, Part::Face, 2, 3, 5, 4}, {Role::Child, Part::Body, 10, 5, 8, 10}};
  const auto out = apply_cutout(f, boxes, {Part::Face});
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) {
      const bool inside = x >= 2 && x < 7 && y >= 3 && y < 7;
      for (int c = 0; c < 3; ++c) REQUIRE(out.at(y, x, c) == (inside ? 0 : f.at(y, x, c)));
    }
  }
  const std::vector<RegionBox> bodies{{Role::Child, Part::Body, 10, 5, 8, 10}};
  CHECK(apply_cutout(f, bodies, {Part::Face}) == f);

  const std::vector<RegionBox> overlapping{{Role::Parent, Part::Face, 2, 2, 6, 6}, {Role::Child, Part::Face, 5, 5, 6, 6}};
  const auto once = apply_cutout(f, overlapping, {Part::Face});
  CHECK(apply_cutout(once, overlapping, {Part::Face}) == once);
}

TEST_CASE("apply_background examples") {
  std::mt19937_64 rng(2);
  const auto f = random_frame(rng, 6, 8, 3);
  const std::vector<bool> all_fg(48, true), all_bg(48, false);
  CHECK(apply_background(f, all_fg, BgSolid{1, 2, 3}) == f);
  CHECK(apply_background(f, all_fg, BgBlur{2}) == f);
  CHECK(apply_background(f, all_fg, BgImage{random_frame(rng, 3, 3, 3)}) == f);

  const auto green = apply_background(f, all_bg, BgSolid{0, 255, 0});
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 8; ++x) {
      CHECK(green.at(y, x, 0) == 0);
      CHECK(green.at(y, x, 1) == 255);
      CHECK(green.at(y, x, 2) == 0);
    }
  }
  CHECK_THROWS_AS(apply_background(f, all_bg, BgImage{Frame{}}), Error);
  CHECK_THROWS_AS(apply_background(f, std::vector<bool>(47, false), BgSolid{}), Error);
}

TEST_CASE("BgBlur radius 1 on a checkerboard background") {
  Frame f(4, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) f.at(y, x) = (x + y) % 2 ? 200 : 0;
  std::vector<bool> fg(16, false);
  fg[5] = true;  // (1,1) stays
  const auto out = apply_background(f, fg, BgBlur{1});
  const int expected[4][4] = {
      {100, 100, 100, 100},  // border windows hold half whites
      {100, 0, 111, 100},    // white centre: 5 of 9 white
      {100, 111, 89, 100},   // black centre: 4 of 9 white
      {100, 100, 100, 100},
  };
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      if (y == 1 && x == 1) {
        CHECK(out.at(y, x) == f.at(y, x));
        continue;
      }
      // Independent neighborhood mean, truncated at the border, rounded half-up.
      int sum = 0, n = 0;
      for (int yy = std::max(0, y - 1); yy <= std::min(3, y + 1); ++yy)
        for (int xx = std::max(0, x - 1); xx <= std::min(3, x + 1); ++xx) sum += f.at(yy, xx), ++n;
      const int mean = static_cast<int>(std::floor(static_cast<double>(sum) / n + 0.5));
      CHECK(out.at(y, x) == mean);
      CHECK(out.at(y, x) == expected[y][x]);
    }
  }
}

TEST_CASE("foreground from boxes and masks") {
  const std::vector<RegionBox> boxes{{Role::Parent, Part::Body, 1, 1, 2, 2}};
  const auto fg = foreground_from_boxes(boxes, 4, 3);
  int count = 0;
  for (bool b : fg) count += b;
  CHECK(count == 4);
  CHECK(fg[1 * 4 + 1]);
  const auto m = foreground_from_mask(SegmentMaskSet(1, 3, {0, 2, 5}));
  CHECK(m == std::vector<bool>{false, true, true});
}

TEST_CASE("add_gaussian_noise") {
  std::mt19937_64 rng(3);
  const auto f = random_frame(rng, 10, 10, 3);
  CHECK(add_gaussian_noise(f, 0.0, 99) == f);
  CHECK(add_gaussian_noise(f, 5.0, 42) == add_gaussian_noise(f, 5.0, 42));
  CHECK(add_gaussian_noise(f, 5.0, 42) != add_gaussian_noise(f, 5.0, 43));

  const Frame flat(120, 120, 1, 128);
  const auto noisy = add_gaussian_noise(flat, 10.0, 7);
  double s = 0, ss = 0;
  for (auto p : noisy.pixels) s += p;
  const double mean = s / noisy.pixels.size();
  for (auto p : noisy.pixels) ss += (p - mean) * (p - mean);
  const double sd = std::sqrt(ss / noisy.pixels.size());
  CHECK(std::abs(mean - 128.0) <= 1.0);
  CHECK(std::abs(sd - 10.0) <= 1.0);
  CHECK_THROWS_AS(add_gaussian_noise(f, -1.0, 1), Error);
}

TEST_CASE("GaussianSource sequence is pinned") {
  GaussianSource a(2024), b(2024);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next() == b.next());
}

TEST_CASE("rotate") {
  std::mt19937_64 rng(4);
  const auto f = random_frame(rng, 9, 13, 3);
  CHECK(rotate(f, 0.0) == f);

  const auto sq = random_frame(rng, 11, 11, 1);
  const auto twice = rotate(rotate(sq, 180.0), 180.0);
  for (std::size_t i = 0; i < sq.pixels.size(); ++i) REQUIRE(std::abs(twice.pixels[i] - sq.pixels[i]) <= 1);

  const int n = 12;  // even extent: centre between pixels
  const auto even = random_frame(rng, n, n, 1);
  const auto r90 = rotate(even, 90.0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      // Counter-clockwise quarter turn: the top-right corner moves to the top-left.
      REQUIRE(std::abs(r90.at(y, x) - even.at(x, n - 1 - y)) <= 1);
    }
  }
  CHECK_THROWS_AS(rotate(f, -180.0), Error);
  CHECK(rotate(f, 17.0).pixels.size() == f.pixels.size());
}

TEST_CASE("rotate moves annotations with the pixels") {
  for (const double deg : {90.0, -90.0, 180.0, 30.0, -12.5}) {
    Frame f(41, 61, 1);
    FrameEntry e;
    e.index = 0;
    KeypointSet set;
    for (std::size_t j = 0; j < kCocoKeypoints; ++j) set.points[j] = {20.0f + static_cast<float>(j), 18.0f, 1.0f};
    e.keypoints.push_back(set);
    e.boxes.push_back({Role::Parent, Part::Face, 24, 16, 6, 5});
    // Paint the box solid so its rotated footprint is visible.
    for (int y = 16; y < 21; ++y)
      for (int x = 24; x < 30; ++x) f.at(y, x, 0) = 255;

    const auto rf = rotate(f, deg);
    const auto re = rotate(e, deg, f.width, f.height);
    REQUIRE(re.boxes.size() == 1);
    const auto& b = re.boxes[0];
    int lit = 0, inside = 0;
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        if (rf.at(y, x, 0) < 128) continue;
        ++lit;
        if (x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h) ++inside;
      }
    }
    CHECK(lit > 0);
    CHECK(inside == lit);
    CHECK(b.w * b.h <= 2 * 6 * 5 + 4 * (6 + 5) + 4);  // bounding box of a rotated 6x5 box
    CHECK(re.keypoints[0].points[0].confidence == 1.0f);
  }

  // Quarter turn: a lone bright pixel lands where its keypoint lands.
  Frame f(9, 9, 1);
  f.at(2, 6, 0) = 255;
  FrameEntry e;
  KeypointSet set;
  set.points[0] = {6.0f, 2.0f, 1.0f};
  e.keypoints.push_back(set);
  const auto rf = rotate(f, 90.0);
  const auto kp = rotate(e, 90.0, 9, 9).keypoints[0].points[0];
  CHECK(rf.at(static_cast<int>(kp.y), static_cast<int>(kp.x), 0) == 255);
  CHECK(rotate(e, 0.0, 9, 9) == e);

  // Boxes rotated fully out of the frame are dropped; keypoints lose confidence.
  FrameEntry corner;
  corner.boxes.push_back({Role::Child, Part::Body, 0, 0, 2, 2});
  KeypointSet cs;
  cs.points[0] = {0.0f, 0.0f, 0.9f};
  corner.keypoints.push_back(cs);
  const auto rc = rotate(corner, 45.0, 40, 10);
  CHECK(rc.boxes.empty());
  CHECK(rc.keypoints[0].points[0].confidence == 0.0f);
}

TEST_CASE("hflip") {
  std::mt19937_64 rng(5);
  const auto f = random_frame(rng, 7, 10, 3);
  CHECK(hflip(hflip(f)) == f);
  CHECK(hflip(f).at(2, 0, 1) == f.at(2, 9, 1));

  FrameEntry e;
  e.boxes = {{Role::Parent, Part::Face, 3, 1, 4, 2}, {Role::Child, Part::Body, 0, 0, 2, 5}};
  KeypointSet k;
  for (std::size_t j = 0; j < kCocoKeypoints; ++j) k.points[j] = {static_cast<float>(j) * 0.5f, 1.0f + j, 0.5f};
  k.points[9] = {2.25f, 4.0f, 0.9f};  // left wrist
  e.keypoints.push_back(k);

  const auto flipped = hflip(e, 10);
  CHECK(flipped.boxes[0].x == 3);  // centred box
  CHECK(flipped.boxes[1].x == 8);
  CHECK(flipped.keypoints[0].points[10].x == 9.0f - 2.25f);  // now the right wrist
  CHECK(flipped.keypoints[0].points[10].confidence == 0.9f);
  CHECK(flipped.keypoints[0].points[0].x == 9.0f);  // nose keeps its slot
  CHECK(hflip(flipped, 10) == e);
}

TEST_CASE("mirrored keypoint pairs") {
  CHECK(mirrored_keypoint(0) == 0);
  CHECK(mirrored_keypoint(1) == 2);
  CHECK(mirrored_keypoint(2) == 1);
  CHECK(mirrored_keypoint(9) == 10);
  CHECK(mirrored_keypoint(16) == 15);
  for (std::size_t j = 0; j < kCocoKeypoints; ++j) CHECK(mirrored_keypoint(mirrored_keypoint(j)) == j);
}

TEST_CASE("property: augment ops preserve extents and channel count") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 12), w = 1 + static_cast<int>(rng() % 12);
    const auto f = random_frame(rng, h, w, trial % 2 ? 3 : 1);
    const std::vector<bool> fg(static_cast<std::size_t>(h) * w, false);
    for (const auto& out : {rotate(f, 33.0), hflip(f), add_gaussian_noise(f, 4.0, trial),
                            apply_background(f, fg, BgBlur{2}), apply_background(f, fg, BgSolid{9, 9, 9}),
                            apply_background(f, fg, BgImage{random_frame(rng, 5, 4, 3)})}) {
      REQUIRE(out.height == h);
      REQUIRE(out.width == w);
      REQUIRE(out.channels == f.channels);
    }
  }
}

TEST_CASE("plan_balance examples") {
  const auto small = plan_balance(records(2, 5, 3));
  CHECK(small.duplicates.at(Label::Low) == 3);
  CHECK(small.duplicates.at(Label::Mid) == 0);
  CHECK(small.duplicates.at(Label::High) == 2);
  CHECK(small.total_duplicates() == 5);
  // Round robin over sorted ids: first low clip gets 2 copies, second gets 1.
  REQUIRE(small.assignments.size() == 4);
  CHECK(small.assignments[0] == std::pair<std::string, std::size_t>{"l100000", 2});
  CHECK(small.assignments[1] == std::pair<std::string, std::size_t>{"l100001", 1});

  CHECK(plan_balance(records(4, 4, 4)).total_duplicates() == 0);
  CHECK_THROWS_AS(plan_balance(records(0, 3, 3)), Error);
  CHECK_THROWS_AS(plan_balance(std::vector<LabelRecord>{}), Error);
}

TEST_CASE("plan_balance at dataset scale") {
  // Label fractions 8.49% / 49.68% / 41.83% of 16,606 clips, rounded.
  const auto low = static_cast<std::size_t>(std::lround(16606 * 0.0849));
  const auto mid = static_cast<std::size_t>(std::lround(16606 * 0.4968));
  const auto high = static_cast<std::size_t>(std::lround(16606 * 0.4183));
  CHECK(low == 1410);
  CHECK(mid == 8250);
  CHECK(high == 6946);
  const auto derived = plan_balance(records(low, mid, high));
  CHECK(derived.total_duplicates() == 8144);  // within 2 of the 8,143 reference figure

  // Rounding high up instead (6,947; sum 16,607) gives exactly 8,143.
  const auto plan = plan_balance(records(1410, 8250, 6947));
  CHECK(plan.total_duplicates() == 8143);
  CHECK(plan.duplicates.at(Label::Low) == 6840);
  CHECK(plan.duplicates.at(Label::Mid) == 0);
  CHECK(plan.duplicates.at(Label::High) == 1303);
  for (const auto l : {Label::Low, Label::Mid, Label::High}) CHECK(plan.original.at(l) + plan.duplicates.at(l) == 8250);
}

TEST_CASE("property: balance plans equalize and ignore input order") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    auto recs = records(1 + rng() % 40, 1 + rng() % 40, 1 + rng() % 40);
    const auto plan = plan_balance(recs);
    std::map<Label, std::size_t> after = plan.original;
    std::map<std::string, Label> label_of;
    for (const auto& r : recs) label_of[r.clip_id] = r.label;
    for (const auto& [id, copies] : plan.assignments) after[label_of[id]] += copies;
    REQUIRE(after[Label::Low] == after[Label::Mid]);
    REQUIRE(after[Label::Mid] == after[Label::High]);
    std::shuffle(recs.begin(), recs.end(), rng);
    const auto again = plan_balance(recs);
    REQUIRE(again.assignments == plan.assignments);
  }
}

TEST_CASE("plan_mix") {
  const auto a = records(3, 3, 3, "a");
  const auto b = records(3, 3, 3, "b");
  const auto six = plan_mix(a, b, 6, 1);
  for (auto l : {Label::Low, Label::Mid, Label::High}) {
    CHECK(six.from_a.at(l) == 1);
    CHECK(six.from_b.at(l) == 1);
  }
  CHECK(six.selections.size() == 6);

  const auto p1 = plan_mix(a, b, 7, 99);
  const auto p2 = plan_mix(a, b, 7, 99);
  CHECK(p1.selections == p2.selections);
  CHECK(p1.selections.size() == 7);

  try {
    plan_mix(records(1, 3, 3, "a"), b, 9, 1);
    FAIL("quota violation accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Quota);
    CHECK(std::string(e.what()).find("low") != std::string::npos);
    CHECK(std::string(e.what()).find("source a") != std::string::npos);
  }
}

TEST_CASE("plan_mix at full dataset scale") {
  const auto a = records(8249, 8249, 8249, "g");
  const auto b = records(8249, 8249, 8249, "d");
  const auto plan = plan_mix(a, b, 24749, 2023);
  CHECK(plan.selections.size() == 24749);
  std::size_t total = 0;
  for (auto l : {Label::Low, Label::Mid, Label::High}) {
    const auto na = plan.from_a.at(l), nb = plan.from_b.at(l);
    CHECK((na >= nb && na - nb <= 1));
    total += na + nb;
  }
  CHECK(total == 24749);
  std::set<std::pair<std::string, Source>> unique(plan.selections.begin(), plan.selections.end());
  CHECK(unique.size() == plan.selections.size());
}

TEST_CASE("uniform_below covers its range") {
  std::mt19937_64 e(1);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) ++hits[uniform_below(e, 5)];
  for (int h : hits) CHECK(h > 800);
}
