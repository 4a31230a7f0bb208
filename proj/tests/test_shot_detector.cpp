#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "textloc/shot_detector.hpp"

using namespace textloc;

namespace {

Frame constant_frame(int index, double y, double i = 0, double q = 0, int w = 8, int h = 6) {
  return Frame{index, GrayImage(w, h, y), GrayImage(w, h, i), GrayImage(w, h, q)};
}

Frame random_frame(std::mt19937_64& rng, int index, int w = 8, int h = 8) {
  return Frame{index, oracle::random_image(rng, w, h), oracle::random_image(rng, w, h, -150, 150),
               oracle::random_image(rng, w, h, -130, 130)};
}

std::vector<double> as_vec(std::initializer_list<double> v) { return v; }

}  // namespace

TEST(Moments, FirstMoment) {
  EXPECT_DOUBLE_EQ(first_moment(as_vec({7, 7, 7, 7})), 7.0);
  EXPECT_DOUBLE_EQ(first_moment(as_vec({0, 0, 255, 255})), 127.5);
  EXPECT_THROW(first_moment(std::vector<double>{}), DomainError);
  std::mt19937_64 rng(1);
  const auto img = oracle::random_image(rng, 8, 8);
  const std::vector<double> v(img.data().begin(), img.data().end());
  EXPECT_NEAR(first_moment(v), static_cast<double>(oracle::mean(v)), 1e-9);
}

TEST(Moments, HigherMoment) {
  EXPECT_DOUBLE_EQ(higher_moment(as_vec({3, 3, 3}), 2), 0.0);
  EXPECT_DOUBLE_EQ(higher_moment(as_vec({3, 3, 3}), 3), 0.0);
  EXPECT_NEAR(higher_moment(as_vec({0, 0, 255, 255}), 2), 127.5, 1e-12);
  // radicand (1/4)((-191.25)^3 + 3*(63.75)^3) = -1554503.9..., cube root -115.84
  EXPECT_NEAR(higher_moment(as_vec({0, 255, 255, 255}), 3), -115.84, 1e-2);
  EXPECT_THROW(higher_moment(as_vec({1, 2}), 1), DomainError);
}

TEST(Moments, HigherMomentMatchesExtendedPrecisionOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = oracle::random_image(rng, 9, 7);
    const std::vector<double> v(img.data().begin(), img.data().end());
    for (int h : {2, 3, 4}) EXPECT_NEAR(higher_moment(v, h), static_cast<double>(oracle::moment_root(v, h)), 1e-9);
  }
}

TEST(FeatureVector, ConstantAndZeroFrames) {
  for (double v : feature_vector(constant_frame(0, 0)).values) EXPECT_EQ(v, 0.0);
  const auto f = feature_vector(constant_frame(0, 42), {2, {1, 1, 1}});
  EXPECT_EQ(f.values, (std::vector<double>{42, 0, 0, 0, 0, 0}));
}

TEST(FeatureVector, EntriesComposeFromMoments) {
  std::mt19937_64 rng(3);
  const Frame fr = random_frame(rng, 5);
  const MomentParams p{3, {0.6, 0.2, 0.2}};
  const auto f = feature_vector(fr, p);
  ASSERT_EQ(f.values.size(), 9u);
  EXPECT_EQ(f.frame_index, 5);
  const std::array<const GrayImage*, 3> planes{&fr.y, &fr.i, &fr.q};
  for (int c = 0; c < 3; ++c) {
    const std::vector<double> v(planes[c]->data().begin(), planes[c]->data().end());
    EXPECT_NEAR(f.values[3 * c], p.weights[c] * static_cast<double>(oracle::mean(v)), 1e-9);
    for (int h = 2; h <= 3; ++h)
      EXPECT_NEAR(f.values[3 * c + h - 1], p.weights[c] * static_cast<double>(oracle::moment_root(v, h)), 1e-9);
  }
}

TEST(FeatureVector, RejectsBadParams) {
  EXPECT_THROW(feature_vector(constant_frame(0, 1), {0, {1, 1, 1}}), DomainError);
  EXPECT_THROW(feature_vector(constant_frame(0, 1), {3, {1, 0, 1}}), DomainError);
}

TEST(FrameDistance, Examples) {
  const MomentFeature a{{1, 2}, 0}, b{{4, 6}, 1};
  EXPECT_DOUBLE_EQ(frame_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(frame_distance(a, b, 2), 25.0);
  EXPECT_DOUBLE_EQ(frame_distance(a, b, 1), 7.0);
  EXPECT_THROW(frame_distance(a, MomentFeature{{1}, 0}), DomainError);
}

TEST(FrameDistance, MatchesOracleAndIsSymmetric) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int trial = 0; trial < 50; ++trial) {
    MomentFeature a, b;
    for (int k = 0; k < 9; ++k) {
      a.values.push_back(u(rng));
      b.values.push_back(u(rng));
    }
    long double s = 0;
    for (int k = 0; k < 9; ++k) s += (static_cast<long double>(a.values[k]) - b.values[k]) * (a.values[k] - b.values[k]);
    EXPECT_NEAR(frame_distance(a, b), static_cast<double>(s), 1e-9 * static_cast<double>(s));
    EXPECT_DOUBLE_EQ(frame_distance(a, b), frame_distance(b, a));
    EXPECT_GT(frame_distance(a, b), 0.0);
  }
}

TEST(DetectCuts, ConstantVideoHasNoCuts) {
  std::vector<MomentFeature> f;
  for (int k = 0; k < 12; ++k) f.push_back(feature_vector(constant_frame(k, 90, 10, -5)));
  EXPECT_TRUE(detect_cuts(f).empty());
  EXPECT_TRUE(detect_cuts(f, 2, CutThreshold::fixed(0.5)).empty());
}

TEST(DetectCuts, BlackToWhiteSingleBoundary) {
  std::vector<MomentFeature> f;
  for (int k = 0; k < 20; ++k) f.push_back(feature_vector(constant_frame(k, k < 10 ? 0 : 255)));
  const auto cuts = detect_cuts(f);
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_EQ(cuts[0].cut_after, 10);
  EXPECT_DOUBLE_EQ(cuts[0].distance, frame_distance(f[10], f[9]));
  // Y mean differs by 255 with weight 0.6, everything else constant
  EXPECT_NEAR(cuts[0].distance, (0.6 * 255) * (0.6 * 255), 1e-9);
}

TEST(DetectCuts, FadeBelowFixedThreshold) {
  std::vector<MomentFeature> f;
  for (int k = 0; k < 30; ++k) f.push_back(feature_vector(constant_frame(k, 4.0 * k)));
  const auto d = distance_series(f);
  const double top = *std::max_element(d.begin(), d.end());
  EXPECT_TRUE(detect_cuts(f, 2, CutThreshold::fixed(top + 1)).empty());
}

TEST(DetectCuts, FewerThanTwoFramesIsEmpty) {
  std::vector<MomentFeature> f{feature_vector(constant_frame(0, 1))};
  EXPECT_TRUE(detect_cuts(f).empty());
  EXPECT_TRUE(detect_cuts(std::span<const MomentFeature>{}).empty());
}

TEST(DetectCuts, WeightScalingLeavesCutsUnchanged) {
  std::mt19937_64 rng(5);
  std::vector<Frame> frames;
  for (int k = 0; k < 40; ++k) {
    const double level = (k / 13) * 70.0;
    Frame fr = constant_frame(k, level, 0, 0, 8, 8);
    const auto noise = oracle::random_image(rng, 8, 8, -3, 3);
    for (std::size_t p = 0; p < fr.y.size(); ++p) fr.y.data()[p] += noise.data()[p];
    frames.push_back(fr);
  }
  for (double c : {0.5, 3.0}) {
    std::vector<MomentFeature> base, scaled;
    for (const auto& fr : frames) {
      base.push_back(feature_vector(fr, {3, {0.6, 0.2, 0.2}}));
      scaled.push_back(feature_vector(fr, {3, {0.6 * c, 0.2 * c, 0.2 * c}}));
    }
    const auto d0 = distance_series(base), d1 = distance_series(scaled);
    for (std::size_t k = 0; k < d0.size(); ++k) EXPECT_NEAR(d1[k], c * c * d0[k], 1e-9 * (1 + d1[k]));
    const auto a = detect_cuts(base), b = detect_cuts(scaled);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].cut_after, b[k].cut_after);
  }
}

TEST(DetectCuts, ReversalMirrorsBoundaries) {
  std::mt19937_64 rng(6);
  std::vector<MomentFeature> fwd;
  for (int k = 0; k < 60; ++k) {
    Frame fr = random_frame(rng, k, 6, 6);
    const double shift = (k >= 25 && k < 45) ? 120.0 : 0.0;
    for (auto& v : fr.y.data()) v = v * 0.05 + shift;
    for (auto& v : fr.i.data()) v *= 0.05;
    for (auto& v : fr.q.data()) v *= 0.05;
    fwd.push_back(feature_vector(fr));
  }
  std::vector<MomentFeature> rev(fwd.rbegin(), fwd.rend());
  const auto a = detect_cuts(fwd), b = detect_cuts(rev);
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(a.size(), b.size());
  const int n = static_cast<int>(fwd.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].cut_after, n - b[b.size() - 1 - k].cut_after);
}

TEST(CutsToShots, Examples) {
  EXPECT_EQ(cuts_to_shots({}, 5), (std::vector<Shot>{{0, 4}}));
  const std::vector<ShotBoundary> one{{10, 1.0}};
  EXPECT_EQ(cuts_to_shots(one, 20), (std::vector<Shot>{{0, 9}, {10, 19}}));
  const std::vector<ShotBoundary> two{{3, 1.0}, {7, 1.0}};
  EXPECT_EQ(cuts_to_shots(two, 10), (std::vector<Shot>{{0, 2}, {3, 6}, {7, 9}}));
}

TEST(CutsToShots, TilesRange) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 50);
    std::vector<ShotBoundary> b;
    for (int j = 1; j < n; ++j)
      if (rng() % 5 == 0) b.push_back({j, 1.0});
    const auto shots = cuts_to_shots(b, n);
    ASSERT_EQ(shots.size(), b.size() + 1);
    int expect_start = 0, total = 0;
    for (const auto& s : shots) {
      EXPECT_EQ(s.start, expect_start);
      EXPECT_LE(s.start, s.end);
      expect_start = s.end + 1;
      total += s.length();
    }
    EXPECT_EQ(total, n);
  }
}
