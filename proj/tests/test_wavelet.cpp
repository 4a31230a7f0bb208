#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "textloc/wavelet.hpp"

using namespace textloc;

namespace {

double max_abs_diff(const GrayImage& a, const GrayImage& b) {
  EXPECT_TRUE(a.same_shape(b));
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

double pyramid_energy(const SubbandPyramid& p) {
  double e = oracle::energy(p.ll);
  for (const auto& l : p.levels) e += oracle::energy(l.lh) + oracle::energy(l.hl) + oracle::energy(l.hh);
  return e;
}

const WaveletKernel kPeriodic[] = {WaveletKernel::haar(Extension::periodic), WaveletKernel::db2(Extension::periodic)};

}  // namespace

TEST(Kernel, OrthonormalQuadratureMirror) {
  for (const auto& k : {WaveletKernel::haar(), WaveletKernel::db2()}) {
    double lo2 = 0, hi2 = 0, cross = 0;
    for (int t = 0; t < k.taps(); ++t) {
      lo2 += k.lowpass[t] * k.lowpass[t];
      hi2 += k.highpass[t] * k.highpass[t];
      cross += k.lowpass[t] * k.highpass[t];
      EXPECT_DOUBLE_EQ(k.highpass[t], (t % 2 ? -1 : 1) * k.lowpass[k.taps() - 1 - t]);
    }
    EXPECT_NEAR(lo2, 1.0, 1e-15);
    EXPECT_NEAR(hi2, 1.0, 1e-15);
    EXPECT_NEAR(cross, 0.0, 1e-15);
  }
  EXPECT_THROW(WaveletKernel::by_name("sym8"), DomainError);
}

TEST(Dwt2Level, ConstantImage) {
  const auto s = dwt2_level(GrayImage(8, 6, 10.0), WaveletKernel::haar());
  for (double v : s.ll.data()) EXPECT_NEAR(v, 20.0, 1e-12);
  for (const auto* b : {&s.lh, &s.hl, &s.hh})
    for (double v : b->data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Dwt2Level, HaarTwoByTwo) {
  const double a = 3, b = 8, c = -2, d = 5;
  GrayImage img(2, 2);
  img(0, 0) = a;
  img(1, 0) = b;
  img(0, 1) = c;
  img(1, 1) = d;
  const auto s = dwt2_level(img, WaveletKernel::haar(Extension::periodic));
  EXPECT_NEAR(s.ll(0, 0), (a + b + c + d) / 2, 1e-12);
  EXPECT_NEAR(s.lh(0, 0), (a + b - c - d) / 2, 1e-12);
  EXPECT_NEAR(s.hl(0, 0), (a - b + c - d) / 2, 1e-12);
  EXPECT_NEAR(s.hh(0, 0), (a - b - c + d) / 2, 1e-12);
}

TEST(Dwt2Level, CeilSizedBandsForOddDimensions) {
  const auto s = dwt2_level(GrayImage(9, 7, 1.0), WaveletKernel::db2());
  EXPECT_EQ(s.ll.width(), 5);
  EXPECT_EQ(s.ll.height(), 4);
  EXPECT_TRUE(s.hh.same_shape(s.ll));
  EXPECT_THROW(dwt2_level(GrayImage(), WaveletKernel::haar()), DomainError);
}

TEST(Idwt2Level, ReconstructsRandomImages) {
  std::mt19937_64 rng(1);
  for (const auto& k : kPeriodic) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto img = oracle::random_image(rng, 16, 16);
      EXPECT_LT(max_abs_diff(idwt2_level(dwt2_level(img, k), k), img), 1e-9) << k.name;
    }
    const auto rect = oracle::random_image(rng, 12, 20);
    EXPECT_LT(max_abs_diff(idwt2_level(dwt2_level(rect, k), k), rect), 1e-9) << k.name;
  }
}

TEST(Idwt2Level, TrivialCasesAndErrors) {
  const auto k = WaveletKernel::haar(Extension::periodic);
  const Subbands zero{GrayImage(4, 3), GrayImage(4, 3), GrayImage(4, 3), GrayImage(4, 3)};
  const auto from_zero = idwt2_level(zero, k);
  for (double v : from_zero.data()) EXPECT_EQ(v, 0.0);
  const auto from_const = idwt2_level(dwt2_level(GrayImage(8, 8, 77.0), k), k);
  for (double v : from_const.data()) EXPECT_NEAR(v, 77.0, 1e-9);
  const Subbands bad{GrayImage(4, 3), GrayImage(4, 4), GrayImage(4, 3), GrayImage(4, 3)};
  EXPECT_THROW(idwt2_level(bad, k), DomainError);
}

TEST(Idwt2Level, ForwardOfInverseIsIdentity) {
  std::mt19937_64 rng(2);
  for (const auto& k : kPeriodic) {
    const Subbands s{oracle::random_image(rng, 8, 8, -100, 100), oracle::random_image(rng, 8, 8, -100, 100),
                     oracle::random_image(rng, 8, 8, -100, 100), oracle::random_image(rng, 8, 8, -100, 100)};
    const auto back = dwt2_level(idwt2_level(s, k), k);
    EXPECT_LT(max_abs_diff(back.ll, s.ll), 1e-9);
    EXPECT_LT(max_abs_diff(back.lh, s.lh), 1e-9);
    EXPECT_LT(max_abs_diff(back.hl, s.hl), 1e-9);
    EXPECT_LT(max_abs_diff(back.hh, s.hh), 1e-9);
  }
}

TEST(Dwt2Multilevel, EnergyConservedPeriodic) {
  std::mt19937_64 rng(3);
  for (const auto& k : kPeriodic) {
    for (int levels : {1, 2, 3}) {
      const auto img = oracle::random_image(rng, 32, 32);
      const double e = oracle::energy(img);
      EXPECT_NEAR(pyramid_energy(dwt2_multilevel(img, levels, k)), e, 1e-6 * e);
    }
  }
}

TEST(Dwt2Multilevel, CompositionalAndBaseCase) {
  std::mt19937_64 rng(4);
  const auto img = oracle::random_image(rng, 32, 32);
  for (const auto& k : {WaveletKernel::haar(), WaveletKernel::db2()}) {
    const auto one = dwt2_multilevel(img, 1, k);
    const auto s1 = dwt2_level(img, k);
    EXPECT_EQ(one.ll, s1.ll);
    EXPECT_EQ(one.levels[0].lh, s1.lh);
    EXPECT_EQ(one.levels[0].hh, s1.hh);
    const auto two = dwt2_multilevel(img, 2, k);
    const auto s2 = dwt2_level(s1.ll, k);
    EXPECT_EQ(two.levels[0].hl, s1.hl);
    EXPECT_EQ(two.levels[1].lh, s2.lh);
    EXPECT_EQ(two.levels[1].hl, s2.hl);
    EXPECT_EQ(two.levels[1].hh, s2.hh);
    EXPECT_EQ(two.ll, s2.ll);
  }
}

TEST(Dwt2Multilevel, ConstantHasNoDetail) {
  const auto p = dwt2_multilevel(GrayImage(40, 24, 128.0), 2, WaveletKernel::db2());
  for (const auto& l : p.levels)
    for (const auto* b : {&l.lh, &l.hl, &l.hh})
      for (double v : b->data()) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(Dwt2Multilevel, TooManyLevelsNamesTheMaximum) {
  EXPECT_EQ(max_dwt_levels(16, 16, WaveletKernel::haar()), 3);
  EXPECT_EQ(max_dwt_levels(16, 40, WaveletKernel::db2()), 2);
  try {
    dwt2_multilevel(GrayImage(16, 16), 4, WaveletKernel::haar());
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("max feasible L = 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(dwt2_multilevel(GrayImage(16, 16), 0, WaveletKernel::haar()), DomainError);
}

TEST(FuseDetails, ConstantGivesZero) {
  const auto fused = fuse_details(dwt2_multilevel(GrayImage(32, 32, 200.0), 2, WaveletKernel::haar()));
  for (double v : fused.data()) EXPECT_EQ(v, 0.0);
}

// Haar, L=2, impulse of 255 at (5,6). Level 1 touches only the 2x2 cell {4,5}x{6,7} with
// |lh|+|hl|+|hh| = 3*127.5; its ll (127.5) feeds level 2, which touches the 4x4 cell {4..7}x{4..7}
// with 3*63.75. After min-max rescale: 2x2 cell -> 255, remainder of the 4x4 cell -> 85, else 0.
TEST(FuseDetails, ImpulseFootprint) {
  GrayImage img(16, 16);
  img(5, 6) = 255;
  const auto fused = fuse_details(dwt2_multilevel(img, 2, WaveletKernel::haar()));
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      double expect = 0;
      if (x >= 4 && x <= 7 && y >= 4 && y <= 7) expect = 85;
      if (x >= 4 && x <= 5 && y >= 6 && y <= 7) expect = 255;
      EXPECT_NEAR(fused(x, y), expect, 1e-9) << x << "," << y;
    }
  }
}

TEST(FuseDetails, VerticalStepIsHlDominated) {
  GrayImage img(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 5; x < 16; ++x) img(x, y) = 255;
  const auto p = dwt2_multilevel(img, 1, WaveletKernel::haar());
  double hl = 0, other = 0;
  for (double v : p.levels[0].hl.data()) hl += std::abs(v);
  for (double v : p.levels[0].lh.data()) other += std::abs(v);
  for (double v : p.levels[0].hh.data()) other += std::abs(v);
  EXPECT_GT(hl, 0.0);
  EXPECT_NEAR(other, 0.0, 1e-9);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_EQ(p.levels[0].hl(x, y) != 0.0, x == 2);
}

TEST(FuseDetails, TranslationCovariantOnLattice) {
  std::mt19937_64 rng(5);
  const auto k = WaveletKernel::haar(Extension::periodic);
  const auto img = oracle::random_image(rng, 32, 24);
  for (auto [dx, dy] : {std::pair{4, 0}, std::pair{0, 8}, std::pair{12, 4}}) {
    GrayImage shifted(32, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x) shifted((x + dx) % 32, (y + dy) % 24) = img(x, y);
    const auto a = fuse_details(dwt2_multilevel(img, 2, k));
    const auto b = fuse_details(dwt2_multilevel(shifted, 2, k));
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x) EXPECT_NEAR(b((x + dx) % 32, (y + dy) % 24), a(x, y), 1e-9);
  }
}

TEST(SubbandMosaic, HasInputShape) {
  std::mt19937_64 rng(6);
  const auto p = dwt2_multilevel(oracle::random_image(rng, 33, 20), 2, WaveletKernel::haar());
  const auto m = subband_mosaic(p);
  EXPECT_EQ(m.width(), 33);
  EXPECT_EQ(m.height(), 20);
}
