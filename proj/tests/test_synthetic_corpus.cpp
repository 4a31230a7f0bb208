#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "textloc/synthetic_corpus.hpp"

using namespace textloc;
namespace corpus = textloc::corpus;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

corpus::CorpusSpec two_scenes() {
  corpus::CorpusSpec s;
  s.seed = 9;
  s.width = 64;
  s.height = 48;
  corpus::Scene a, b;
  a.frames = b.frames = 10;
  a.background.level = 30;
  b.background = {corpus::BackgroundKind::noise, 200, 10};
  b.jitter = 3;
  b.texts.push_back({{8, 8, 40, 12}, "AB1", 0});
  s.scenes = {a, b};
  return s;
}

}  // namespace

TEST(Corpus, CutsAndTruthByConstruction) {
  testutil::TempDir dir;
  const auto c = corpus::generate(two_scenes(), dir.path());
  EXPECT_EQ(c.frames.size(), 20u);
  EXPECT_EQ(c.cuts, std::vector<int>{10});
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "cuts.json")), nlohmann::json::array({10}));
  const auto gt = load_box_jsonl((dir / "gt.jsonl").string());
  ASSERT_EQ(gt.size(), 20u);
  EXPECT_TRUE(gt[0].boxes.empty());
  EXPECT_EQ(gt[15].frame_id, "15");
  EXPECT_EQ(gt[15].boxes, std::vector<Box>{(Box{8, 8, 40, 12})});
  for (int k = 0; k < 20; ++k) EXPECT_TRUE(fs::exists(dir / "frames" / corpus::frame_filename(k)));
}

TEST(Corpus, SameSeedIsByteIdentical) {
  testutil::TempDir a, b;
  auto spec = two_scenes();
  spec.write_y4m = true;
  corpus::generate(spec, a.path());
  corpus::generate(spec, b.path());
  for (const char* f : {"gt.jsonl", "cuts.json", "video.y4m", "frames/0000.png", "frames/0017.png"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  spec.seed = 10;
  testutil::TempDir c;
  corpus::generate(spec, c.path());
  EXPECT_NE(slurp(a / "frames/0017.png"), slurp(c / "frames/0017.png"));
}

TEST(Corpus, TextIsRenderedInsideItsBoxOnly) {
  auto spec = two_scenes();
  spec.scenes[1].background = {corpus::BackgroundKind::flat, 200, 0};
  spec.scenes[1].jitter = 0;
  const auto c = corpus::render(spec);
  const auto& f = c.frames[12];
  int ink = 0;
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const bool inside = x >= 8 && x < 48 && y >= 8 && y < 20;
      if (f(x, y) != 200) {
        EXPECT_TRUE(inside) << x << "," << y;
        ++ink;
      }
    }
  EXPECT_GT(ink, 40);
}

TEST(Corpus, SpecJsonRoundTripAndValidation) {
  const auto spec = two_scenes();
  const auto back = corpus::spec_from_json(corpus::spec_to_json(spec));
  EXPECT_EQ(corpus::spec_to_json(back), corpus::spec_to_json(spec));

  auto bad = spec;
  bad.scenes[1].texts[0].box = {50, 8, 40, 12};
  EXPECT_THROW(corpus::validate(bad), ConfigError);
  bad = spec;
  bad.scenes[0].frames = 0;
  EXPECT_THROW(corpus::validate(bad), ConfigError);
  bad = spec;
  bad.scenes.clear();
  EXPECT_THROW(corpus::validate(bad), ConfigError);
  EXPECT_THROW(corpus::spec_from_json(nlohmann::json{{"width", 64}}), ConfigError);
  EXPECT_THROW(corpus::spec_from_json(nlohmann::json::parse(R"({"scenes":[{"background":{"kind":"plaid"}}]})")),
               ConfigError);
}

TEST(Corpus, PresetsAreValidAndDeterministic) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto a = corpus::make_cut_video_spec(seed);
    EXPECT_NO_THROW(corpus::validate(a));
    EXPECT_EQ(corpus::spec_to_json(a), corpus::spec_to_json(corpus::make_cut_video_spec(seed)));
    for (std::size_t s = 1; s < a.scenes.size(); ++s)
      EXPECT_GE(std::abs(a.scenes[s].background.level - a.scenes[s - 1].background.level), 80.0);
    const auto t = corpus::make_text_frames_spec(seed, 10);
    EXPECT_NO_THROW(corpus::validate(t));
    EXPECT_EQ(t.scenes.size(), 10u);
    for (const auto& sc : t.scenes) {
      EXPECT_FALSE(sc.texts.empty());
      for (const auto& item : sc.texts) {
        EXPECT_GE(item.box.h, 10);
        EXPECT_LE(item.box.h, 40);
      }
    }
  }
}
