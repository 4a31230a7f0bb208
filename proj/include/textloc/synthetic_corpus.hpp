#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textloc/error.hpp"
#include "textloc/evaluation.hpp"
#include "textloc/image.hpp"
#include "textloc/media_io.hpp"

namespace textloc::corpus {

// 5x7 bitmap font, one byte per row (bit 4 = leftmost column).
namespace glyphs {

using Glyph = std::array<std::uint8_t, 7>;

inline const Glyph& lookup(char c) {
  static const Glyph space{0, 0, 0, 0, 0, 0, 0};
  static const Glyph unknown{0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04};
  static const std::array<Glyph, 10> digits{{
      {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
      {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
      {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
      {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
      {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},
  }};
  static const std::array<Glyph, 26> letters{{
      {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}, {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},
      {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}, {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E},
      {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}, {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}, {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},
      {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}, {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},
      {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}, {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},
      {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}, {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},
      {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}, {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},
      {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}, {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},
      {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},
      {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}, {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},
      {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F},
  }};
  const unsigned char u = static_cast<unsigned char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == ' ') return space;
  if (u >= '0' && u <= '9') return digits[u - '0'];
  if (u >= 'A' && u <= 'Z') return letters[u - 'A'];
  return unknown;
}

inline constexpr int kCols = 5;
inline constexpr int kRows = 7;

}  // namespace glyphs

enum class BackgroundKind { flat, gradient, noise };

struct Background {
  BackgroundKind kind = BackgroundKind::flat;
  double level = 0.0;
  /// Ramp span (gradient) or static texture half-range (noise).
  double amplitude = 0.0;
};

/// A line of glyphs stretched to fill the box exactly.
struct TextItem {
  Box box;
  std::string text;
  double intensity = 255.0;
};

struct Scene {
  int frames = 1;
  Background background;
  /// Per-frame, per-pixel uniform jitter half-range.
  double jitter = 0.0;
  std::vector<TextItem> texts;
};

struct CorpusSpec {
  std::uint64_t seed = 0;
  int width = 160;
  int height = 120;
  std::vector<Scene> scenes;
  bool write_y4m = false;
};

struct Corpus {
  std::vector<BytePlane> frames;
  /// One entry per frame (frame ids "0", "1", ...).
  std::vector<GroundTruth> truth;
  /// First frame index of every scene after the first.
  std::vector<int> cuts;
};

// ---------------------------------------------------------------------------
// Spec (de)serialisation

namespace detail {

inline BackgroundKind parse_kind(const std::string& s) {
  if (s == "flat") return BackgroundKind::flat;
  if (s == "gradient") return BackgroundKind::gradient;
  if (s == "noise") return BackgroundKind::noise;
  throw ConfigError("unknown background kind '" + s + "'");
}

inline const char* kind_name(BackgroundKind k) {
  switch (k) {
    case BackgroundKind::flat: return "flat";
    case BackgroundKind::gradient: return "gradient";
    case BackgroundKind::noise: return "noise";
  }
  return "flat";
}

/// Uniform double in [0,1) from raw engine output, independent of the standard library's distributions.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(unit(rng) * (hi - lo + 1));
}

}  // namespace detail

inline void validate(const CorpusSpec& spec) {
  if (spec.width < 16 || spec.height < 16) throw ConfigError("corpus frames must be at least 16x16");
  if (spec.scenes.empty()) throw ConfigError("corpus spec has no scenes");
  for (std::size_t s = 0; s < spec.scenes.size(); ++s) {
    const auto& sc = spec.scenes[s];
    const std::string where = "scene " + std::to_string(s);
    if (sc.frames < 1) throw ConfigError(where + ": frames must be >= 1");
    if (sc.background.level < 0 || sc.background.level > 255) throw ConfigError(where + ": level outside [0,255]");
    if (sc.background.amplitude < 0 || sc.jitter < 0) throw ConfigError(where + ": negative amplitude/jitter");
    for (const auto& t : sc.texts) {
      if (!t.box.within(spec.width, spec.height))
        throw ConfigError(where + ": text box (" + std::to_string(t.box.x) + "," + std::to_string(t.box.y) + "," +
                          std::to_string(t.box.w) + "," + std::to_string(t.box.h) + ") outside the frame");
      if (t.text.empty()) throw ConfigError(where + ": empty text item");
      if (t.intensity < 0 || t.intensity > 255) throw ConfigError(where + ": text intensity outside [0,255]");
    }
  }
}

inline CorpusSpec spec_from_json(const nlohmann::json& j) {
  CorpusSpec spec;
  try {
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.width = j.value("width", 160);
    spec.height = j.value("height", 120);
    spec.write_y4m = j.value("y4m", false);
    for (const auto& js : j.at("scenes")) {
      Scene sc;
      sc.frames = js.value("frames", 1);
      sc.jitter = js.value("jitter", 0.0);
      if (js.contains("background")) {
        const auto& bg = js.at("background");
        sc.background.kind = detail::parse_kind(bg.value("kind", std::string("flat")));
        sc.background.level = bg.value("level", 0.0);
        sc.background.amplitude = bg.value("amplitude", 0.0);
      }
      for (const auto& jt : js.value("texts", nlohmann::json::array())) {
        TextItem t;
        t.box = {jt.at("x").get<int>(), jt.at("y").get<int>(), jt.at("w").get<int>(), jt.at("h").get<int>()};
        t.text = jt.value("text", std::string("TEXT"));
        t.intensity = jt.value("intensity", 255.0);
        sc.texts.push_back(std::move(t));
      }
      spec.scenes.push_back(std::move(sc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("corpus spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

inline nlohmann::json spec_to_json(const CorpusSpec& spec) {
  nlohmann::json scenes = nlohmann::json::array();
  for (const auto& sc : spec.scenes) {
    nlohmann::json texts = nlohmann::json::array();
    for (const auto& t : sc.texts)
      texts.push_back({{"x", t.box.x}, {"y", t.box.y}, {"w", t.box.w}, {"h", t.box.h}, {"text", t.text},
                       {"intensity", t.intensity}});
    scenes.push_back({{"frames", sc.frames},
                      {"jitter", sc.jitter},
                      {"background",
                       {{"kind", detail::kind_name(sc.background.kind)},
                        {"level", sc.background.level},
                        {"amplitude", sc.background.amplitude}}},
                      {"texts", texts}});
  }
  return {{"seed", spec.seed}, {"width", spec.width}, {"height", spec.height}, {"y4m", spec.write_y4m},
          {"scenes", scenes}};
}

// ---------------------------------------------------------------------------
// Rendering

/// Paints `item` into `canvas`: glyph columns (5 per char, 1 blank between chars) and 7 rows
/// are stretched by nearest-neighbour mapping onto the item box.
inline void render_text(GrayImage& canvas, const TextItem& item) {
  const int n = static_cast<int>(item.text.size());
  const int logical_cols = n * (glyphs::kCols + 1) - 1;
  for (int py = 0; py < item.box.h; ++py) {
    const int row = py * glyphs::kRows / item.box.h;
    for (int px = 0; px < item.box.w; ++px) {
      const int col = static_cast<int>(static_cast<long long>(px) * logical_cols / item.box.w);
      const int ch = col / (glyphs::kCols + 1), gx = col % (glyphs::kCols + 1);
      if (gx == glyphs::kCols) continue;
      const auto& g = glyphs::lookup(item.text[ch]);
      if (g[row] & (1u << (glyphs::kCols - 1 - gx))) canvas(item.box.x + px, item.box.y + py) = item.intensity;
    }
  }
}

inline GrayImage render_background(const Background& bg, int w, int h, std::mt19937_64& rng) {
  GrayImage img(w, h, bg.level);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      switch (bg.kind) {
        case BackgroundKind::flat: break;
        case BackgroundKind::gradient: img(x, y) += bg.amplitude * (static_cast<double>(x) / std::max(1, w - 1) - 0.5); break;
        case BackgroundKind::noise: img(x, y) += detail::uniform(rng, -bg.amplitude, bg.amplitude); break;
      }
    }
  }
  return img;
}

/// Deterministic for a given spec (including seed).
inline Corpus render(const CorpusSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  Corpus out;
  int frame_index = 0;
  for (std::size_t s = 0; s < spec.scenes.size(); ++s) {
    const auto& sc = spec.scenes[s];
    if (s > 0) out.cuts.push_back(frame_index);
    GrayImage base = render_background(sc.background, spec.width, spec.height, rng);
    for (const auto& t : sc.texts) render_text(base, t);
    std::vector<Box> boxes;
    for (const auto& t : sc.texts) boxes.push_back(t.box);
    for (int f = 0; f < sc.frames; ++f, ++frame_index) {
      GrayImage frame = base;
      if (sc.jitter > 0)
        for (double& v : frame.data()) v += detail::uniform(rng, -sc.jitter, sc.jitter);
      out.frames.push_back(to_bytes(frame));
      out.truth.push_back({std::to_string(frame_index), boxes, std::nullopt});
    }
  }
  return out;
}

inline std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d.png", index);
  return buf;
}

/// Writes frames/NNNN.png, gt.jsonl, cuts.json (and video.y4m when requested) under out_dir.
inline Corpus generate(const CorpusSpec& spec, const std::filesystem::path& out_dir) {
  Corpus corpus = render(spec);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "frames", ec);
  if (ec) throw IoError((out_dir / "frames").string(), "cannot create directory");
  for (std::size_t k = 0; k < corpus.frames.size(); ++k)
    write_png(out_dir / "frames" / frame_filename(static_cast<int>(k)), corpus.frames[k]);
  {
    std::ofstream gt(out_dir / "gt.jsonl");
    if (!gt) throw IoError((out_dir / "gt.jsonl").string(), "cannot write file");
    for (const auto& t : corpus.truth) gt << to_jsonl_line(t.frame_id, t.boxes) << '\n';
  }
  {
    std::ofstream cuts(out_dir / "cuts.json");
    if (!cuts) throw IoError((out_dir / "cuts.json").string(), "cannot write file");
    cuts << nlohmann::json(corpus.cuts).dump() << '\n';
  }
  if (spec.write_y4m) {
    std::vector<RgbImage> rgb;
    for (const auto& f : corpus.frames) rgb.push_back({f, f, f});
    write_y4m(out_dir / "video.y4m", rgb);
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Randomised spec builders used by the acceptance suite and `textloc gen --preset`

inline std::string random_word(std::mt19937_64& rng, int len) {
  static const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string s;
  for (int k = 0; k < len; ++k) s += alphabet[detail::uniform_int(rng, 0, static_cast<int>(alphabet.size()) - 1)];
  return s;
}

/// Multi-scene video: consecutive scene levels differ by 80..120 grey levels.
inline CorpusSpec make_cut_video_spec(std::uint64_t seed, int width = 160, int height = 120) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  CorpusSpec spec;
  spec.seed = seed;
  spec.width = width;
  spec.height = height;
  const int n_scenes = detail::uniform_int(rng, 2, 4);
  double level = detail::uniform(rng, 20.0, 235.0);
  for (int s = 0; s < n_scenes; ++s) {
    Scene sc;
    sc.frames = detail::uniform_int(rng, 15, 30);
    sc.background.kind = static_cast<BackgroundKind>(detail::uniform_int(rng, 0, 2));
    sc.background.level = level;
    sc.background.amplitude = detail::uniform(rng, 0.0, 20.0);
    sc.jitter = 2.0;
    if (detail::unit(rng) < 0.5) {
      const int h = detail::uniform_int(rng, 10, 20);
      const int len = detail::uniform_int(rng, 3, 6);
      const int w = std::min(width - 8, h * (6 * len - 1) / 7);
      const double ink = level < 128 ? 250.0 : 5.0;
      sc.texts.push_back({{detail::uniform_int(rng, 2, width - w - 2), detail::uniform_int(rng, 2, height - h - 2), w, h},
                          random_word(rng, len), ink});
    }
    spec.scenes.push_back(std::move(sc));
    // next level: at least 80 away, staying inside [20, 235]
    double next;
    do {
      const double gap = detail::uniform(rng, 80.0, 120.0);
      next = detail::unit(rng) < 0.5 ? level - gap : level + gap;
      if (next < 20.0 || next > 235.0) next = level < 128.0 ? level + gap : level - gap;
    } while (next < 0.0 || next > 255.0);
    level = next;
  }
  return spec;
}

/// n single-frame scenes, each with 1..3 non-overlapping high-contrast text lines of height 10..40.
inline CorpusSpec make_text_frames_spec(std::uint64_t seed, int n_frames = 50, int width = 320, int height = 240) {
  std::mt19937_64 rng(seed * 0xD1B54A32D192ED03ULL + 7);
  CorpusSpec spec;
  spec.seed = seed;
  spec.width = width;
  spec.height = height;
  for (int f = 0; f < n_frames; ++f) {
    Scene sc;
    sc.frames = 1;
    sc.background.kind = detail::unit(rng) < 0.5 ? BackgroundKind::flat : BackgroundKind::gradient;
    sc.background.level = detail::uniform(rng, 10.0, 245.0);
    sc.background.amplitude = detail::uniform(rng, 0.0, 30.0);
    sc.jitter = 2.0;
    const double ink = sc.background.level < 128.0 ? detail::uniform(rng, 220.0, 255.0) : detail::uniform(rng, 0.0, 35.0);
    const int lines = detail::uniform_int(rng, 1, 3);
    std::vector<Box> taken;
    for (int l = 0; l < lines; ++l) {
      for (int attempt = 0; attempt < 200; ++attempt) {
        const int h = detail::uniform_int(rng, 10, 40);
        int len = detail::uniform_int(rng, 3, 8);
        while (len > 1 && h * (6 * len - 1) / 7 > width - 16) --len;
        const int w = h * (6 * len - 1) / 7;
        const Box b{detail::uniform_int(rng, 8, width - w - 8), detail::uniform_int(rng, 8, height - h - 8), w, h};
        // keep lines apart so neither the MGD window nor dilation joins them
        const Box halo{b.x - 24, b.y - 16, b.w + 48, b.h + 32};
        if (std::any_of(taken.begin(), taken.end(), [&](const Box& o) { return intersection_area(halo, o) > 0; }))
          continue;
        taken.push_back(b);
        sc.texts.push_back({b, random_word(rng, len), ink});
        break;
      }
    }
    spec.scenes.push_back(std::move(sc));
  }
  return spec;
}

}  // namespace textloc::corpus
