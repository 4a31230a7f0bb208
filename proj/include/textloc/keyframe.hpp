#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "textloc/error.hpp"
#include "textloc/image.hpp"
#include "textloc/shot_detector.hpp"

namespace textloc {

/// Temporally maximum occurrence frame: per-pixel modal luminance bin over a shot.
struct Tmof {
  Plane<int> modal_bin;
  int bin_count = 32;

  int width() const noexcept { return modal_bin.width(); }
  int height() const noexcept { return modal_bin.height(); }
  double bin_width() const noexcept { return 256.0 / bin_count; }
};

struct KeyframeSet {
  Shot shot;
  std::vector<int> keyframe_indices;
  std::vector<double> distance_curve;
};

enum class KeyframeMode { peaks, middle };

inline void check_bin_count(int bins) {
  if (bins < 1 || bins > 256 || 256 % bins != 0)
    throw DomainError("TMOF bin count must divide 256, got " + std::to_string(bins));
}

inline int luminance_bin(double y, int bins) {
  const int b = static_cast<int>(std::floor(std::clamp(y, 0.0, 255.0) * bins / 256.0));
  return std::min(b, bins - 1);
}

/// Mode ties resolve to the lower bin.
inline Tmof build_tmof(std::span<const Frame> frames, int bins = 32) {
  check_bin_count(bins);
  if (frames.empty()) throw DomainError("build_tmof: empty shot");
  const int w = frames.front().width(), h = frames.front().height();
  const std::size_t npix = static_cast<std::size_t>(w) * h;
  std::vector<std::uint32_t> counts(npix * bins, 0);
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) throw DomainError("build_tmof: frame dimensions differ within shot");
    const auto ys = f.y.data();
    for (std::size_t p = 0; p < npix; ++p) ++counts[p * bins + luminance_bin(ys[p], bins)];
  }
  Tmof t{Plane<int>(w, h), bins};
  auto modal = t.modal_bin.data();
  for (std::size_t p = 0; p < npix; ++p) {
    const auto first = counts.begin() + static_cast<std::ptrdiff_t>(p * bins);
    modal[p] = static_cast<int>(std::max_element(first, first + bins) - first);
  }
  return t;
}

/// Mean absolute bin deviation from the TMOF, in intensity units.
inline double tmof_distance(const Frame& frame, const Tmof& tmof) {
  if (frame.width() != tmof.width() || frame.height() != tmof.height())
    throw DomainError("tmof_distance: frame and TMOF dimensions differ");
  const auto ys = frame.y.data();
  const auto modal = tmof.modal_bin.data();
  long long acc = 0;
  for (std::size_t p = 0; p < ys.size(); ++p) acc += std::abs(luminance_bin(ys[p], tmof.bin_count) - modal[p]);
  return static_cast<double>(acc) * tmof.bin_width() / static_cast<double>(ys.size());
}

inline int middle_frame(const Shot& shot) { return shot.start + (shot.end - shot.start) / 2; }

/// curve[k] belongs to frame shot.start + k. Picks strict interior local maxima above the curve mean,
/// falling back to the middle frame so every shot yields a keyframe.
inline KeyframeSet select_keyframes(std::span<const double> curve, const Shot& shot,
                                    KeyframeMode mode = KeyframeMode::peaks) {
  if (curve.size() != static_cast<std::size_t>(shot.length()))
    throw DomainError("select_keyframes: curve length does not match shot length");
  KeyframeSet set{shot, {}, std::vector<double>(curve.begin(), curve.end())};
  if (mode == KeyframeMode::peaks && curve.size() >= 3) {
    const double mean = std::accumulate(curve.begin(), curve.end(), 0.0) / static_cast<double>(curve.size());
    for (std::size_t k = 1; k + 1 < curve.size(); ++k)
      if (curve[k] > curve[k - 1] && curve[k] > curve[k + 1] && curve[k] > mean)
        set.keyframe_indices.push_back(shot.start + static_cast<int>(k));
  }
  if (set.keyframe_indices.empty()) set.keyframe_indices.push_back(middle_frame(shot));
  return set;
}

/// TMOF + distance curve + peak selection for one shot. `frames` are exactly the shot's frames.
inline KeyframeSet extract_keyframes(std::span<const Frame> frames, const Shot& shot, int bins = 32,
                                     KeyframeMode mode = KeyframeMode::peaks) {
  const Tmof tmof = build_tmof(frames, bins);
  std::vector<double> curve;
  curve.reserve(frames.size());
  for (const auto& f : frames) curve.push_back(tmof_distance(f, tmof));
  return select_keyframes(curve, shot, mode);
}

}  // namespace textloc
