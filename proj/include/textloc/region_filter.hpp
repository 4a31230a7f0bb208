#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "textloc/error.hpp"
#include "textloc/image.hpp"
#include "textloc/saliency.hpp"

namespace textloc {

using Histogram = std::array<long long, 256>;

/// Rounds each value to the nearest level in [0,255].
inline Histogram histogram256(const GrayImage& img) {
  Histogram hist{};
  for (double v : img.data()) ++hist[static_cast<std::size_t>(std::clamp(std::lround(v), 0L, 255L))];
  return hist;
}

/// Relative tolerance under which two between-class variances count as tied.
inline constexpr long double kOtsuTieTolerance = 1e-12L;

/// Level t maximising between-class variance of {<= t} vs {> t}; earliest level wins ties.
/// Throws DegenerateError when fewer than two levels are populated.
inline int otsu_threshold(const Histogram& hist) {
  long long total = 0;
  __int128 sum = 0;
  int populated = 0;
  for (int t = 0; t < 256; ++t) {
    if (hist[t] < 0) throw DomainError("otsu_threshold: negative histogram count");
    total += hist[t];
    sum += static_cast<__int128>(t) * hist[t];
    populated += hist[t] > 0;
  }
  if (populated < 2) throw DegenerateError("otsu_threshold: image has fewer than two grey levels");

  // sigma_b^2 * N^2 = (N*S0 - n0*S)^2 / (n0 * n1), with n0/S0 the count/sum of levels <= t.
  long long n0 = 0;
  __int128 s0 = 0;
  long double best = -1.0L;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    n0 += hist[t];
    s0 += static_cast<__int128>(t) * hist[t];
    const long long n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const long double diff = static_cast<long double>(static_cast<__int128>(total) * s0 - static_cast<__int128>(n0) * sum);
    const long double between = diff * diff / (static_cast<long double>(n0) * static_cast<long double>(n1));
    if (between > best * (1.0L + kOtsuTieTolerance)) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

inline int otsu_threshold(const GrayImage& img) { return otsu_threshold(histogram256(img)); }

/// Otsu's separability measure: between-class variance at threshold t over total variance, in [0,1].
/// Unimodal histograms score low (Gaussian ~0.64, flat ~0.75); two well separated modes approach 1.
inline double otsu_separability(const Histogram& hist, int t) {
  long double n = 0, sum = 0, sq = 0, n0 = 0, s0 = 0;
  for (int k = 0; k < 256; ++k) {
    const long double c = static_cast<long double>(hist[k]);
    n += c;
    sum += c * k;
    sq += c * k * k;
    if (k <= t) {
      n0 += c;
      s0 += c * k;
    }
  }
  const long double n1 = n - n0;
  if (n0 == 0 || n1 == 0) return 0.0;
  const long double mean = sum / n;
  const long double total = sq / n - mean * mean;
  if (total <= 0) return 0.0;
  const long double d = s0 / n0 - (sum - s0) / n1;
  return static_cast<double>((n0 / n) * (n1 / n) * d * d / total);
}

// ---------------------------------------------------------------------------
// Connected components

struct Component {
  int id = 0;
  /// Linear pixel indices (y * width + x), ascending.
  std::vector<int> pixels;
  Box bbox;
};

namespace detail {

class DisjointSet {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

}  // namespace detail

/// Maximal 4-connected foreground components, ordered by (top, left) of their bounding box.
/// Two-pass raster labelling with union-find.
inline std::vector<Component> label_components(const BinaryImage& img) {
  const int w = img.width(), h = img.height();
  std::vector<int> labels(img.size(), -1);
  detail::DisjointSet sets;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!img(x, y)) continue;
      const int idx = y * w + x;
      const int left = x > 0 ? labels[idx - 1] : -1;
      const int up = y > 0 ? labels[idx - w] : -1;
      if (left < 0 && up < 0) {
        labels[idx] = sets.make();
      } else if (left >= 0 && up >= 0) {
        labels[idx] = left;
        sets.unite(left, up);
      } else {
        labels[idx] = std::max(left, up);
      }
    }
  }

  std::vector<int> root_slot;
  std::vector<Component> comps;
  for (int idx = 0; idx < static_cast<int>(labels.size()); ++idx) {
    if (labels[idx] < 0) continue;
    const int root = sets.find(labels[idx]);
    if (static_cast<int>(root_slot.size()) <= root) root_slot.resize(root + 1, -1);
    if (root_slot[root] < 0) {
      root_slot[root] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[root_slot[root]].pixels.push_back(idx);
  }
  for (auto& c : comps) {
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (int idx : c.pixels) {
      const int x = idx % w, y = idx / w;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    c.bbox = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  }
  // comps are in order of first raster pixel; stable sort keeps that as the final tie-break
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return std::pair(a.bbox.y, a.bbox.x) < std::pair(b.bbox.y, b.bbox.x);
  });
  for (std::size_t k = 0; k < comps.size(); ++k) comps[k].id = static_cast<int>(k) + 1;
  return comps;
}

// ---------------------------------------------------------------------------
// Geometric rules

enum class Verdict {
  accepted,
  rejected_ratio_density,  // AR < T1 || density < T2
  rejected_height,         // h > max_height || h < min_height
  rejected_size,           // w < min_width || w*h < min_area
};

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::accepted: return "accepted";
    case Verdict::rejected_ratio_density: return "rejected(i)";
    case Verdict::rejected_height: return "rejected(ii)";
    case Verdict::rejected_size: return "rejected(iii)";
  }
  return "?";
}

struct TextBox {
  Box box;
  long long edge_area = 0;
  double aspect_ratio = 0.0;
  double density = 0.0;
  Verdict verdict = Verdict::accepted;
};

inline TextBox make_text_box(const Box& box, long long edge_area) {
  if (box.w <= 0 || box.h <= 0) throw DomainError("make_text_box: empty box");
  TextBox t;
  t.box = box;
  t.edge_area = edge_area;
  t.aspect_ratio = static_cast<double>(box.w) / box.h;
  t.density = static_cast<double>(edge_area) / static_cast<double>(box.area());
  return t;
}

/// T1 (aspect-ratio floor) and T2 (density floor).
struct RuleThresholds {
  double ratio = 0.0;
  double density = 0.0;
};

/// Height/width/area limits; defaults are the published constants.
struct RuleConstants {
  int min_height = 6;
  int max_height = 50;
  int min_width = 5;
  int min_area = 24;
};

/// The first rule that fires, in order i, ii, iii.
inline Verdict geometric_filter(const TextBox& t, const RuleThresholds& th, const RuleConstants& rc = {}) {
  const int w = t.box.w, h = t.box.h;
  if (t.aspect_ratio < th.ratio || t.density < th.density) return Verdict::rejected_ratio_density;
  if (h > rc.max_height || h < rc.min_height) return Verdict::rejected_height;
  if (w < rc.min_width || static_cast<long long>(h) * w < rc.min_area) return Verdict::rejected_size;
  return Verdict::accepted;
}

/// Mean and population standard deviation of the MGD map after rescaling it to [0,1].
inline RuleThresholds compute_rule_thresholds(const SaliencyMap& map) {
  if (map.mgd.empty()) throw DomainError("compute_rule_thresholds: empty map");
  const GrayImage scaled = rescale_to_byte_range(map.mgd);
  const auto values = scaled.data();
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v / 255.0;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v / 255.0 - mean) * (v / 255.0 - mean);
  return {mean, std::sqrt(var / n)};
}

// ---------------------------------------------------------------------------
// Morphology

/// Binary dilation with a centred se_w x se_h rectangle (both odd).
inline BinaryImage dilate(const BinaryImage& img, int se_w, int se_h) {
  if (se_w < 1 || se_h < 1 || se_w % 2 == 0 || se_h % 2 == 0)
    throw DomainError("dilate: structuring element " + std::to_string(se_w) + "x" + std::to_string(se_h) +
                      " must have odd positive dimensions");
  const int w = img.width(), h = img.height(), rx = se_w / 2, ry = se_h / 2;
  // separable: a rectangle is the product of a row and a column segment
  BinaryImage horiz(w, h);
  std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + (img(x, y) ? 1 : 0);
    for (int x = 0; x < w; ++x)
      horiz(x, y) = prefix[std::min(w, x + rx + 1)] - prefix[std::max(0, x - rx)] > 0;
  }
  BinaryImage out(w, h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + (horiz(x, y) ? 1 : 0);
    for (int y = 0; y < h; ++y)
      out(x, y) = prefix[std::min(h, y + ry + 1)] - prefix[std::max(0, y - ry)] > 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Localisation

struct LocalizeParams {
  /// nullopt = derive from the map (compute_rule_thresholds).
  std::optional<RuleThresholds> thresholds;
  RuleConstants constants;
  int dilate_w = 7;
  int dilate_h = 3;
  /// Maps whose Otsu separability falls below this are treated as textless (0 disables).
  double min_separability = 0.8;
};

struct LocalizeTrace {
  std::optional<int> otsu_level;
  double separability = 0.0;
  RuleThresholds thresholds;
  BinaryImage binary;
  std::vector<TextBox> candidates;
  BinaryImage survivors;
  std::vector<TextBox> boxes;
};

namespace detail {

/// Summed-area table with a zero first row/column.
class IntegralImage {
 public:
  explicit IntegralImage(const BinaryImage& img) : w_(img.width() + 1), sums_(static_cast<std::size_t>(w_) * (img.height() + 1), 0) {
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        at(x + 1, y + 1) = (img(x, y) ? 1 : 0) + at(x, y + 1) + at(x + 1, y) - at(x, y);
  }
  long long count(const Box& b) const {
    return at(b.right(), b.bottom()) - at(b.x, b.bottom()) - at(b.right(), b.y) + at(b.x, b.y);
  }

 private:
  long long& at(int x, int y) { return sums_[static_cast<std::size_t>(y) * w_ + x]; }
  long long at(int x, int y) const { return sums_[static_cast<std::size_t>(y) * w_ + x]; }
  int w_;
  std::vector<long long> sums_;
};

}  // namespace detail

/// Otsu (with a unimodality check) -> components -> rules -> dilation of survivors -> regrouping.
/// Each final box is the tight extent of the surviving pixels that one dilated blob gathers;
/// boxes are re-checked against the rules and nested boxes fold into their container.
inline LocalizeTrace localize_traced(const SaliencyMap& map, const LocalizeParams& params = {}) {
  LocalizeTrace trace;
  const int w = map.width(), h = map.height();
  trace.binary = BinaryImage(w, h);
  trace.survivors = BinaryImage(w, h);
  if (map.mgd.empty()) return trace;

  const GrayImage scaled = rescale_to_byte_range(map.mgd);
  const Histogram hist = histogram256(scaled);
  try {
    trace.otsu_level = otsu_threshold(hist);
  } catch (const DegenerateError&) {
    return trace;
  }
  trace.separability = otsu_separability(hist, *trace.otsu_level);
  if (trace.separability < params.min_separability) return trace;
  for (std::size_t k = 0; k < scaled.size(); ++k)
    trace.binary.data()[k] = std::clamp(std::lround(scaled.data()[k]), 0L, 255L) > *trace.otsu_level;

  trace.thresholds = params.thresholds.value_or(compute_rule_thresholds(map));
  const detail::IntegralImage fg(trace.binary);
  for (const auto& comp : label_components(trace.binary)) {
    TextBox t = make_text_box(comp.bbox, fg.count(comp.bbox));
    t.verdict = geometric_filter(t, trace.thresholds, params.constants);
    if (t.verdict == Verdict::accepted)
      for (int idx : comp.pixels) trace.survivors.data()[idx] = 1;
    trace.candidates.push_back(t);
  }

  const BinaryImage grown = dilate(trace.survivors, params.dilate_w, params.dilate_h);
  const detail::IntegralImage kept(trace.survivors);
  std::vector<TextBox> boxes;
  for (const auto& blob : label_components(grown)) {
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (int idx : blob.pixels) {
      if (!trace.survivors.data()[idx]) continue;
      const int x = idx % w, y = idx / w;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 < 0) continue;
    const Box b{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    TextBox t = make_text_box(b, kept.count(b));
    t.verdict = geometric_filter(t, trace.thresholds, params.constants);
    if (t.verdict == Verdict::accepted) boxes.push_back(t);
  }
  for (std::size_t a = 0; a < boxes.size(); ++a) {
    bool nested = false;
    for (std::size_t b = 0; b < boxes.size() && !nested; ++b)
      nested = a != b && boxes[b].box.contains(boxes[a].box) && (boxes[a].box != boxes[b].box || b < a);
    if (!nested) trace.boxes.push_back(boxes[a]);
  }
  std::stable_sort(trace.boxes.begin(), trace.boxes.end(), [](const TextBox& a, const TextBox& b) {
    return std::pair(a.box.y, a.box.x) < std::pair(b.box.y, b.box.x);
  });
  return trace;
}

/// Accepted text boxes only.
inline std::vector<TextBox> localize(const SaliencyMap& map, const LocalizeParams& params = {}) {
  return localize_traced(map, params).boxes;
}

}  // namespace textloc
