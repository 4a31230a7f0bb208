#pragma once

#include <algorithm>
#include <deque>
#include <string>
#include <vector>

#include "textloc/error.hpp"
#include "textloc/image.hpp"

namespace textloc {

/// Per-pixel max - min of the Laplacian image over a horizontal 1xN window.
struct SaliencyMap {
  GrayImage mgd;
  int window_n = 21;

  int width() const noexcept { return mgd.width(); }
  int height() const noexcept { return mgd.height(); }
};

/// 8-neighbour Laplacian [[-1,-1,-1],[-1,8,-1],[-1,-1,-1]] with half-sample symmetric borders. Signed output.
inline GrayImage laplacian(const GrayImage& img) {
  const int w = img.width(), h = img.height();
  if (w < 3 || h < 3)
    throw DomainError("laplacian: image " + std::to_string(w) + "x" + std::to_string(h) + " smaller than 3x3 mask");
  GrayImage out(w, h);
  auto clampi = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
  for (int y = 0; y < h; ++y) {
    const int ys[3] = {clampi(y - 1, h), y, clampi(y + 1, h)};
    for (int x = 0; x < w; ++x) {
      const int xs[3] = {clampi(x - 1, w), x, clampi(x + 1, w)};
      double sum = 0.0;
      for (int yy : ys)
        for (int xx : xs) sum += img(xx, yy);
      out(x, y) = 9.0 * img(x, y) - sum;
    }
  }
  return out;
}

/// Sliding-window max-min along rows using monotone deques; the window is clipped at the borders.
inline SaliencyMap mgd_map(const GrayImage& f, int n) {
  if (n < 3 || n % 2 == 0 || n > f.width())
    throw DomainError("mgd_map: window N=" + std::to_string(n) + " must be odd with 3 <= N <= width (" +
                      std::to_string(f.width()) + ")");
  const int w = f.width(), h = f.height(), r = (n - 1) / 2;
  SaliencyMap map{GrayImage(w, h), n};
  std::deque<int> maxq, minq;
  for (int y = 0; y < h; ++y) {
    const auto row = f.row(y);
    auto out = map.mgd.row(y);
    maxq.clear();
    minq.clear();
    int pushed = 0;
    for (int x = 0; x < w; ++x) {
      const int hi = std::min(w - 1, x + r);
      for (; pushed <= hi; ++pushed) {
        while (!maxq.empty() && row[maxq.back()] <= row[pushed]) maxq.pop_back();
        maxq.push_back(pushed);
        while (!minq.empty() && row[minq.back()] >= row[pushed]) minq.pop_back();
        minq.push_back(pushed);
      }
      const int lo = x - r;
      while (maxq.front() < lo) maxq.pop_front();
      while (minq.front() < lo) minq.pop_front();
      out[x] = row[maxq.front()] - row[minq.front()];
    }
  }
  return map;
}

}  // namespace textloc
