#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "textloc/error.hpp"

namespace textloc {

/// Row-major width×height matrix. The storage for every image-like value in the library.
template <typename T>
class Plane {
 public:
  using value_type = T;

  Plane() = default;
  Plane(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw DomainError("negative plane dimensions");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Plane(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0) throw DomainError("negative plane dimensions");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw DomainError("plane data length " + std::to_string(data_.size()) + " does not match " +
                        std::to_string(width) + "x" + std::to_string(height));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  std::span<T> row(int y) noexcept { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int y) const noexcept {
    return {data_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(const Plane& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Plane<double>;
/// 1 = foreground (candidate text), 0 = background.
using BinaryImage = Plane<std::uint8_t>;
using BytePlane = Plane<std::uint8_t>;

/// One decoded frame in YIQ. Y in [0,255]; I and Q are not clamped.
struct Frame {
  int index = 0;
  GrayImage y;
  GrayImage i;
  GrayImage q;

  int width() const noexcept { return y.width(); }
  int height() const noexcept { return y.height(); }
};

/// Axis-aligned rectangle, top-left origin, half-open extent [x, x+w) × [y, y+h).
struct Box {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const noexcept { return static_cast<long long>(w) * h; }
  int right() const noexcept { return x + w; }
  int bottom() const noexcept { return y + h; }
  bool contains(const Box& o) const noexcept {
    return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
  }
  bool within(int width, int height) const noexcept {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && right() <= width && bottom() <= height;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

inline long long intersection_area(const Box& a, const Box& b) noexcept {
  const long long w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const long long h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return (w > 0 && h > 0) ? w * h : 0;
}

/// Min-max rescale to [0,255]. A (numerically) constant image is returned clamped, not stretched.
inline GrayImage rescale_to_byte_range(const GrayImage& img) {
  GrayImage out = img;
  if (img.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(img.data().begin(), img.data().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  auto values = out.data();
  if (hi - lo > 1e-9) {
    const double scale = 255.0 / (hi - lo);
    for (double& v : values) v = (v - lo) * scale;
  } else {
    for (double& v : values) v = std::clamp(v, 0.0, 255.0);
  }
  return out;
}

/// Round-to-nearest byte rendering of a real image, saturating.
inline BytePlane to_bytes(const GrayImage& img) {
  BytePlane out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t k = 0; k < src.size(); ++k)
    dst[k] = static_cast<std::uint8_t>(std::clamp(std::lround(src[k]), 0L, 255L));
  return out;
}

}  // namespace textloc
