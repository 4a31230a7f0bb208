#pragma once

#include <array>
#include <cstdint>

#include "textloc/image.hpp"

namespace textloc {

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// NTSC RGB -> YIQ.
inline constexpr Matrix3 kRgbToYiq = {{
    {0.299, 0.587, 0.114},
    {0.596, -0.274, -0.322},
    {0.211, -0.523, 0.312},
}};

inline constexpr Matrix3 invert(const Matrix3& m) {
  const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
  return {{
      {c00 / det, (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det, (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det},
      {c01 / det, (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det, (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det},
      {c02 / det, (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det, (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det},
  }};
}

/// Exact algebraic inverse of kRgbToYiq (not the rounded textbook coefficients).
inline constexpr Matrix3 kYiqToRgb = invert(kRgbToYiq);

/// Converts three byte planes to a YIQ frame. Throws DomainError on mismatched dimensions.
inline Frame rgb_to_yiq(const BytePlane& r, const BytePlane& g, const BytePlane& b, int index = 0) {
  if (!r.same_shape(g) || !r.same_shape(b)) throw DomainError("rgb_to_yiq: plane dimensions differ");
  Frame f;
  f.index = index;
  f.y = GrayImage(r.width(), r.height());
  f.i = GrayImage(r.width(), r.height());
  f.q = GrayImage(r.width(), r.height());
  auto rs = r.data(), gs = g.data(), bs = b.data();
  auto ys = f.y.data(), is = f.i.data(), qs = f.q.data();
  const auto& m = kRgbToYiq;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const double rv = rs[k], gv = gs[k], bv = bs[k];
    ys[k] = m[0][0] * rv + m[0][1] * gv + m[0][2] * bv;
    is[k] = m[1][0] * rv + m[1][1] * gv + m[1][2] * bv;
    qs[k] = m[2][0] * rv + m[2][1] * gv + m[2][2] * bv;
  }
  return f;
}

/// Inverse conversion, unclamped real RGB.
inline std::array<GrayImage, 3> yiq_to_rgb(const Frame& f) {
  std::array<GrayImage, 3> rgb{GrayImage(f.width(), f.height()), GrayImage(f.width(), f.height()),
                               GrayImage(f.width(), f.height())};
  auto ys = f.y.data(), is = f.i.data(), qs = f.q.data();
  const auto& m = kYiqToRgb;
  for (std::size_t k = 0; k < ys.size(); ++k)
    for (int c = 0; c < 3; ++c) rgb[c].data()[k] = m[c][0] * ys[k] + m[c][1] * is[k] + m[c][2] * qs[k];
  return rgb;
}

}  // namespace textloc
