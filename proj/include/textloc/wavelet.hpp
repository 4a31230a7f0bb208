#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "textloc/error.hpp"
#include "textloc/image.hpp"

namespace textloc {

enum class Extension { symmetric, periodic };

/// Orthonormal analysis filter pair. highpass[n] = (-1)^n lowpass[L-1-n].
struct WaveletKernel {
  std::string name;
  std::vector<double> lowpass;
  std::vector<double> highpass;
  Extension extension = Extension::symmetric;

  int taps() const noexcept { return static_cast<int>(lowpass.size()); }

  static WaveletKernel from_lowpass(std::string name, std::vector<double> lo, Extension ext) {
    std::vector<double> hi(lo.size());
    const std::size_t n = lo.size();
    for (std::size_t k = 0; k < n; ++k) hi[k] = (k % 2 == 0 ? 1.0 : -1.0) * lo[n - 1 - k];
    return {std::move(name), std::move(lo), std::move(hi), ext};
  }

  static WaveletKernel haar(Extension ext = Extension::symmetric) {
    const double s = 1.0 / std::sqrt(2.0);
    return from_lowpass("haar", {s, s}, ext);
  }

  static WaveletKernel db2(Extension ext = Extension::symmetric) {
    const double r3 = std::sqrt(3.0), d = 4.0 * std::sqrt(2.0);
    return from_lowpass("db2", {(1 + r3) / d, (3 + r3) / d, (3 - r3) / d, (1 - r3) / d}, ext);
  }

  static WaveletKernel by_name(const std::string& name, Extension ext = Extension::symmetric) {
    if (name == "haar") return haar(ext);
    if (name == "db2") return db2(ext);
    throw DomainError("unknown wavelet '" + name + "' (expected haar or db2)");
  }
};

/// One decomposition level. lh = row lowpass then column highpass, hl = row highpass then column lowpass.
struct Subbands {
  GrayImage ll, lh, hl, hh;
};

/// levels[l-1] holds the detail bands of level l; ll is the deepest approximation.
struct SubbandPyramid {
  struct Level {
    GrayImage lh, hl, hh;
  };
  std::vector<Level> levels;
  GrayImage ll;
  int width = 0;
  int height = 0;
};

namespace detail {

inline int extend_index(int i, int n, Extension ext) {
  if (ext == Extension::periodic) return ((i % n) + n) % n;
  // half-sample symmetric: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
  const int period = 2 * n;
  i = ((i % period) + period) % period;
  return i < n ? i : period - 1 - i;
}

// out[k] = sum_n taps[n] * in[2k + n], k < ceil(n/2).
inline void analyze_1d(std::span<const double> in, std::span<const double> taps, std::span<double> out, Extension ext) {
  const int n = static_cast<int>(in.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t < taps.size(); ++t)
      acc += taps[t] * in[extend_index(static_cast<int>(2 * k + t), n, ext)];
    out[k] = acc;
  }
}

// Adjoint of analyze_1d for both bands, accumulating into out (length 2 * coefficient count).
inline void synthesize_1d(std::span<const double> lo_coef, std::span<const double> hi_coef, std::span<const double> lo,
                          std::span<const double> hi, std::span<double> out, Extension ext) {
  const int n = static_cast<int>(out.size());
  for (std::size_t k = 0; k < lo_coef.size(); ++k) {
    for (std::size_t t = 0; t < lo.size(); ++t) {
      const int m = extend_index(static_cast<int>(2 * k + t), n, ext);
      out[m] += lo[t] * lo_coef[k] + hi[t] * hi_coef[k];
    }
  }
}

}  // namespace detail

inline Subbands dwt2_level(const GrayImage& img, const WaveletKernel& kernel) {
  if (img.empty()) throw DomainError("dwt2_level: empty image");
  const int w = img.width(), h = img.height();
  const int hw = (w + 1) / 2, hh = (h + 1) / 2;
  // rows
  GrayImage row_lo(hw, h), row_hi(hw, h);
  for (int y = 0; y < h; ++y) {
    detail::analyze_1d(img.row(y), kernel.lowpass, row_lo.row(y), kernel.extension);
    detail::analyze_1d(img.row(y), kernel.highpass, row_hi.row(y), kernel.extension);
  }
  // columns
  Subbands s{GrayImage(hw, hh), GrayImage(hw, hh), GrayImage(hw, hh), GrayImage(hw, hh)};
  std::vector<double> col(h), lo(hh), hi(hh);
  auto columns = [&](const GrayImage& src, GrayImage& dst_lo, GrayImage& dst_hi) {
    for (int x = 0; x < hw; ++x) {
      for (int y = 0; y < h; ++y) col[y] = src(x, y);
      detail::analyze_1d(col, kernel.lowpass, lo, kernel.extension);
      detail::analyze_1d(col, kernel.highpass, hi, kernel.extension);
      for (int y = 0; y < hh; ++y) {
        dst_lo(x, y) = lo[y];
        dst_hi(x, y) = hi[y];
      }
    }
  };
  columns(row_lo, s.ll, s.lh);
  columns(row_hi, s.hl, s.hh);
  return s;
}

/// Synthesis (adjoint) of dwt2_level. Exact inverse for periodic extension on even dimensions.
inline GrayImage idwt2_level(const Subbands& s, const WaveletKernel& kernel) {
  if (!s.ll.same_shape(s.lh) || !s.ll.same_shape(s.hl) || !s.ll.same_shape(s.hh))
    throw DomainError("idwt2_level: subband dimensions differ");
  const int cw = s.ll.width(), ch = s.ll.height();
  const int w = 2 * cw, h = 2 * ch;
  GrayImage row_lo(cw, h), row_hi(cw, h);
  std::vector<double> lo(ch), hi(ch), col(h);
  auto columns = [&](const GrayImage& band_lo, const GrayImage& band_hi, GrayImage& dst) {
    for (int x = 0; x < cw; ++x) {
      for (int y = 0; y < ch; ++y) {
        lo[y] = band_lo(x, y);
        hi[y] = band_hi(x, y);
      }
      std::fill(col.begin(), col.end(), 0.0);
      detail::synthesize_1d(lo, hi, kernel.lowpass, kernel.highpass, col, kernel.extension);
      for (int y = 0; y < h; ++y) dst(x, y) = col[y];
    }
  };
  columns(s.ll, s.lh, row_lo);
  columns(s.hl, s.hh, row_hi);
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    detail::synthesize_1d(row_lo.row(y), row_hi.row(y), kernel.lowpass, kernel.highpass, out.row(y), kernel.extension);
  return out;
}

/// Largest L with floor(min(W,H) / 2^L) >= tap count (0 if none).
inline int max_dwt_levels(int width, int height, const WaveletKernel& kernel) {
  int levels = 0;
  const int m = std::min(width, height);
  while ((m >> (levels + 1)) >= kernel.taps()) ++levels;
  return levels;
}

inline SubbandPyramid dwt2_multilevel(const GrayImage& img, int levels, const WaveletKernel& kernel) {
  if (levels < 1) throw DomainError("dwt2_multilevel: levels must be >= 1");
  const int max_levels = max_dwt_levels(img.width(), img.height(), kernel);
  if (levels > max_levels)
    throw DomainError("dwt2_multilevel: " + std::to_string(levels) + " levels too many for " +
                      std::to_string(img.width()) + "x" + std::to_string(img.height()) + " with " + kernel.name +
                      "; max feasible L = " + std::to_string(max_levels));
  SubbandPyramid pyr;
  pyr.width = img.width();
  pyr.height = img.height();
  GrayImage current = img;
  for (int l = 0; l < levels; ++l) {
    Subbands s = dwt2_level(current, kernel);
    pyr.levels.push_back({std::move(s.lh), std::move(s.hl), std::move(s.hh)});
    current = std::move(s.ll);
  }
  pyr.ll = std::move(current);
  return pyr;
}

/// Sum over levels of nearest-neighbour-upsampled |lh|+|hl|+|hh|, rescaled to [0,255].
inline GrayImage fuse_details(const SubbandPyramid& pyr) {
  GrayImage out(pyr.width, pyr.height);
  for (std::size_t l = 0; l < pyr.levels.size(); ++l) {
    const auto& lvl = pyr.levels[l];
    const int shift = static_cast<int>(l) + 1;
    for (int y = 0; y < pyr.height; ++y) {
      const int sy = y >> shift;
      for (int x = 0; x < pyr.width; ++x) {
        const int sx = x >> shift;
        out(x, y) += std::abs(lvl.lh(sx, sy)) + std::abs(lvl.hl(sx, sy)) + std::abs(lvl.hh(sx, sy));
      }
    }
  }
  return rescale_to_byte_range(out);
}

/// Standard quadrant layout (LL top-left, then HL/LH/HH of each level), each band rescaled independently.
inline GrayImage subband_mosaic(const SubbandPyramid& pyr) {
  GrayImage out(pyr.width, pyr.height);
  auto blit = [&](const GrayImage& band, int ox, int oy) {
    const GrayImage r = rescale_to_byte_range(band);
    for (int y = 0; y < r.height() && oy + y < out.height(); ++y)
      for (int x = 0; x < r.width() && ox + x < out.width(); ++x) out(ox + x, oy + y) = r(x, y);
  };
  for (std::size_t l = 0; l < pyr.levels.size(); ++l) {
    const auto& lvl = pyr.levels[l];
    const int bw = lvl.lh.width(), bh = lvl.lh.height();
    blit(lvl.hl, bw, 0);
    blit(lvl.lh, 0, bh);
    blit(lvl.hh, bw, bh);
  }
  blit(pyr.ll, 0, 0);
  return out;
}

}  // namespace textloc
