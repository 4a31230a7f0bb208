#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textloc/color.hpp"
#include "textloc/error.hpp"
#include "textloc/image.hpp"

namespace textloc {

namespace fs = std::filesystem;

/// 8-bit interleaved-free RGB raster.
struct RgbImage {
  BytePlane r, g, b;
  int width() const noexcept { return r.width(); }
  int height() const noexcept { return r.height(); }
};

enum class SourceKind { image, image_sequence, y4m };

namespace detail {

inline std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

inline bool is_image_file(const fs::path& p) {
  const auto ext = lower_extension(p);
  return ext == ".png" || ext == ".ppm" || ext == ".pgm";
}

inline std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path.string(), "read failed");
  return bytes;
}

inline RgbImage read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    if (!fs::exists(path)) throw IoError(path.string(), "cannot open file");
    throw FormatError("invalid PNG " + path.string() + ": " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("invalid PNG " + path.string() + ": " + msg);
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  RgbImage out{BytePlane(w, h), BytePlane(w, h), BytePlane(w, h)};
  for (std::size_t k = 0; k < out.r.size(); ++k) {
    out.r.data()[k] = buf[3 * k];
    out.g.data()[k] = buf[3 * k + 1];
    out.b.data()[k] = buf[3 * k + 2];
  }
  return out;
}

// Binary PNM (P5 grey / P6 colour), maxval <= 255.
inline RgbImage read_pnm(const fs::path& path) {
  const auto bytes = read_bytes(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw FormatError("malformed PNM header in " + path.string());
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1L << 24)) throw FormatError("PNM header value too large in " + path.string());
    }
    return static_cast<int>(v);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw FormatError("unsupported PNM variant (need P5/P6): " + path.string());
  const int channels = bytes[1] == '6' ? 3 : 1;
  pos = 2;
  const int w = read_int(), h = read_int(), maxval = read_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) throw FormatError("unsupported PNM geometry/maxval in " + path.string());
  ++pos;  // single whitespace before raster
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() < pos + need) throw FormatError("truncated PNM raster in " + path.string());
  RgbImage out{BytePlane(w, h), BytePlane(w, h), BytePlane(w, h)};
  auto scale = [maxval](std::uint8_t v) {
    return maxval == 255 ? v : static_cast<std::uint8_t>(std::lround(v * 255.0 / maxval));
  };
  for (std::size_t k = 0; k < out.r.size(); ++k) {
    const std::uint8_t* px = &bytes[pos + k * channels];
    out.r.data()[k] = scale(px[0]);
    out.g.data()[k] = scale(channels == 3 ? px[1] : px[0]);
    out.b.data()[k] = scale(channels == 3 ? px[2] : px[0]);
  }
  return out;
}

inline std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace detail

/// Reads one PNG, PPM or PGM file as 8-bit RGB.
inline RgbImage read_rgb_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError(path.string(), "cannot open file");
  const auto ext = detail::lower_extension(path);
  if (ext == ".ppm" || ext == ".pgm") return detail::read_pnm(path);
  return detail::read_png(path);
}

inline Frame read_image_frame(const fs::path& path, int index = 0) {
  const auto rgb = read_rgb_image(path);
  return rgb_to_yiq(rgb.r, rgb.g, rgb.b, index);
}

inline void write_png(const fs::path& path, const RgbImage& img) {
  std::vector<std::uint8_t> buf(img.r.size() * 3);
  for (std::size_t k = 0; k < img.r.size(); ++k) {
    buf[3 * k] = img.r.data()[k];
    buf[3 * k + 1] = img.g.data()[k];
    buf[3 * k + 2] = img.b.data()[k];
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError(path.string(), "cannot write PNG (" + msg + ")");
  }
}

inline void write_png(const fs::path& path, const BytePlane& gray) { write_png(path, RgbImage{gray, gray, gray}); }

inline void write_png(const fs::path& path, const GrayImage& gray) { write_png(path, to_bytes(gray)); }

// ---------------------------------------------------------------------------
// YUV4MPEG2

struct Y4mHeader {
  int width = 0;
  int height = 0;
  int fps_num = 0;
  int fps_den = 0;
  char interlace = 'p';
  /// "420", "420jpeg", "420paldv", "420mpeg2" or "444".
  std::string colorspace = "420jpeg";

  bool subsampled() const noexcept { return colorspace != "444"; }
  int chroma_width() const noexcept { return subsampled() ? (width + 1) / 2 : width; }
  int chroma_height() const noexcept { return subsampled() ? (height + 1) / 2 : height; }
  std::size_t frame_bytes() const noexcept {
    return static_cast<std::size_t>(width) * height + 2 * static_cast<std::size_t>(chroma_width()) * chroma_height();
  }
};

/// Parses a stream-header line (without the trailing newline).
inline Y4mHeader parse_y4m_header(const std::string& line) {
  std::istringstream tokens(line);
  std::string magic;
  tokens >> magic;
  if (magic != "YUV4MPEG2") throw FormatError("not a YUV4MPEG2 stream (bad magic)");
  Y4mHeader hdr;
  std::string tok;
  while (tokens >> tok) {
    const char tag = tok[0];
    const std::string value = tok.substr(1);
    try {
      switch (tag) {
        case 'W': hdr.width = std::stoi(value); break;
        case 'H': hdr.height = std::stoi(value); break;
        case 'F': {
          const auto colon = value.find(':');
          if (colon == std::string::npos) throw FormatError("bad Y4M frame rate '" + value + "'");
          hdr.fps_num = std::stoi(value.substr(0, colon));
          hdr.fps_den = std::stoi(value.substr(colon + 1));
          break;
        }
        case 'I': hdr.interlace = value.empty() ? 'p' : value[0]; break;
        case 'C': hdr.colorspace = value; break;
        default: break;  // A (aspect), X (extensions) are irrelevant here
      }
    } catch (const std::logic_error&) {
      throw FormatError("bad Y4M header token '" + tok + "'");
    }
  }
  if (hdr.width <= 0 || hdr.height <= 0) throw FormatError("Y4M header lacks positive W/H");
  if (hdr.interlace != 'p' && hdr.interlace != '?') throw FormatError("interlaced Y4M is not supported");
  static const std::array<std::string, 5> supported{"420", "420jpeg", "420paldv", "420mpeg2", "444"};
  if (std::find(supported.begin(), supported.end(), hdr.colorspace) == supported.end())
    throw FormatError("unsupported Y4M colorspace C" + hdr.colorspace);
  return hdr;
}

/// BT.601 limited-range YCbCr planes (chroma possibly subsampled) to a YIQ frame.
inline Frame ycbcr_to_frame(const BytePlane& y, const BytePlane& cb, const BytePlane& cr, int index) {
  const int w = y.width(), h = y.height();
  const int sx = (cb.width() == w) ? 1 : 2;
  const int sy = (cb.height() == h) ? 1 : 2;
  RgbImage rgb{BytePlane(w, h), BytePlane(w, h), BytePlane(w, h)};
  for (int yy = 0; yy < h; ++yy) {
    for (int xx = 0; xx < w; ++xx) {
      const double luma = 1.164383 * (y(xx, yy) - 16.0);
      const double u = cb(xx / sx, yy / sy) - 128.0;
      const double v = cr(xx / sx, yy / sy) - 128.0;
      rgb.r(xx, yy) = detail::clamp_byte(luma + 1.596027 * v);
      rgb.g(xx, yy) = detail::clamp_byte(luma - 0.391762 * u - 0.812968 * v);
      rgb.b(xx, yy) = detail::clamp_byte(luma + 2.017232 * u);
    }
  }
  return rgb_to_yiq(rgb.r, rgb.g, rgb.b, index);
}

/// Writes an RGB sequence as a C444 progressive Y4M stream (BT.601 limited range).
inline void write_y4m(const fs::path& path, const std::vector<RgbImage>& frames, int fps = 25) {
  if (frames.empty()) throw DomainError("write_y4m: no frames");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot write file");
  const int w = frames.front().width(), h = frames.front().height();
  out << "YUV4MPEG2 W" << w << " H" << h << " F" << fps << ":1 Ip A1:1 C444\n";
  std::vector<std::uint8_t> planes(static_cast<std::size_t>(w) * h * 3);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) throw DomainError("write_y4m: frame dimensions differ");
    for (std::size_t k = 0; k < n; ++k) {
      const double r = f.r.data()[k], g = f.g.data()[k], b = f.b.data()[k];
      planes[k] = detail::clamp_byte(16.0 + 0.256788 * r + 0.504129 * g + 0.097906 * b);
      planes[n + k] = detail::clamp_byte(128.0 - 0.148223 * r - 0.290993 * g + 0.439216 * b);
      planes[2 * n + k] = detail::clamp_byte(128.0 + 0.439216 * r - 0.367788 * g - 0.071427 * b);
    }
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(planes.data()), static_cast<std::streamsize>(planes.size()));
  }
  if (!out) throw IoError(path.string(), "write failed");
}

// ---------------------------------------------------------------------------
// Frame sources

/// Sequential reader delivering frames in temporal order with indices 0,1,2,...
class FrameSource {
 public:
  FrameSource(const fs::path& path, SourceKind kind) : path_(path), kind_(kind) {
    if (!fs::exists(path)) throw IoError(path.string(), "no such file or directory");
    switch (kind) {
      case SourceKind::image:
        files_.push_back(path);
        break;
      case SourceKind::image_sequence: {
        if (!fs::is_directory(path)) throw IoError(path.string(), "not a directory");
        for (const auto& entry : fs::directory_iterator(path))
          if (entry.is_regular_file() && detail::is_image_file(entry.path())) files_.push_back(entry.path());
        std::sort(files_.begin(), files_.end(),
                  [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
        if (files_.empty()) throw FormatError("no frames found in " + path.string());
        break;
      }
      case SourceKind::y4m: {
        stream_ = std::make_unique<std::ifstream>(path, std::ios::binary);
        if (!*stream_) throw IoError(path.string(), "cannot open file");
        std::string line;
        if (!std::getline(*stream_, line)) throw FormatError("no frames found in " + path.string());
        header_ = parse_y4m_header(line);
        break;
      }
    }
  }

  SourceKind kind() const noexcept { return kind_; }
  const std::optional<Y4mHeader>& y4m_header() const noexcept { return header_; }

  /// Next frame, or nullopt at end of stream.
  std::optional<Frame> next() {
    if (kind_ == SourceKind::y4m) return next_y4m();
    if (cursor_ >= files_.size()) return std::nullopt;
    const auto& file = files_[cursor_];
    Frame f = read_image_frame(file, next_index_);
    if (next_index_ > 0 && (f.width() != width_ || f.height() != height_))
      throw FormatError("inconsistent frame dimensions in sequence at " + file.string());
    width_ = f.width();
    height_ = f.height();
    ++cursor_;
    ++next_index_;
    return f;
  }

 private:
  std::optional<Frame> next_y4m() {
    std::string line;
    if (!std::getline(*stream_, line)) return std::nullopt;
    if (line.rfind("FRAME", 0) != 0) throw FormatError("expected FRAME marker in " + path_.string());
    const Y4mHeader& hdr = *header_;
    BytePlane y(hdr.width, hdr.height), cb(hdr.chroma_width(), hdr.chroma_height()),
        cr(hdr.chroma_width(), hdr.chroma_height());
    for (BytePlane* plane : {&y, &cb, &cr}) {
      auto span = plane->data();
      stream_->read(reinterpret_cast<char*>(span.data()), static_cast<std::streamsize>(span.size()));
      if (static_cast<std::size_t>(stream_->gcount()) != span.size())
        throw FormatError("truncated Y4M frame " + std::to_string(next_index_) + " in " + path_.string());
    }
    return ycbcr_to_frame(y, cb, cr, next_index_++);
  }

  fs::path path_;
  SourceKind kind_;
  std::vector<fs::path> files_;
  std::size_t cursor_ = 0;
  int next_index_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::unique_ptr<std::ifstream> stream_;
  std::optional<Y4mHeader> header_;
};

/// Directory -> image_sequence, *.y4m -> y4m, anything else -> image.
inline SourceKind guess_source_kind(const fs::path& path) {
  if (fs::is_directory(path)) return SourceKind::image_sequence;
  if (detail::lower_extension(path) == ".y4m") return SourceKind::y4m;
  return SourceKind::image;
}

inline std::vector<Frame> read_frame_source(const fs::path& path, SourceKind kind) {
  FrameSource src(path, kind);
  std::vector<Frame> frames;
  while (auto f = src.next()) frames.push_back(std::move(*f));
  if (frames.empty()) throw FormatError("no frames found in " + path.string());
  return frames;
}

// ---------------------------------------------------------------------------
// Annotated output

/// Grey RGB rendering of the frame's luminance.
inline RgbImage luminance_rendering(const Frame& frame) {
  const BytePlane gray = to_bytes(frame.y);
  return RgbImage{gray, gray, gray};
}

inline constexpr int kOutlineThickness = 2;

/// Draws a red outline of kOutlineThickness pixels, inset from the box border.
inline void draw_outline(RgbImage& img, const Box& box) {
  for (int y = box.y; y < box.bottom(); ++y) {
    for (int x = box.x; x < box.right(); ++x) {
      const int inset = std::min({x - box.x, box.right() - 1 - x, y - box.y, box.bottom() - 1 - y});
      if (inset < kOutlineThickness) {
        img.r(x, y) = 255;
        img.g(x, y) = 0;
        img.b(x, y) = 0;
      }
    }
  }
}

inline nlohmann::json boxes_to_json(int frame_index, const std::vector<Box>& boxes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : boxes) arr.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
  return {{"frame", frame_index}, {"boxes", arr}};
}

inline fs::path sidecar_path(const fs::path& image_path) {
  fs::path p = image_path;
  p.replace_extension(".json");
  return p;
}

/// Writes `path` (PNG) with box outlines plus a JSON sidecar next to it.
/// Every box is validated before anything touches the filesystem.
inline void write_annotated(const Frame& frame, const std::vector<Box>& boxes, const fs::path& path) {
  for (const auto& b : boxes) {
    if (!b.within(frame.width(), frame.height()))
      throw DomainError("box (" + std::to_string(b.x) + "," + std::to_string(b.y) + "," + std::to_string(b.w) + "," +
                        std::to_string(b.h) + ") exceeds frame " + std::to_string(frame.width()) + "x" +
                        std::to_string(frame.height()));
  }
  RgbImage img = luminance_rendering(frame);
  for (const auto& b : boxes) draw_outline(img, b);
  write_png(path, img);
  const auto side = sidecar_path(path);
  std::ofstream out(side);
  if (!out) throw IoError(side.string(), "cannot write file");
  out << boxes_to_json(frame.index, boxes).dump() << '\n';
}

}  // namespace textloc
