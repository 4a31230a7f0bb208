#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "textloc/error.hpp"
#include "textloc/evaluation.hpp"
#include "textloc/image.hpp"
#include "textloc/keyframe.hpp"
#include "textloc/media_io.hpp"
#include "textloc/region_filter.hpp"
#include "textloc/saliency.hpp"
#include "textloc/shot_detector.hpp"
#include "textloc/wavelet.hpp"

namespace textloc {

/// Smallest frame the pipeline accepts (L=2 DWT plus the 3x3 Laplacian).
inline constexpr int kMinProcessableSize = 16;

enum class RunMode { video, image };

/// Flat key -> value settings; keys are the long CLI flag names without dashes.
using Settings = std::map<std::string, std::string>;

inline const std::set<std::string>& known_setting_keys() {
  static const std::set<std::string> keys{
      "input",      "mode",          "output-dir",     "kind",          "cut-threshold", "cut-k",
      "moments",    "weights",       "distance-q",     "dump-distances", "tmof-bins",    "keyframe-mode",
      "wavelet",    "levels",        "dump-subbands",  "mgd-window",    "dump-mgd",      "dilate-se",
      "rule-thresholds", "min-height", "max-height",   "min-width",     "min-area",      "min-separability", "overlap",
      "gt"};
  return keys;
}

/// Parses `key = value` lines. '#' starts a comment. Unknown keys are a ConfigError.
inline Settings parse_config_text(const std::string& text) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!known_setting_keys().count(key)) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

struct PipelineConfig {
  std::string input;
  RunMode mode = RunMode::video;
  std::string output_dir = "textloc-out";
  std::optional<SourceKind> kind;  // nullopt = guess from the path

  MomentParams moments;
  int distance_q = 2;
  CutThreshold cut_threshold = CutThreshold::auto_sigma(3.0);
  std::string dump_distances;

  int tmof_bins = 32;
  KeyframeMode keyframe_mode = KeyframeMode::peaks;

  std::string wavelet = "haar";
  int levels = 2;
  bool dump_subbands = false;

  int mgd_window = 21;
  bool dump_mgd = false;

  LocalizeParams localize;

  double overlap = 0.1;
  std::string gt;

  /// Settings the config was built from, echoed into the report.
  Settings settings;
  std::string config_text;
};

namespace detail {

inline int parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(v, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace detail

/// Validates every value against the ranges the modules accept.
inline PipelineConfig config_from_settings(const Settings& s, std::string config_text = {}) {
  using namespace detail;
  PipelineConfig c;
  for (const auto& [k, v] : s)
    require(known_setting_keys().count(k) > 0, "unknown setting '" + k + "'");
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = s.find(k);
    return it == s.end() ? std::nullopt : std::optional<std::string>(it->second);
  };

  if (auto v = get("input")) c.input = *v;
  if (auto v = get("mode")) {
    require(*v == "video" || *v == "image", "mode: expected video|image, got '" + *v + "'");
    c.mode = *v == "video" ? RunMode::video : RunMode::image;
  }
  if (auto v = get("output-dir")) c.output_dir = *v;
  if (auto v = get("kind")) {
    if (*v == "image") c.kind = SourceKind::image;
    else if (*v == "image_sequence" || *v == "sequence") c.kind = SourceKind::image_sequence;
    else if (*v == "y4m") c.kind = SourceKind::y4m;
    else require(*v == "auto", "kind: expected auto|image|image_sequence|y4m, got '" + *v + "'");
  }

  if (auto v = get("moments")) {
    c.moments.moments = parse_int("moments", *v);
    require(c.moments.moments >= 1, "moments: H must be >= 1");
  }
  if (auto v = get("weights")) {
    const auto parts = split(*v, ',');
    require(parts.size() == 3, "weights: expected a,b,c");
    for (int k = 0; k < 3; ++k) {
      c.moments.weights[k] = parse_real("weights", parts[k]);
      require(c.moments.weights[k] > 0, "weights: must be positive");
    }
  }
  if (auto v = get("distance-q")) {
    c.distance_q = parse_int("distance-q", *v);
    require(c.distance_q >= 1, "distance-q: must be >= 1");
  }
  double cut_k = 3.0;
  if (auto v = get("cut-k")) {
    cut_k = parse_real("cut-k", *v);
    require(cut_k >= 0, "cut-k: must be >= 0");
  }
  c.cut_threshold = CutThreshold::auto_sigma(cut_k);
  if (auto v = get("cut-threshold"); v && *v != "auto") {
    const double t = parse_real("cut-threshold", *v);
    require(t > 0, "cut-threshold: must be > 0 or auto");
    c.cut_threshold = CutThreshold::fixed(t);
  }
  if (auto v = get("dump-distances")) c.dump_distances = *v;

  if (auto v = get("tmof-bins")) {
    c.tmof_bins = parse_int("tmof-bins", *v);
    require(c.tmof_bins >= 1 && c.tmof_bins <= 256 && 256 % c.tmof_bins == 0, "tmof-bins: must divide 256");
  }
  if (auto v = get("keyframe-mode")) {
    require(*v == "peaks" || *v == "middle", "keyframe-mode: expected peaks|middle");
    c.keyframe_mode = *v == "peaks" ? KeyframeMode::peaks : KeyframeMode::middle;
  }

  if (auto v = get("wavelet")) {
    require(*v == "haar" || *v == "db2", "wavelet: expected haar|db2");
    c.wavelet = *v;
  }
  if (auto v = get("levels")) {
    c.levels = parse_int("levels", *v);
    require(c.levels >= 1 && c.levels <= 8, "levels: must be in [1,8]");
  }
  if (auto v = get("dump-subbands")) c.dump_subbands = parse_bool("dump-subbands", *v);

  if (auto v = get("mgd-window")) {
    c.mgd_window = parse_int("mgd-window", *v);
    require(c.mgd_window >= 3 && c.mgd_window % 2 == 1, "mgd-window: N must be odd and >= 3");
  }
  if (auto v = get("dump-mgd")) c.dump_mgd = parse_bool("dump-mgd", *v);

  if (auto v = get("dilate-se")) {
    const auto x = v->find_first_of("xX");
    require(x != std::string::npos, "dilate-se: expected WxH");
    c.localize.dilate_w = parse_int("dilate-se", v->substr(0, x));
    c.localize.dilate_h = parse_int("dilate-se", v->substr(x + 1));
    require(c.localize.dilate_w >= 1 && c.localize.dilate_h >= 1 && c.localize.dilate_w % 2 == 1 &&
                c.localize.dilate_h % 2 == 1,
            "dilate-se: both dimensions must be odd and positive");
  }
  if (auto v = get("rule-thresholds"); v && *v != "auto") {
    const auto parts = split(*v, ',');
    require(parts.size() == 2, "rule-thresholds: expected T1,T2 or auto");
    c.localize.thresholds = RuleThresholds{parse_real("rule-thresholds", parts[0]), parse_real("rule-thresholds", parts[1])};
  }
  auto& rc = c.localize.constants;
  if (auto v = get("min-height")) rc.min_height = parse_int("min-height", *v);
  if (auto v = get("max-height")) rc.max_height = parse_int("max-height", *v);
  if (auto v = get("min-width")) rc.min_width = parse_int("min-width", *v);
  if (auto v = get("min-area")) rc.min_area = parse_int("min-area", *v);
  require(rc.min_height >= 0 && rc.max_height >= rc.min_height && rc.min_width >= 0 && rc.min_area >= 0,
          "rule constants: need 0 <= min-height <= max-height and non-negative min-width/min-area");

  if (auto v = get("min-separability")) {
    c.localize.min_separability = parse_real("min-separability", *v);
    require(c.localize.min_separability >= 0 && c.localize.min_separability <= 1, "min-separability: must be in [0,1]");
  }

  if (auto v = get("overlap")) {
    c.overlap = parse_real("overlap", *v);
    require(c.overlap > 0 && c.overlap <= 1, "overlap: must be in (0,1]");
  }
  if (auto v = get("gt")) c.gt = *v;

  c.settings = s;
  c.config_text = std::move(config_text);
  return c;
}

// ---------------------------------------------------------------------------
// Per-frame detection

struct DetectorParams {
  std::string wavelet = "haar";
  int levels = 2;
  int mgd_window = 21;
  LocalizeParams localize;

  static DetectorParams from(const PipelineConfig& c) { return {c.wavelet, c.levels, c.mgd_window, c.localize}; }
};

struct Detection {
  std::vector<TextBox> boxes;
  SubbandPyramid pyramid;
  GrayImage fused;
  SaliencyMap saliency;
};

inline void check_processable(int width, int height) {
  if (width < kMinProcessableSize || height < kMinProcessableSize)
    throw DomainError("image " + std::to_string(width) + "x" + std::to_string(height) +
                      " is below the minimum processable size " + std::to_string(kMinProcessableSize) + "x" +
                      std::to_string(kMinProcessableSize));
}

/// DWT fusion -> Laplacian -> MGD -> rule filtering on a luminance plane.
inline Detection detect_text_traced(const GrayImage& luma, const DetectorParams& p = {}) {
  check_processable(luma.width(), luma.height());
  Detection d;
  d.pyramid = dwt2_multilevel(luma, p.levels, WaveletKernel::by_name(p.wavelet, Extension::symmetric));
  d.fused = fuse_details(d.pyramid);
  const GrayImage lap = laplacian(d.fused);
  // the window cannot exceed the row; keep it odd
  const int widest = luma.width() % 2 == 1 ? luma.width() : luma.width() - 1;
  d.saliency = mgd_map(lap, std::min(p.mgd_window, widest));
  d.boxes = localize(d.saliency, p.localize);
  return d;
}

inline std::vector<TextBox> detect_text(const GrayImage& luma, const DetectorParams& p = {}) {
  return detect_text_traced(luma, p).boxes;
}

// ---------------------------------------------------------------------------
// Run report

struct KeyframeResult {
  int frame = 0;
  int shot = 0;
  std::vector<TextBox> boxes;
};

struct StageFailureInfo {
  std::string stage;
  std::string message;
};

struct RunReport {
  RunMode mode = RunMode::video;
  std::string input;
  int frames = 0;
  int width = 0;
  int height = 0;
  double cut_threshold = 0.0;
  std::vector<double> distances;
  std::vector<ShotBoundary> boundaries;
  std::vector<Shot> shots;
  std::vector<KeyframeSet> keyframe_sets;
  std::vector<KeyframeResult> keyframes;
  std::vector<std::pair<std::string, double>> timing_ms;
  std::optional<EvalReport> evaluation;
  std::optional<StageFailureInfo> failure;
  Settings settings;
  std::string config_text;
};

inline std::vector<Box> plain_boxes(const std::vector<TextBox>& boxes) {
  std::vector<Box> out;
  for (const auto& b : boxes) out.push_back(b.box);
  return out;
}

inline nlohmann::json text_box_json(const TextBox& t) {
  return {{"x", t.box.x},
          {"y", t.box.y},
          {"w", t.box.w},
          {"h", t.box.h},
          {"edge_area", t.edge_area},
          {"aspect_ratio", t.aspect_ratio},
          {"density", t.density},
          {"verdict", to_string(t.verdict)}};
}

inline nlohmann::json report_to_json(const RunReport& r, bool include_timing = true) {
  using nlohmann::json;
  json j;
  j["mode"] = r.mode == RunMode::video ? "video" : "image";
  j["input"] = r.input;
  j["frames"] = r.frames;
  j["width"] = r.width;
  j["height"] = r.height;
  j["cut_threshold"] = r.cut_threshold;
  json cuts = json::array();
  for (const auto& b : r.boundaries) cuts.push_back({{"cut_after", b.cut_after}, {"distance", b.distance}});
  j["boundaries"] = cuts;
  json shots = json::array();
  for (std::size_t s = 0; s < r.shots.size(); ++s) {
    json kf = json::array();
    if (s < r.keyframe_sets.size()) kf = r.keyframe_sets[s].keyframe_indices;
    shots.push_back({{"start", r.shots[s].start}, {"end", r.shots[s].end}, {"keyframes", kf}});
  }
  j["shots"] = shots;
  json kfs = json::array();
  for (const auto& k : r.keyframes) {
    json boxes = json::array();
    for (const auto& b : k.boxes) boxes.push_back(text_box_json(b));
    kfs.push_back({{"frame", k.frame}, {"shot", k.shot}, {"boxes", boxes}});
  }
  j["keyframes"] = kfs;
  if (r.evaluation) j["evaluation"] = report_to_json(*r.evaluation);
  j["partial"] = r.failure.has_value();
  if (r.failure) j["error"] = {{"stage", r.failure->stage}, {"message", r.failure->message}};
  j["config"] = r.settings;
  j["config_text"] = r.config_text;
  if (include_timing) {
    json t = json::object();
    for (const auto& [stage, ms] : r.timing_ms) t[stage] = ms;
    j["timing_ms"] = t;
  }
  return j;
}

/// Raised after a stage fails; the original category decides the process exit code.
class StageError : public Error {
 public:
  enum class Cause { config, io, other };
  StageError(std::string stage, const std::string& message, Cause cause)
      : Error("stage " + stage + ": " + message), stage_(std::move(stage)), cause_(cause) {}
  const std::string& stage() const noexcept { return stage_; }
  Cause cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  Cause cause_;
};

// ---------------------------------------------------------------------------
// Orchestration

namespace detail {

class StageRunner {
 public:
  explicit StageRunner(RunReport& report) : report_(report) {}

  template <typename F>
  auto operator()(const std::string& stage, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
        body();
        record(stage, t0);
      } else {
        auto result = body();
        record(stage, t0);
        return result;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      fail(stage, e);
    }
    if constexpr (!std::is_void_v<std::invoke_result_t<F>>) return std::invoke_result_t<F>{};
  }

  std::function<void()> on_failure;

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    const auto dt = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    report_.timing_ms.emplace_back(stage, dt);
  }

  [[noreturn]] void fail(const std::string& stage, const Error& e) {
    report_.failure = StageFailureInfo{stage, e.what()};
    if (on_failure) {
      try {
        on_failure();
      } catch (const Error&) {
        // the original failure is the one worth reporting
      }
    }
    StageError::Cause cause = StageError::Cause::other;
    if (dynamic_cast<const ConfigError*>(&e)) cause = StageError::Cause::config;
    else if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) cause = StageError::Cause::io;
    throw StageError(stage, e.what(), cause);
  }

  RunReport& report_;
};

inline std::string indexed_name(const std::string& stem, int index, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d%s", stem.c_str(), index, ext.c_str());
  return buf;
}

}  // namespace detail

/// Shots, keyframes and boxes for decoded frames, without touching the filesystem.
/// In image mode the shot and keyframe stages are skipped and frame 0 is the only keyframe.
inline RunReport analyze_frames(const std::vector<Frame>& frames, const PipelineConfig& config,
                                std::vector<Detection>* detections = nullptr) {
  RunReport report;
  report.mode = config.mode;
  report.input = config.input;
  report.settings = config.settings;
  report.config_text = config.config_text;
  detail::StageRunner stage(report);

  if (frames.empty()) throw StageError("decode", "no frames found", StageError::Cause::io);
  report.frames = static_cast<int>(frames.size());
  report.width = frames.front().width();
  report.height = frames.front().height();
  stage("validate", [&] { check_processable(report.width, report.height); });

  if (config.mode == RunMode::image) {
    report.shots = {Shot{0, 0}};
    report.keyframe_sets = {KeyframeSet{Shot{0, 0}, {0}, {0.0}}};
  } else {
    const auto features = stage("shot_detection.features", [&] {
      std::vector<MomentFeature> f;
      f.reserve(frames.size());
      for (const auto& fr : frames) f.push_back(feature_vector(fr, config.moments));
      return f;
    });
    stage("shot_detection.cuts", [&] {
      report.distances = distance_series(features, config.distance_q);
      report.boundaries = detect_cuts(features, config.distance_q, config.cut_threshold, &report.cut_threshold);
      report.shots = cuts_to_shots(report.boundaries, report.frames);
    });
    report.keyframe_sets = stage("keyframes", [&] {
      std::vector<std::future<KeyframeSet>> pending;
      for (const auto& shot : report.shots) {
        pending.push_back(std::async(std::launch::async, [&frames, &config, shot] {
          const std::span<const Frame> span(frames.data() + shot.start, static_cast<std::size_t>(shot.length()));
          return extract_keyframes(span, shot, config.tmof_bins, config.keyframe_mode);
        }));
      }
      std::vector<KeyframeSet> sets;
      for (auto& p : pending) sets.push_back(p.get());
      return sets;
    });
  }

  stage("localization", [&] {
    const DetectorParams params = DetectorParams::from(config);
    std::vector<std::pair<int, int>> jobs;  // (frame, shot)
    for (std::size_t s = 0; s < report.keyframe_sets.size(); ++s)
      for (int k : report.keyframe_sets[s].keyframe_indices) jobs.emplace_back(k, static_cast<int>(s));
    std::vector<std::future<Detection>> pending;
    for (const auto& [frame, shot] : jobs)
      pending.push_back(std::async(std::launch::async, [&frames, &params, f = frame] {
        return detect_text_traced(frames[f].y, params);
      }));
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      Detection d = pending[k].get();
      report.keyframes.push_back({jobs[k].first, jobs[k].second, d.boxes});
      if (detections) detections->push_back(std::move(d));
    }
  });
  return report;
}

inline void write_report(const RunReport& report, const fs::path& output_dir) {
  std::ofstream out(output_dir / "report.json");
  if (!out) throw IoError((output_dir / "report.json").string(), "cannot write file");
  out << report_to_json(report).dump(2) << '\n';
}

/// Full run: decode -> analyze -> annotated keyframes, pred.jsonl, report.json under config.output_dir.
inline RunReport run_pipeline(const PipelineConfig& config) {
  RunReport shell;
  shell.mode = config.mode;
  shell.input = config.input;
  shell.settings = config.settings;
  shell.config_text = config.config_text;
  const fs::path out_dir = config.output_dir;
  detail::StageRunner stage(shell);
  stage("output", [&] {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError(out_dir.string(), "cannot create output directory");
  });
  stage.on_failure = [&] { write_report(shell, out_dir); };

  const auto frames = stage("decode", [&] {
    if (config.input.empty()) throw ConfigError("no input given");
    const SourceKind kind = config.kind.value_or(
        config.mode == RunMode::image ? SourceKind::image : guess_source_kind(config.input));
    if (config.mode == RunMode::image && kind != SourceKind::image)
      throw ConfigError("image mode needs a single image file");
    return read_frame_source(config.input, kind);
  });

  std::vector<Detection> detections;
  RunReport report;
  try {
    report = analyze_frames(frames, config, &detections);
  } catch (const StageError& e) {
    shell.failure = StageFailureInfo{e.stage(), e.what()};
    try {
      write_report(shell, out_dir);
    } catch (const Error&) {
    }
    throw;
  }
  report.timing_ms.insert(report.timing_ms.begin(), shell.timing_ms.begin(), shell.timing_ms.end());

  detail::StageRunner out_stage(report);
  out_stage.on_failure = [&] { write_report(report, out_dir); };
  out_stage("write_outputs", [&] {
    std::ofstream pred(out_dir / "pred.jsonl");
    if (!pred) throw IoError((out_dir / "pred.jsonl").string(), "cannot write file");
    for (std::size_t k = 0; k < report.keyframes.size(); ++k) {
      const auto& kf = report.keyframes[k];
      const auto boxes = plain_boxes(kf.boxes);
      write_annotated(frames[kf.frame], boxes, out_dir / detail::indexed_name("keyframe", kf.frame, ".png"));
      pred << to_jsonl_line(std::to_string(kf.frame), boxes) << '\n';
      if (config.dump_subbands)
        write_png(out_dir / detail::indexed_name("subbands", kf.frame, ".png"), subband_mosaic(detections[k].pyramid));
      if (config.dump_mgd)
        write_png(out_dir / detail::indexed_name("mgd", kf.frame, ".png"), rescale_to_byte_range(detections[k].saliency.mgd));
    }
    if (!config.dump_distances.empty()) {
      std::ofstream csv(config.dump_distances);
      if (!csv) throw IoError(config.dump_distances, "cannot write file");
      csv << "frame_index,distance\n";
      csv.precision(17);
      for (std::size_t j = 0; j < report.distances.size(); ++j) csv << (j + 1) << ',' << report.distances[j] << '\n';
    }
  });

  if (!config.gt.empty()) {
    out_stage("evaluation", [&] {
      const auto truth = load_box_jsonl(config.gt);
      std::set<std::string> keyframe_ids;
      std::vector<GroundTruth> predicted;
      for (const auto& kf : report.keyframes) {
        keyframe_ids.insert(std::to_string(kf.frame));
        predicted.push_back({std::to_string(kf.frame), plain_boxes(kf.boxes), std::nullopt});
      }
      std::vector<GroundTruth> judged;
      for (const auto& t : truth)
        if (keyframe_ids.count(t.frame_id)) judged.push_back(t);
      report.evaluation = evaluate_sets(predicted, judged, config.overlap);
    });
  }
  out_stage("report", [&] { write_report(report, out_dir); });
  return report;
}

inline RunReport run_video(PipelineConfig config) {
  config.mode = RunMode::video;
  return run_pipeline(config);
}

inline RunReport run_image(PipelineConfig config) {
  config.mode = RunMode::image;
  return run_pipeline(config);
}

}  // namespace textloc
