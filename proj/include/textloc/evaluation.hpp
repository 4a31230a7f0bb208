#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textloc/error.hpp"
#include "textloc/image.hpp"

namespace textloc {

struct GroundTruth {
  std::string frame_id;
  std::vector<Box> boxes;
  /// ATB. Defaults to boxes.size() when not given explicitly.
  std::optional<long long> actual_text_blocks;

  long long atb() const { return actual_text_blocks.value_or(static_cast<long long>(boxes.size())); }
};

enum class BlockCategory { tdb, fdb };

struct BlockJudgment {
  Box detected;
  BlockCategory category = BlockCategory::fdb;
  /// Only ever true for TDB.
  bool missing_data = false;
  /// Index into GroundTruth::boxes, -1 when unmatched.
  int matched_truth = -1;
};

/// Block-level counts and rates. Rates are fractions in [0,1].
struct EvalReport {
  long long tdb = 0, fdb = 0, mdb = 0, atb = 0;
  double detection_rate = 0, false_positive_rate = 0, misdetection_rate = 0;
  double precision = 0, recall = 0, f_measure = 0;
};

/// A detection is a TDB when its overlap with a truth box covers >= overlap_min of either box.
/// Truth boxes are matched at most once, greedily by descending intersection area.
inline std::vector<BlockJudgment> judge_boxes(const std::vector<Box>& detected, const GroundTruth& truth,
                                              double overlap_min = 0.1) {
  if (!(overlap_min > 0.0 && overlap_min <= 1.0)) throw DomainError("judge_boxes: overlap_min must be in (0,1]");
  struct Pair {
    long long inter;
    int det, gt;
  };
  std::vector<Pair> pairs;
  for (int d = 0; d < static_cast<int>(detected.size()); ++d) {
    for (int g = 0; g < static_cast<int>(truth.boxes.size()); ++g) {
      const long long inter = intersection_area(detected[d], truth.boxes[g]);
      if (inter <= 0) continue;
      const bool enough = inter >= overlap_min * static_cast<double>(truth.boxes[g].area()) ||
                          inter >= overlap_min * static_cast<double>(detected[d].area());
      if (enough) pairs.push_back({inter, d, g});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.inter > b.inter; });

  std::vector<BlockJudgment> out;
  out.reserve(detected.size());
  for (const auto& d : detected) out.push_back({d, BlockCategory::fdb, false, -1});
  std::vector<bool> gt_used(truth.boxes.size(), false);
  for (const auto& p : pairs) {
    if (out[p.det].matched_truth >= 0 || gt_used[p.gt]) continue;
    gt_used[p.gt] = true;
    out[p.det].matched_truth = p.gt;
    out[p.det].category = BlockCategory::tdb;
    out[p.det].missing_data = p.inter < truth.boxes[p.gt].area();
  }
  return out;
}

namespace detail {

inline double ratio(long long num, long long den) { return den > 0 ? static_cast<double>(num) / den : 0.0; }

}  // namespace detail

/// Rates from raw counts. Recall is the detection rate; precision is TDB/(TDB+FDB).
inline EvalReport report_from_counts(long long tdb, long long fdb, long long mdb, long long atb) {
  if (tdb < 0 || fdb < 0 || mdb < 0 || atb < 0) throw DomainError("report counts must be non-negative");
  if (mdb > tdb) throw DomainError("MDB count cannot exceed TDB count");
  EvalReport r{tdb, fdb, mdb, atb};
  r.detection_rate = std::min(1.0, detail::ratio(tdb, atb));
  r.false_positive_rate = detail::ratio(fdb, tdb + fdb);
  r.misdetection_rate = detail::ratio(mdb, tdb);
  r.recall = r.detection_rate;
  r.precision = detail::ratio(tdb, tdb + fdb);
  const double pr = r.precision + r.recall;
  r.f_measure = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

inline EvalReport compute_report(const std::vector<BlockJudgment>& judgments, const GroundTruth& truth) {
  long long tdb = 0, fdb = 0, mdb = 0;
  for (const auto& j : judgments) {
    if (j.category == BlockCategory::tdb) {
      ++tdb;
      mdb += j.missing_data;
    } else {
      ++fdb;
    }
  }
  return report_from_counts(tdb, fdb, mdb, truth.atb());
}

/// Micro-average: sums counts, then recomputes rates.
inline EvalReport aggregate_reports(const std::vector<EvalReport>& reports) {
  long long tdb = 0, fdb = 0, mdb = 0, atb = 0;
  for (const auto& r : reports) {
    tdb += r.tdb;
    fdb += r.fdb;
    mdb += r.mdb;
    atb += r.atb;
  }
  return report_from_counts(tdb, fdb, mdb, atb);
}

/// Column names follow the published tables: percentages, plus raw counts.
inline nlohmann::json report_to_json(const EvalReport& r) {
  auto pct = [](double v) { return std::round(v * 10000.0) / 100.0; };
  return {{"TDB", r.tdb},
          {"FDB", r.fdb},
          {"MDB", r.mdb},
          {"ATB", r.atb},
          {"Recall", pct(r.recall)},
          {"Precision", pct(r.precision)},
          {"F measure", pct(r.f_measure)},
          {"MDR", pct(r.misdetection_rate)},
          {"Detection rate", pct(r.detection_rate)},
          {"False positive rate", pct(r.false_positive_rate)}};
}

inline std::string report_to_text(const EvalReport& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << "ATB " << r.atb << "  TDB " << r.tdb << "  FDB " << r.fdb << "  MDB " << r.mdb << '\n'
     << "Recall " << 100 * r.recall << "%  Precision " << 100 * r.precision << "%  F measure " << 100 * r.f_measure
     << "%  MDR " << 100 * r.misdetection_rate << "%\n"
     << "Detection rate " << 100 * r.detection_rate << "%  False positive rate " << 100 * r.false_positive_rate
     << "%  Misdetection rate " << 100 * r.misdetection_rate << "%\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Box files

namespace detail {

inline Box box_from_json(const nlohmann::json& j) {
  if (j.is_array()) {
    if (j.size() != 4) throw FormatError("box array must have 4 entries [x,y,w,h]");
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
  }
  if (j.is_object()) return {j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
  throw FormatError("box must be [x,y,w,h] or {x,y,w,h}");
}

inline std::string frame_id_from_json(const nlohmann::json& j) {
  return j.is_string() ? j.get<std::string>() : j.dump();
}

}  // namespace detail

/// One JSON object per line: {"frame": id, "boxes": [[x,y,w,h],...], "atb": n?}.
/// Boxes may also be {"x":..,"y":..,"w":..,"h":..} objects (the sidecar form).
inline std::vector<GroundTruth> parse_box_jsonl(std::istream& in, const std::string& source = "<stream>") {
  std::vector<GroundTruth> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GroundTruth gt;
      gt.frame_id = detail::frame_id_from_json(j.at("frame"));
      for (const auto& b : j.at("boxes")) gt.boxes.push_back(detail::box_from_json(b));
      if (j.contains("atb")) gt.actual_text_blocks = j.at("atb").get<long long>();
      out.push_back(std::move(gt));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<GroundTruth> load_box_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open file");
  return parse_box_jsonl(in, path);
}

inline std::string to_jsonl_line(const std::string& frame_id, const std::vector<Box>& boxes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : boxes) arr.push_back({b.x, b.y, b.w, b.h});
  nlohmann::json j;
  // numeric ids stay numeric so files round-trip
  const bool numeric = !frame_id.empty() && std::all_of(frame_id.begin(), frame_id.end(), ::isdigit);
  if (numeric)
    j["frame"] = std::stoll(frame_id);
  else
    j["frame"] = frame_id;
  j["boxes"] = arr;
  return j.dump();
}

/// ICDAR-2003 locations.xml: <image><imageName>..</imageName> ... <taggedRectangle x= y= width= height= .../>.
inline std::vector<GroundTruth> parse_icdar2003_xml(const std::string& xml) {
  std::vector<GroundTruth> out;
  static const std::regex image_re(R"(<image>([\s\S]*?)</image>)");
  static const std::regex name_re(R"(<imageName>\s*([^<]*?)\s*</imageName>)");
  static const std::regex rect_re(R"(<taggedRectangle\b([^>]*)>)");
  auto attr = [](const std::string& attrs, const std::string& key) {
    const std::regex re("\\b" + key + "\\s*=\\s*\"([^\"]*)\"");
    std::smatch m;
    if (!std::regex_search(attrs, m, re)) throw FormatError("taggedRectangle lacks attribute " + key);
    return static_cast<int>(std::lround(std::stod(m[1].str())));
  };
  for (auto it = std::sregex_iterator(xml.begin(), xml.end(), image_re); it != std::sregex_iterator(); ++it) {
    const std::string body = (*it)[1].str();
    GroundTruth gt;
    std::smatch name;
    if (!std::regex_search(body, name, name_re)) throw FormatError("ICDAR <image> without <imageName>");
    gt.frame_id = name[1].str();
    for (auto r = std::sregex_iterator(body.begin(), body.end(), rect_re); r != std::sregex_iterator(); ++r) {
      const std::string attrs = (*r)[1].str();
      gt.boxes.push_back({attr(attrs, "x"), attr(attrs, "y"), attr(attrs, "width"), attr(attrs, "height")});
    }
    out.push_back(std::move(gt));
  }
  return out;
}

/// Per-image rectangle list, one rectangle per line: "x1, y1, x2, y2[, "transcription"]" (inclusive corners).
inline GroundTruth parse_rect_list(const std::string& text, const std::string& frame_id) {
  GroundTruth gt;
  gt.frame_id = frame_id;
  std::istringstream in(text);
  std::string line;
  static const std::regex row_re(R"(^\s*(-?\d+)\s*[, ]\s*(-?\d+)\s*[, ]\s*(-?\d+)\s*[, ]\s*(-?\d+))");
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::smatch m;
    if (!std::regex_search(line, m, row_re)) throw FormatError("malformed rectangle line: " + line);
    const int x1 = std::stoi(m[1]), y1 = std::stoi(m[2]), x2 = std::stoi(m[3]), y2 = std::stoi(m[4]);
    gt.boxes.push_back({std::min(x1, x2), std::min(y1, y2), std::abs(x2 - x1) + 1, std::abs(y2 - y1) + 1});
  }
  return gt;
}

/// Pairs predictions with ground truth by frame id and micro-averages. Missing predictions count as empty.
inline EvalReport evaluate_sets(const std::vector<GroundTruth>& predicted, const std::vector<GroundTruth>& truth,
                                double overlap_min, std::vector<std::pair<std::string, EvalReport>>* per_frame = nullptr) {
  std::map<std::string, const GroundTruth*> pred_by_id;
  for (const auto& p : predicted) pred_by_id[p.frame_id] = &p;
  std::vector<EvalReport> reports;
  for (const auto& gt : truth) {
    static const std::vector<Box> none;
    const auto it = pred_by_id.find(gt.frame_id);
    const auto& dets = it == pred_by_id.end() ? none : it->second->boxes;
    reports.push_back(compute_report(judge_boxes(dets, gt, overlap_min), gt));
    if (per_frame) per_frame->emplace_back(gt.frame_id, reports.back());
  }
  return aggregate_reports(reports);
}

}  // namespace textloc
