// textloc: video/image text localisation, evaluation and synthetic corpus generation.
//
//   textloc run  --input <path> --mode video|image [--config file] --output-dir <dir> [module flags]
//   textloc eval --pred pred.jsonl --gt gt.jsonl [--overlap 0.1] [--report report.json]
//   textloc gen  --spec spec.json --out <dir>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "textloc/textloc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw textloc::IoError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunArgs {
  std::string config_file;
  textloc::Settings cli;
  bool dump_subbands = false;
  bool dump_mgd = false;
};

void add_run_options(CLI::App& run, RunArgs& args) {
  run.add_option("--config", args.config_file, "key = value config file (CLI flags take precedence)");
  struct Opt {
    const char* key;
    const char* help;
  };
  static const Opt opts[] = {
      {"input", "image file, frame directory or .y4m stream"},
      {"mode", "video | image"},
      {"output-dir", "directory for annotated keyframes, pred.jsonl, report.json"},
      {"kind", "auto | image | image_sequence | y4m"},
      {"cut-threshold", "shot cut threshold T1, or auto"},
      {"cut-k", "k in the auto threshold mean + k*stddev (default 3)"},
      {"moments", "colour moments per component H (default 3)"},
      {"weights", "Y,I,Q moment weights (default 0.6,0.2,0.2)"},
      {"distance-q", "exponent q of the frame distance (default 2)"},
      {"dump-distances", "write the inter-frame distance series to this CSV"},
      {"tmof-bins", "luminance bins B of the maximum-occurrence frame (default 32)"},
      {"keyframe-mode", "peaks | middle"},
      {"wavelet", "haar | db2"},
      {"levels", "DWT levels L (default 2)"},
      {"mgd-window", "MGD window N, odd (default 21)"},
      {"dilate-se", "dilation element WxH, odd (default 7x3)"},
      {"rule-thresholds", "T1,T2 for the aspect-ratio/density rule, or auto"},
      {"min-height", "rule constant (default 6)"},
      {"max-height", "rule constant (default 50)"},
      {"min-width", "rule constant (default 5)"},
      {"min-area", "rule constant (default 24)"},
      {"min-separability", "Otsu separability below which a map counts as textless (default 0.8, 0 disables)"},
      {"gt", "ground-truth JSONL; adds an evaluation block to the report"},
      {"overlap", "minimum overlap for a true detection (default 0.1)"},
  };
  for (const auto& o : opts) run.add_option(std::string("--") + o.key, args.cli[o.key], o.help);
  run.add_flag("--dump-subbands", args.dump_subbands, "write the DWT subband mosaic of every keyframe");
  run.add_flag("--dump-mgd", args.dump_mgd, "write the rescaled MGD map of every keyframe");
}

textloc::PipelineConfig merge_config(const CLI::App& run, const RunArgs& args) {
  textloc::Settings settings;
  std::string text;
  if (!args.config_file.empty()) {
    text = slurp(args.config_file);
    settings = textloc::parse_config_text(text);
  }
  for (const auto& [key, value] : args.cli)
    if (run.count("--" + key) > 0) settings[key] = value;
  if (args.dump_subbands) settings["dump-subbands"] = "true";
  if (args.dump_mgd) settings["dump-mgd"] = "true";
  return textloc::config_from_settings(settings, text);
}

int do_run(const CLI::App& run, const RunArgs& args) {
  const auto config = merge_config(run, args);
  const auto report = textloc::run_pipeline(config);
  std::size_t boxes = 0;
  for (const auto& k : report.keyframes) boxes += k.boxes.size();
  std::cout << report.frames << " frame(s), " << report.shots.size() << " shot(s), " << report.keyframes.size()
            << " keyframe(s), " << boxes << " text box(es)\n";
  if (report.evaluation) std::cout << textloc::report_to_text(*report.evaluation);
  std::cout << "report: " << (textloc::fs::path(config.output_dir) / "report.json").string() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string pred, gt, report, gt_format = "jsonl";
  double overlap = 0.1;
};

int do_eval(const EvalArgs& a) {
  if (!(a.overlap > 0 && a.overlap <= 1)) throw textloc::ConfigError("--overlap must be in (0,1]");
  const auto predicted = textloc::load_box_jsonl(a.pred);
  std::vector<textloc::GroundTruth> truth;
  if (a.gt_format == "jsonl") {
    truth = textloc::load_box_jsonl(a.gt);
  } else if (a.gt_format == "icdar-xml") {
    truth = textloc::parse_icdar2003_xml(slurp(a.gt));
  } else {
    throw textloc::ConfigError("--gt-format must be jsonl or icdar-xml");
  }
  std::vector<std::pair<std::string, textloc::EvalReport>> per_frame;
  const auto total = textloc::evaluate_sets(predicted, truth, a.overlap, &per_frame);
  std::cout << textloc::report_to_text(total);
  if (!a.report.empty()) {
    nlohmann::json j = textloc::report_to_json(total);
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& [id, r] : per_frame) {
      auto row = textloc::report_to_json(r);
      row["frame"] = id;
      frames.push_back(row);
    }
    j["overlap"] = a.overlap;
    j["per_frame"] = frames;
    std::ofstream out(a.report);
    if (!out) throw textloc::IoError(a.report, "cannot write file");
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

struct GenArgs {
  std::string spec, out, preset;
  std::uint64_t seed = 1;
  int frames = 50;
};

int do_gen(const GenArgs& a) {
  namespace corpus = textloc::corpus;
  corpus::CorpusSpec spec;
  if (!a.spec.empty()) {
    try {
      spec = corpus::spec_from_json(nlohmann::json::parse(slurp(a.spec)));
    } catch (const nlohmann::json::parse_error& e) {
      throw textloc::ConfigError(a.spec + ": " + e.what());
    }
  } else if (a.preset == "cuts") {
    spec = corpus::make_cut_video_spec(a.seed);
  } else if (a.preset == "text") {
    spec = corpus::make_text_frames_spec(a.seed, a.frames);
  } else {
    throw textloc::ConfigError("gen needs --spec or --preset cuts|text");
  }
  const auto c = corpus::generate(spec, a.out);
  std::ofstream(textloc::fs::path(a.out) / "spec.json") << corpus::spec_to_json(spec).dump(2) << '\n';
  std::cout << c.frames.size() << " frame(s), " << c.cuts.size() << " cut(s) written to " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text localisation in video frames and still images"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "localise text in a video or image");
  add_run_options(*run, run_args);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "block-level precision/recall against ground truth");
  eval->add_option("--pred", eval_args.pred, "predicted boxes (JSONL)")->required();
  eval->add_option("--gt", eval_args.gt, "ground truth")->required();
  eval->add_option("--gt-format", eval_args.gt_format, "jsonl | icdar-xml");
  eval->add_option("--overlap", eval_args.overlap, "minimum overlap for a true detection");
  eval->add_option("--report", eval_args.report, "write the JSON report here");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  gen->add_option("--spec", gen_args.spec, "corpus spec JSON");
  gen->add_option("--preset", gen_args.preset, "cuts | text (randomised spec)");
  gen->add_option("--seed", gen_args.seed, "seed for --preset");
  gen->add_option("--frames", gen_args.frames, "frame count for --preset text");
  gen->add_option("--out", gen_args.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return do_run(*run, run_args);
    if (*eval) return do_eval(eval_args);
    if (*gen) return do_gen(gen_args);
  } catch (const textloc::StageError& e) {
    std::cerr << "textloc: " << e.what() << '\n';
    switch (e.cause()) {
      case textloc::StageError::Cause::config: return kExitConfig;
      case textloc::StageError::Cause::io: return kExitIo;
      case textloc::StageError::Cause::other: return kExitFailure;
    }
  } catch (const textloc::ConfigError& e) {
    std::cerr << "textloc: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const textloc::IoError& e) {
    std::cerr << "textloc: " << e.what() << '\n';
    return kExitIo;
  } catch (const textloc::FormatError& e) {
    std::cerr << "textloc: " << e.what() << '\n';
    return kExitIo;
  } catch (const textloc::Error& e) {
    std::cerr << "textloc: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
