// sagenet: command-line front end for SAGE ground truth, the composition
// pipeline, corpus evaluation, and heatmap export.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 degenerate input.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sage/sage.hpp"

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

sage::ThresholdPolicy parse_threshold(const std::string& s) {
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const double value = colon == std::string::npos ? (kind == "fixed" ? 0.5 : 2.0) : std::stod(s.substr(colon + 1));
  if (kind == "adaptive") return sage::ThresholdPolicy::adaptive(value);
  if (kind == "fixed") return sage::ThresholdPolicy::fixed(value);
  throw sage::ValidationError("threshold must be adaptive[:multiplier] or fixed[:value]");
}

struct PipelineFlags {
  double k = 2.0;
  double v_thresh = 15.0;
  std::string clamp = "renormalize_max";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--k", k, "Pedestrian amplification factor (> 1)")->capture_default_str();
    cmd->add_option("--v-thresh", v_thresh, "Ego-speed gate in km/h")->capture_default_str();
    cmd->add_option("--clamp", clamp, "renormalize_max | clip_at_one | none")->capture_default_str();
  }

  sage::PipelineConfig config() const {
    sage::PipelineConfig c{v_thresh, k, sage::parse_clamp_policy(clamp)};
    c.validate();
    return c;
  }
};

int cmd_synth_gen(const std::string& spec, std::uint64_t seed, const std::string& out, std::size_t workers) {
  const auto scenes = sage::load_scenes(spec);
  const auto manifest = sage::generate_corpus(scenes, sage::Seed{seed}, out, workers);
  std::cout << "wrote " << manifest.clips.size() << " clips to " << (fs::path(out) / "manifest.json").string() << '\n';
  return 0;
}

int cmd_sage_gen(const std::string& gaze_path, const std::string& instances_path, const std::string& out,
                 const std::string& keep, double min_score) {
  const auto gaze = sage::load_smap(gaze_path);
  const auto instances = sage::load_instances(instances_path);
  const auto classes = keep.empty() ? sage::CategoryFilter::driving_categories() : split_list(keep);
  const sage::CategoryFilter filter(classes, min_score);
  sage::save_smap(sage::build_sage_frame(gaze, instances, filter), out);
  return 0;
}

int cmd_pipeline_run(const std::string& clip_ref, const PipelineFlags& flags, const std::string& out) {
  const auto hash = clip_ref.rfind('#');
  if (hash == std::string::npos) throw sage::ValidationError("--clip must be <manifest>#<clip_id>");
  const auto manifest = sage::load_manifest(clip_ref.substr(0, hash));
  const auto clip = sage::open_clip(sage::find_clip(manifest, clip_ref.substr(hash + 1)));
  sage::PipelineTrace trace;
  const auto result = sage::run_sage_net(clip, sage::file_providers(manifest.dims), flags.config(), &trace);
  sage::save_smap(result, out);
  static constexpr const char* kBranch[] = {"speed gate", "not crossing", "pedestrians amplified"};
  std::cout << clip.clip_id() << ": " << kBranch[static_cast<int>(trace.branch)];
  if (trace.branch == sage::PipelineBranch::pedestrian_amplified) std::cout << " (" << trace.bbox_count << " boxes)";
  std::cout << '\n';
  return 0;
}

struct EvalFlags {
  std::string manifest;
  std::string regimes = "gaze_only,sage";
  std::string pipelines = "raw,sage_net";
  std::string scenario;
  std::string report;
  std::string format = "csv";
  std::string threshold = "adaptive:2";
  std::size_t workers = 1;
  PipelineFlags pipeline;
};

int cmd_eval(const EvalFlags& f) {
  sage::EvalOptions opt;
  opt.regimes.clear();
  opt.pipelines.clear();
  for (const auto& r : split_list(f.regimes)) opt.regimes.push_back(sage::parse_regime(r));
  for (const auto& p : split_list(f.pipelines)) opt.pipelines.push_back(sage::parse_pipeline(p));
  opt.workers = f.workers;
  const auto format = sage::parse_report_format(f.format);

  auto manifest = sage::load_manifest(f.manifest, sage::ManifestCheck::lenient);
  if (!f.scenario.empty()) manifest = sage::filter_scenario(manifest, f.scenario);
  if (manifest.clips.empty()) throw sage::DegenerateInputError("no clips to evaluate");
  const auto result = sage::evaluate_corpus(manifest, f.pipeline.config(), parse_threshold(f.threshold), opt);
  if (result.rows.empty()) throw sage::DegenerateInputError("no clip could be scored");
  const auto table = sage::aggregate(result.rows);
  if (f.report.empty())
    std::cout << sage::render_report(table, format);
  else
    sage::emit_report(table, format, f.report);
  if (!result.failures.empty())
    std::cerr << result.failures.size() << " of " << manifest.clips.size() << " clips skipped\n";
  return 0;
}

int cmd_viz(const std::string& map, const std::string& out) {
  sage::export_heatmap_png(sage::load_smap(map), out);
  return 0;
}

int cmd_validate(const std::vector<std::string>& paths) {
  for (const auto& p : paths) {
    const auto info = sage::validate_grid_file(p);
    std::cout << p << ": " << (info.kind == sage::GridFileKind::smap ? "SMAP " : "BMSK ") << sage::to_string(info.dims)
              << " ok\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAGE saliency fusion and evaluation toolkit"};
  app.set_config("--config", "", "INI/TOML file supplying any flag; command-line flags take precedence");
  app.require_subcommand(1);

  std::string spec, out;
  std::uint64_t seed = 0;
  std::size_t gen_workers = 1;
  auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic corpus from a scene file");
  synth->add_option("--spec", spec, "Scene file")->required();
  synth->add_option("--seed", seed, "64-bit seed")->required();
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--workers", gen_workers, "Rendering threads")->capture_default_str();

  std::string gaze, instances, sage_out, keep;
  double min_score = sage::CategoryFilter::kDefaultMinScore;
  auto* sage_gen = app.add_subcommand("sage-gen", "Build a SAGE ground-truth map for one frame");
  sage_gen->add_option("--gaze", gaze, "Gaze map (SMAP)")->required();
  sage_gen->add_option("--instances", instances, "Instance list (JSON)")->required();
  sage_gen->add_option("--out", sage_out, "Output SMAP")->required();
  sage_gen->add_option("--keep", keep, "Comma-separated kept classes (default: the driving categories)");
  sage_gen->add_option("--min-score", min_score, "Detector confidence cut-off")->capture_default_str();

  std::string clip_ref, pipe_out;
  PipelineFlags pipe_flags;
  auto* pipe = app.add_subcommand("pipeline-run", "Run the composition pipeline on one clip");
  pipe->add_option("--clip", clip_ref, "<manifest>#<clip_id>")->required();
  pipe->add_option("--out", pipe_out, "Output SMAP")->required();
  pipe_flags.add_to(pipe);

  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Evaluate a corpus and write a mean/std report");
  eval->add_option("--manifest", eval_flags.manifest, "Corpus manifest")->required();
  eval->add_option("--regimes", eval_flags.regimes, "gaze_only,sage")->capture_default_str();
  eval->add_option("--pipelines", eval_flags.pipelines, "raw,sage_net")->capture_default_str();
  eval->add_option("--scenario", eval_flags.scenario, "Only clips carrying this tag");
  eval->add_option("--report", eval_flags.report, "Report path (stdout when omitted)");
  eval->add_option("--format", eval_flags.format, "csv | markdown")->capture_default_str();
  eval->add_option("--threshold", eval_flags.threshold, "adaptive[:mult] | fixed[:value]")->capture_default_str();
  eval->add_option("--workers", eval_flags.workers, "Clip evaluation threads")->capture_default_str();
  eval_flags.pipeline.add_to(eval);

  std::string viz_map, viz_out;
  auto* viz = app.add_subcommand("viz", "Export a map as an 8-bit greyscale PNG");
  viz->add_option("--map", viz_map, "Input SMAP")->required();
  viz->add_option("--out", viz_out, "Output PNG")->required();

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "Check SMAP/BMSK files against the format");
  validate->add_option("files", validate_paths, "Files to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(sage::ErrorKind::validation);
  }

  try {
    if (*synth) return cmd_synth_gen(spec, seed, out, gen_workers);
    if (*sage_gen) return cmd_sage_gen(gaze, instances, sage_out, keep, min_score);
    if (*pipe) return cmd_pipeline_run(clip_ref, pipe_flags, pipe_out);
    if (*eval) return cmd_eval(eval_flags);
    if (*viz) return cmd_viz(viz_map, viz_out);
    if (*validate) return cmd_validate(validate_paths);
  } catch (const sage::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(sage::ErrorKind::validation);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(sage::ErrorKind::io);
  }
  return 0;
}
