// iflow: instance-flow multi-object tracking from the command line.
//
//   iflow track  --masks DIR (--flow DIR | --images DIR | --zero-flow) -o result.txt
//   iflow eval   --gt gt.txt --result result.txt
//   iflow synth  (--spec scene.json | --preset kitti13) --seed N -o DIR
//   iflow flow   --images DIR -o DIR
//   iflow render --masks DIR --result result.txt [--images DIR] -o DIR
//
// Flow file NNNNNN.flo describes the motion from frame NNNNNN to the next frame.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "iflow/io.hpp"
#include "iflow/metrics.hpp"
#include "iflow/pipeline.hpp"
#include "iflow/synth.hpp"

namespace fs = std::filesystem;

namespace {

void add_block_options(CLI::App* cmd, iflow::BlockMatchParams& block) {
  cmd->add_option("--block", block.block, "Block side and sampling stride (odd)")->capture_default_str();
  cmd->add_option("--search", block.search, "Search range in pixels")->capture_default_str();
  cmd->add_option("--min-texture", block.min_texture, "Minimum block intensity variance")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance-flow multi-object tracker"};
  app.set_config("--config", "", "Key-value file holding any of the flags below");
  app.require_subcommand(1);

  // track
  iflow::TrackOptions track;
  std::string flow_dir, image_dir;
  bool quiet = false;
  auto* cmd_track = app.add_subcommand("track", "Track instances through a sequence of label maps");
  cmd_track->add_option("--masks", track.mask_dir, "Directory of NNNNNN.png/.pgm label maps")->required();
  auto* opt_flow = cmd_track->add_option("--flow", flow_dir, "Directory of NNNNNN.flo files");
  auto* opt_images = cmd_track->add_option("--images", image_dir, "Estimate flow from these images");
  auto* opt_zero = cmd_track->add_flag("--zero-flow", track.tracker.zero_flow, "Identity motion ablation");
  opt_flow->excludes(opt_images)->excludes(opt_zero);
  opt_images->excludes(opt_zero);
  cmd_track->add_option("-o,--output", track.output, "MOT result file")->required();
  cmd_track->add_option("--md", track.tracker.md, "Allowed consecutive missed detections")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd_track->add_option("--closing-radius", track.tracker.closing_radius, "Closing element radius")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd_track->add_option("--emit-coasted", track.tracker.emit_coasted, "Write coasted tracks (true/false)")
      ->capture_default_str();
  cmd_track->add_option("--min-area", track.tracker.min_mask_area, "Drop smaller detections")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd_track->add_flag("-q,--quiet", quiet, "No per-frame log");
  add_block_options(cmd_track, track.block);

  // eval
  std::string gt_path, result_path, format = "table";
  double iou = 0.5, fps = 30.0;
  auto* cmd_eval = app.add_subcommand("eval", "CLEAR-MOT evaluation of a result file");
  cmd_eval->add_option("--gt", gt_path, "Ground-truth MOT file")->required();
  cmd_eval->add_option("--result", result_path, "Result MOT file")->required();
  cmd_eval->add_option("--iou", iou, "IoU threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cmd_eval->add_option("--fps", fps, "Sequence frame rate")->capture_default_str();
  cmd_eval->add_option("--format", format, "table or kv")
      ->capture_default_str()->check(CLI::IsMember({"table", "kv"}));

  // synth
  std::string spec_path, preset, synth_out;
  std::uint64_t seed = 1;
  bool no_jolt = false;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  auto* opt_spec = cmd_synth->add_option("--spec", spec_path, "Scene spec JSON");
  auto* opt_preset = cmd_synth->add_option("--preset", preset, "Built-in scene")->check(CLI::IsMember({"kitti13"}));
  opt_spec->excludes(opt_preset);
  cmd_synth->add_flag("--no-jolt", no_jolt, "kitti13 preset without the vertical jolt");
  cmd_synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  cmd_synth->add_option("-o,--output", synth_out, "Output directory")->required();

  // flow
  std::string flow_images, flow_out;
  iflow::BlockMatchParams flow_block;
  auto* cmd_flow = app.add_subcommand("flow", "Block-matching flow for consecutive images");
  cmd_flow->add_option("--images", flow_images, "Directory of NNNNNN images")->required();
  cmd_flow->add_option("-o,--output", flow_out, "Output directory for .flo files")->required();
  add_block_options(cmd_flow, flow_block);

  // render
  std::string render_masks, render_result, render_images, render_out;
  auto* cmd_render = app.add_subcommand("render", "Color overlays of tracked instances");
  cmd_render->add_option("--masks", render_masks, "Label map directory")->required();
  cmd_render->add_option("--result", render_result, "MOT result file")->required();
  cmd_render->add_option("--images", render_images, "Optional background images");
  cmd_render->add_option("-o,--output", render_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_track->parsed()) {
      if (!flow_dir.empty()) track.flow_dir = flow_dir;
      if (!image_dir.empty()) track.image_dir = image_dir;
      std::ostringstream sink;
      iflow::run_track(track, quiet ? static_cast<std::ostream&>(sink) : std::cerr);
    } else if (cmd_eval->parsed()) {
      const auto gt = iflow::read_mot(gt_path);
      const auto hyp = iflow::read_mot(result_path);
      const auto report = iflow::evaluate(gt, hyp, iou, fps);
      std::cout << (format == "kv" ? iflow::format_report_kv(report) : iflow::format_report(report));
    } else if (cmd_synth->parsed()) {
      iflow::SceneSpec spec;
      if (!preset.empty()) {
        spec = iflow::kitti13_proxy(seed, !no_jolt);
      } else if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw iflow::IoError("cannot open " + spec_path);
        std::stringstream text;
        text << in.rdbuf();
        spec = iflow::scene_spec_from_json(text.str());
      } else {
        throw iflow::InvalidArgument("synth needs --spec or --preset");
      }
      iflow::write_scene(iflow::generate(spec, seed), synth_out);
    } else if (cmd_flow->parsed()) {
      iflow::run_flow(flow_images, flow_block, flow_out);
    } else if (cmd_render->parsed()) {
      std::optional<fs::path> images;
      if (!render_images.empty()) images = render_images;
      iflow::run_render(render_masks, render_result, images, render_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "iflow: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
