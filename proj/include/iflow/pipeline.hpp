#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>

#include "iflow/core.hpp"
#include "iflow/flowops.hpp"
#include "iflow/metrics.hpp"

namespace iflow {

/// Motion comes from exactly one of flow_dir, image_dir (block matching) or
/// tracker.zero_flow.
struct TrackOptions {
  std::filesystem::path mask_dir;
  std::optional<std::filesystem::path> flow_dir;
  std::optional<std::filesystem::path> image_dir;
  std::filesystem::path output;
  TrackerConfig tracker;
  BlockMatchParams block;
};

/// Numbered per-frame files (NNNNNN.ext) of a directory keyed by file frame
/// number. Throws IoError when the numbers are not consecutive.
std::map<int, std::filesystem::path> list_frames(const std::filesystem::path& dir);

/// Tracks a directory of label maps and writes the MOT result file. Flow file
/// k (or the image pair k, k+1) carries the motion from frame k to frame k+1.
/// Per-frame counts go to log.
void run_track(const TrackOptions& options, std::ostream& log);

/// Block-matching flow for every consecutive image pair, written as NNNNNN.flo.
void run_flow(const std::filesystem::path& image_dir, const BlockMatchParams& params,
              const std::filesystem::path& out_dir);

/// Color overlay per frame: detected instances that carry a result row are
/// filled with their track color, coasted rows are drawn as box outlines.
void run_render(const std::filesystem::path& mask_dir, const std::filesystem::path& result,
                const std::optional<std::filesystem::path>& image_dir,
                const std::filesystem::path& out_dir);

/// Deterministic display color for a track id.
std::array<std::uint8_t, 3> track_color(int id);

}  // namespace iflow
