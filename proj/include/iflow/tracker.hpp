#pragma once

#include <optional>
#include <span>
#include <vector>

#include "iflow/core.hpp"

namespace iflow {

/// Detections of the current frame plus the flow from the previous frame to it.
/// flow may be left empty when the tracker runs with zero_flow.
struct FrameInput {
  int frame = 0;
  std::vector<InstanceMask> detections;
  std::optional<FlowField> flow;
};

struct TrackRecord {
  int track_id = 0;
  PixelSet mask;
  bool coasted = false;
};

enum class TrackEventKind { Born, Died };

struct TrackEvent {
  TrackEventKind kind;
  int track_id;
  int frame;

  friend bool operator==(const TrackEvent&, const TrackEvent&) = default;
};

struct FrameOutput {
  int frame = 0;
  std::vector<TrackRecord> records;  // ascending track id
  std::vector<TrackEvent> events;
};

/// One track per detection of the first frame, ids 1..n. Detections below
/// config.min_mask_area are ignored.
TrackerState init(std::span<const InstanceMask> first_detections, const TrackerConfig& config,
                  int frame = 0);

/// Output describing a freshly initialized state: every track as a birth.
FrameOutput initial_output(const TrackerState& state);

/// Advances the tracker by one frame:
///   predict every live track with its interpolated flow (identity under
///   zero_flow or when the track has no valid flow), associate predictions and
///   detections by overlap, keep ids of matched tracks, spawn tracks for
///   unmatched detections, and coast unmatched tracks on their prediction
///   until they miss more than md consecutive frames.
/// Throws FrameOrderViolation unless input.frame == state.frame + 1.
FrameOutput step(TrackerState& state, const FrameInput& input);

/// init followed by step over the sequence; the first output is the init frame.
std::vector<FrameOutput> run(std::span<const InstanceMask> first_detections,
                             std::span<const FrameInput> sequence, const TrackerConfig& config,
                             int first_frame = 0);

}  // namespace iflow
